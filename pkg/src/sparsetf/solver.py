"""Relaxed primal-dual iteration for the constrained weighted-magnitude program.

Solves

    min_{x, sigma}  varphi(x, sigma) + lambda * psi(B sigma)
    s.t.            G_dual^H x = d

by alternating the entry-wise perspective prox on the primal pair with
Moreau-form updates of the two duals (constraint projection and penalty
prox), followed by relaxation with factor rho. Convergence to a global
optimum requires tau * mu * max(1, ||B||_op)^2 <= 1 and rho in (0, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse.linalg

from .errors import CGNoConvergence, NonPositiveWeights, ParamsInvalid, ShapeMismatch, StepSizeViolation
from .gabor import ConstraintSet, GaborSystem, Signal, adjoint_dgt, dgt, project_constraint
from .penalties import LinearOperatorSpec, PenaltyConfig, apply_operator, apply_operator_adjoint, estimate_operator_norm, psi_value, prox_psi
from .perspective import prox_perspective, varphi_value

__all__ = [
    "SolverParams",
    "SolverState",
    "Diagnostics",
    "validate_params",
    "init_state",
    "iterate",
    "run",
    "fixed_weight_solution",
    "objective_value",
]

OPERATOR_NORM_SAFETY = 1.01


@dataclass(frozen=True)
class SolverParams:
    """Step sizes and schedule for the primal-dual iteration.

    Defaults mirror the reference protocol (tau = 1/2, mu = 1/5,
    rho = 1.99) at a desk-scale iteration count; pass iterations=5000 for
    the full setting. ``rho`` may be a constant in (0, 2) or a per-iteration
    sequence. ``operator_norm_bound`` is filled by validate_params when
    absent. ``feasibility_tol`` only affects reporting, never the iteration.
    """

    tau: float = 0.5
    mu: float = 0.2
    rho: float | Sequence[float] = 1.99
    iterations: int = 2000
    feasibility_tol: float = 1e-10
    operator_norm_bound: float | None = None


def validate_params(params: SolverParams, spec: LinearOperatorSpec) -> SolverParams:
    """Check the convergence conditions; fill the operator-norm bound if absent.

    The bound gets a 1.01 safety factor on top of the power-iteration
    estimate so a slightly-converged-from-below estimate cannot admit a
    violating step pair.
    """
    if params.tau <= 0.0 or params.mu <= 0.0:
        raise ParamsInvalid(f"tau and mu must be > 0, got tau={params.tau}, mu={params.mu}")
    if params.iterations < 1:
        raise ParamsInvalid(f"iterations must be >= 1, got {params.iterations}")
    rho = params.rho
    if np.isscalar(rho):
        if not 0.0 < float(rho) < 2.0:
            raise ParamsInvalid(f"rho must lie in (0, 2), got {rho}")
    else:
        rho = tuple(float(r) for r in rho)
        if len(rho) < params.iterations:
            raise ParamsInvalid(
                f"rho schedule has {len(rho)} entries for {params.iterations} iterations"
            )
        if any(not 0.0 < r < 2.0 for r in rho):
            raise ParamsInvalid("every rho in the schedule must lie in (0, 2)")
    bound = params.operator_norm_bound
    if bound is None:
        bound = max(1.0, OPERATOR_NORM_SAFETY * estimate_operator_norm(spec))
    elif bound < 1.0:
        raise ParamsInvalid(f"operator_norm_bound must be >= 1, got {bound}")
    product = params.tau * params.mu * bound * bound
    if product > 1.0 + 1e-12:
        raise StepSizeViolation(
            f"tau*mu*||L||_op^2 = {product:.6g} exceeds 1 (tau={params.tau}, mu={params.mu}, bound={bound:.6g})"
        )
    return replace(params, rho=rho, operator_norm_bound=float(bound))


@dataclass(frozen=True)
class SolverState:
    """Primal pair (x, sigma) and dual pair (u, v) after ``iteration`` steps."""

    x: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    v: np.ndarray
    iteration: int = 0


@dataclass
class Diagnostics:
    """Subsampled per-iteration records plus the final pre-snap residual.

    Records land at every ``stride``-th iteration and always at the last
    one. Objective and residual are measured at that iteration's prox
    half-point (the domain-feasible pair the run ultimately returns);
    ``step_norm`` is the change of the relaxed x-iterate.
    """

    stride: int
    iterations: list[int] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    step_norm: list[float] = field(default_factory=list)
    pre_snap_residual: float | None = None

    def record(self, iteration: int, objective: float, residual: float, step_norm: float):
        self.iterations.append(iteration)
        self.objective.append(objective)
        self.residual.append(residual)
        self.step_norm.append(step_norm)


def objective_value(penalty: PenaltyConfig, x: np.ndarray, sigma: np.ndarray) -> float:
    """varphi(x, sigma) + lambda * scale * psi(B sigma)."""
    value = varphi_value(x, sigma)
    if penalty.lam > 0.0 and penalty.psi_kind != "zero":
        value += penalty.lam * psi_value(penalty, apply_operator(penalty.operator, sigma))
    return value


def init_state(system: GaborSystem, d, spec: LinearOperatorSpec) -> SolverState:
    """Start from the plain transform: x = G_w d, sigma = |x|, zero duals."""
    if spec.grid_shape != system.shape:
        raise ShapeMismatch(f"operator grid {spec.grid_shape} != system grid {system.shape}")
    x0 = dgt(system, d)
    return SolverState(
        x=x0,
        sigma=np.abs(x0),
        u=np.zeros(system.shape, dtype=np.complex128),
        v=np.zeros(spec.output_length),
        iteration=0,
    )


def _rho_at(rho, i: int) -> float:
    return float(rho) if np.isscalar(rho) else rho[i]


def _step(state: SolverState, cs: ConstraintSet, penalty: PenaltyConfig, params: SolverParams):
    """One relaxed iteration; returns (next state, prox half-point)."""
    tau, mu = params.tau, params.mu
    rho = _rho_at(params.rho, state.iteration)
    x, sigma, u, v = state.x, state.sigma, state.u, state.v

    x_half, sigma_half = prox_perspective(
        x - tau * u,
        sigma - tau * apply_operator_adjoint(penalty.operator, v),
        tau,
    )
    u_tilde = u + mu * (2.0 * x_half - x)
    u_half = u_tilde - mu * project_constraint(cs, u_tilde / mu)
    v_tilde = v + mu * apply_operator(penalty.operator, 2.0 * sigma_half - sigma)
    v_half = v_tilde - mu * prox_psi(penalty, penalty.scale * penalty.lam / mu, v_tilde / mu)

    new_state = SolverState(
        x=x + rho * (x_half - x),
        sigma=sigma + rho * (sigma_half - sigma),
        u=u + rho * (u_half - u),
        v=v + rho * (v_half - v),
        iteration=state.iteration + 1,
    )
    return new_state, (x_half, sigma_half)


def iterate(
    state: SolverState,
    system: GaborSystem,
    cs: ConstraintSet,
    penalty: PenaltyConfig,
    params: SolverParams,
) -> SolverState:
    """Apply one full relaxed primal-dual iteration to the state."""
    if state.x.shape != system.shape or state.sigma.shape != system.shape:
        raise ShapeMismatch("state grids do not match the system shape")
    params = validate_params(params, penalty.operator)
    new_state, _ = _step(state, cs, penalty, params)
    return new_state


def run(
    system: GaborSystem,
    d,
    penalty: PenaltyConfig,
    params: SolverParams,
    diag_stride: int = 10,
    snap_to_feasible: bool = True,
):
    """Run the iteration and return (coefficients, weights, diagnostics).

    The returned pair is the prox half-point of the final iteration, so the
    weights are nonnegative and the objective there is finite. Iterates are
    only asymptotically feasible; with snap_to_feasible (default) the
    coefficients get one final constraint projection, and diagnostics keep
    the pre-snap residual either way.
    """
    if diag_stride < 1:
        raise ParamsInvalid(f"diag_stride must be >= 1, got {diag_stride}")
    params = validate_params(params, penalty.operator)
    target = d if isinstance(d, Signal) else Signal(d)
    cs = ConstraintSet(system, target, tolerance=params.feasibility_tol)
    state = init_state(system, target, penalty.operator)
    half = (state.x, state.sigma)

    diag = Diagnostics(stride=diag_stride)
    for i in range(params.iterations):
        prev_x = state.x
        state, half = _step(state, cs, penalty, params)
        if state.iteration % diag_stride == 0 or state.iteration == params.iterations:
            diag.record(
                iteration=state.iteration,
                objective=objective_value(penalty, *half),
                residual=cs.residual(half[0]),
                step_norm=float(np.linalg.norm(state.x - prev_x)),
            )

    x_out, sigma_out = half
    diag.pre_snap_residual = cs.residual(x_out)
    if snap_to_feasible:
        x_out = project_constraint(cs, x_out)
    return x_out, sigma_out, diag


def fixed_weight_solution(
    system: GaborSystem,
    d,
    sigma_fixed: np.ndarray,
    tol: float = 1e-10,
    max_iters: int | None = None,
) -> np.ndarray:
    """Closed-form solution for strictly positive frozen weights.

    Solves (G_dual^H diag(sigma) G_dual) z = d by conjugate gradient and
    returns diag(sigma) G_dual z; for constant weights this is the minimum
    norm representation G_w d.
    """
    sigma = np.asarray(sigma_fixed, dtype=np.float64)
    if sigma.shape != system.shape:
        raise ShapeMismatch(f"weight shape {sigma.shape}, system expects {system.shape}")
    if np.any(sigma <= 0.0):
        raise NonPositiveWeights("fixed weights must be strictly positive")
    target = d if isinstance(d, Signal) else Signal(d)
    samples = target.samples
    L = system.signal_length

    def matvec(z):
        grid = sigma * dgt(system, z.astype(np.complex128), which="dual_window")
        return adjoint_dgt(system, grid, "dual_window").samples

    op = scipy.sparse.linalg.LinearOperator((L, L), matvec=matvec, dtype=np.complex128)
    z, info = scipy.sparse.linalg.cg(
        op, samples, rtol=tol, atol=0.0, maxiter=max_iters if max_iters else 20 * L
    )
    if info != 0:
        raise CGNoConvergence(f"conjugate gradient stopped with info={info}")
    rel = np.linalg.norm(matvec(z) - samples) / np.linalg.norm(samples)
    if rel > 10.0 * tol:
        raise CGNoConvergence(f"residual {rel:.3g} above requested {tol:.3g}")
    return sigma * dgt(system, z, which="dual_window")
