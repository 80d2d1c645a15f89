"""Structure penalties on the weight grid: linear operators and prox maps.

A penalty is lambda * psi(B sigma) with psi one of a small catalog (l1,
nuclear norm, per-pixel group l2,1, entry-wise p-th power) and B either
the identity, a 2-d forward-difference gradient, or that gradient followed
by an orthonormal DCT along the frequency axis. Grids of shape (M, N) are
flattened column-major so entry k = m + n*M matches the coefficient-grid
index convention.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import LengthMismatch, ShapeMismatch

__all__ = [
    "LinearOperatorSpec",
    "PenaltyConfig",
    "apply_operator",
    "apply_operator_adjoint",
    "estimate_operator_norm",
    "psi_value",
    "prox_psi",
    "make_penalty",
    "PENALTY_PRESETS",
]

OPERATOR_KINDS = ("identity", "gradient", "dct_gradient")
PSI_KINDS = ("zero", "l1", "nuclear", "group_l21", "p_power")


@dataclass(frozen=True)
class LinearOperatorSpec:
    """Linear map from an (M, N) weight grid to a length-J real vector."""

    kind: str
    grid_shape: tuple[int, int]

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"operator kind must be one of {OPERATOR_KINDS}, got {self.kind!r}")
        m, n = self.grid_shape
        if m < 1 or n < 1:
            raise ValueError(f"grid shape must be positive, got {self.grid_shape}")
        object.__setattr__(self, "grid_shape", (int(m), int(n)))

    @property
    def output_length(self) -> int:
        m, n = self.grid_shape
        return m * n if self.kind == "identity" else 2 * m * n


@dataclass(frozen=True)
class PenaltyConfig:
    """lambda * scale * psi(B sigma); scale mirrors coefficients like 2||.||_1."""

    psi_kind: str
    operator: LinearOperatorSpec
    lam: float
    scale: float = 1.0
    power: int | None = None

    def __post_init__(self):
        if self.psi_kind not in PSI_KINDS:
            raise ValueError(f"psi kind must be one of {PSI_KINDS}, got {self.psi_kind!r}")
        if self.lam < 0.0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if self.psi_kind == "nuclear" and self.operator.kind != "identity":
            raise ValueError("nuclear norm acts on the grid itself; operator must be identity")
        if self.psi_kind == "group_l21" and self.operator.kind not in ("gradient", "dct_gradient"):
            raise ValueError("group_l21 groups gradient channels; operator must be a gradient")
        if self.psi_kind == "p_power":
            if self.power not in (2, 3, 4):
                raise ValueError(f"p_power supports p in {{2, 3, 4}}, got {self.power}")
        elif self.power is not None:
            raise ValueError("power is only meaningful for psi_kind='p_power'")


def _check_grid(spec: LinearOperatorSpec, sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != spec.grid_shape:
        raise ShapeMismatch(f"grid shape {sigma.shape}, operator expects {spec.grid_shape}")
    return sigma


def _check_vector(spec: LinearOperatorSpec, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size != spec.output_length:
        raise LengthMismatch(f"vector length {y.size}, operator expects {spec.output_length}")
    return y


def _forward_diff(sigma: np.ndarray):
    """Forward differences along frequency (rows) and time (cols), Neumann edge."""
    df = np.zeros_like(sigma)
    dt = np.zeros_like(sigma)
    df[:-1, :] = sigma[1:, :] - sigma[:-1, :]
    dt[:, :-1] = sigma[:, 1:] - sigma[:, :-1]
    return df, dt


def _forward_diff_adjoint(df: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """Negative divergence matching _forward_diff (last difference row/col unused)."""
    out = np.zeros_like(df)
    out[1:, :] += df[:-1, :]
    out[:-1, :] -= df[:-1, :]
    out[:, 1:] += dt[:, :-1]
    out[:, :-1] -= dt[:, :-1]
    return out


def apply_operator(spec: LinearOperatorSpec, sigma: np.ndarray) -> np.ndarray:
    """Apply B to a weight grid; gradient outputs stack (freq, time) channels."""
    sigma = _check_grid(spec, sigma)
    if spec.kind == "identity":
        return sigma.ravel(order="F")
    df, dt = _forward_diff(sigma)
    if spec.kind == "dct_gradient":
        df = scipy.fft.dct(df, type=2, axis=0, norm="ortho")
        dt = scipy.fft.dct(dt, type=2, axis=0, norm="ortho")
    return np.concatenate([df.ravel(order="F"), dt.ravel(order="F")])


def apply_operator_adjoint(spec: LinearOperatorSpec, y: np.ndarray) -> np.ndarray:
    """Exact adjoint of apply_operator, returning an (M, N) grid."""
    y = _check_vector(spec, y)
    m, n = spec.grid_shape
    if spec.kind == "identity":
        return y.reshape((m, n), order="F")
    df = y[: m * n].reshape((m, n), order="F")
    dt = y[m * n :].reshape((m, n), order="F")
    if spec.kind == "dct_gradient":
        df = scipy.fft.idct(df, type=2, axis=0, norm="ortho")
        dt = scipy.fft.idct(dt, type=2, axis=0, norm="ortho")
    return _forward_diff_adjoint(df, dt)


@functools.lru_cache(maxsize=64)
def estimate_operator_norm(spec: LinearOperatorSpec, max_iters: int = 5000, tol: float = 1e-12) -> float:
    """Power-iteration estimate of ||B||_op, floored at 1.

    Iterates B^H B from a seeded random start (deterministic, and almost
    surely not orthogonal to the top singular vector); the iterate norm is
    the squared-norm estimate. The identity short-circuits to exactly 1.
    Results are cached per (kind, shape).
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if spec.kind == "identity":
        return 1.0
    m, n = spec.grid_shape
    t = np.random.default_rng(0x5EED).standard_normal((m, n))
    t /= np.linalg.norm(t)
    est = 0.0
    for _ in range(max_iters):
        t = apply_operator_adjoint(spec, apply_operator(spec, t))
        lam = np.linalg.norm(t)
        if lam == 0.0:
            return 1.0
        t /= lam
        new_est = float(np.sqrt(lam))
        if abs(new_est - est) <= tol * max(1.0, new_est):
            est = new_est
            break
        est = new_est
    return max(1.0, est)


def _group_norms(z: np.ndarray) -> np.ndarray:
    half = z.size // 2
    return np.hypot(z[:half], z[half:])


def psi_value(cfg: PenaltyConfig, z: np.ndarray) -> float:
    """scale * psi(z) for the configured kind (lambda not included)."""
    z = _check_vector(cfg.operator, z)
    if cfg.psi_kind == "zero":
        return 0.0
    if cfg.psi_kind == "l1":
        base = np.sum(np.abs(z))
    elif cfg.psi_kind == "nuclear":
        base = np.sum(np.linalg.svd(z.reshape(cfg.operator.grid_shape, order="F"), compute_uv=False))
    elif cfg.psi_kind == "group_l21":
        base = np.sum(_group_norms(z))
    else:  # p_power
        base = np.sum(np.abs(z) ** cfg.power)
    return float(cfg.scale * base)


def _prox_power(gamma: float, z: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return z / (1.0 + 2.0 * gamma)
    # Safeguarded Newton on t + p*gamma*t^(p-1) = |z|, t in [0, |z|]; the
    # map is increasing so the bracket never collapses to the wrong side.
    a = np.abs(z)
    lo = np.zeros_like(a)
    hi = a.copy()
    t = a / (1.0 + p * gamma)  # underestimate, inside the bracket
    for _ in range(100):
        f = t + p * gamma * t ** (p - 1) - a
        lo = np.where(f < 0.0, t, lo)
        hi = np.where(f > 0.0, t, hi)
        step = f / (1.0 + p * (p - 1) * gamma * t ** (p - 2))
        t_new = t - step
        outside = (t_new <= lo) | (t_new >= hi)
        t_new = np.where(outside, 0.5 * (lo + hi), t_new)
        if np.all(np.abs(t_new - t) <= 1e-12 * np.maximum(1.0, t_new)):
            t = t_new
            break
        t = t_new
    return np.sign(z) * t


def prox_psi(cfg: PenaltyConfig, gamma: float, z: np.ndarray) -> np.ndarray:
    """Prox of gamma * psi at z; gamma carries scale * lambda / mu, folded by the caller."""
    z = _check_vector(cfg.operator, z)
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if cfg.psi_kind == "zero" or gamma == 0.0:
        return z.copy()
    if cfg.psi_kind == "l1":
        return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)
    if cfg.psi_kind == "nuclear":
        grid = z.reshape(cfg.operator.grid_shape, order="F")
        u, s, vt = np.linalg.svd(grid, full_matrices=False)
        shrunk = np.maximum(s - gamma, 0.0)
        return ((u * shrunk) @ vt).ravel(order="F")
    if cfg.psi_kind == "group_l21":
        norms = _group_norms(z)
        shrink = np.zeros_like(norms)
        nz = norms > 0.0
        shrink[nz] = np.maximum(0.0, 1.0 - gamma / norms[nz])
        return z * np.concatenate([shrink, shrink])
    return _prox_power(gamma, z, cfg.power)


# CLI-facing presets: name -> (psi_kind, operator_kind, power).
PENALTY_PRESETS = {
    "zero": ("zero", "identity", None),
    "l1": ("l1", "identity", None),
    "nuclear": ("nuclear", "identity", None),
    "tv": ("group_l21", "gradient", None),
    "harmonic": ("group_l21", "dct_gradient", None),
    "p2": ("p_power", "identity", 2),
    "p3": ("p_power", "identity", 3),
    "p4": ("p_power", "identity", 4),
}


def make_penalty(name: str, grid_shape: tuple[int, int], lam: float, scale: float = 1.0) -> PenaltyConfig:
    """Build a PenaltyConfig from a preset name (see PENALTY_PRESETS)."""
    if name not in PENALTY_PRESETS:
        raise ValueError(f"unknown penalty {name!r}; choose from {sorted(PENALTY_PRESETS)}")
    psi_kind, op_kind, power = PENALTY_PRESETS[name]
    spec = LinearOperatorSpec(kind=op_kind, grid_shape=grid_shape)
    return PenaltyConfig(psi_kind=psi_kind, operator=spec, lam=lam, scale=scale, power=power)
