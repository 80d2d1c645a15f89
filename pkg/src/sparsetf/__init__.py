"""Customizable sparse time-frequency representations.

Computes redundant Gabor coefficient grids whose magnitude is shaped by a
user-chosen convex structure penalty, by coupling the complex coefficients
with a nonnegative weight field and solving the resulting convex program
with a relaxed primal-dual iteration.
"""

from ._kernel import backend_name as kernel_backend
from .gabor import (
    ConstraintSet,
    GaborSystem,
    Signal,
    adjoint_dgt,
    build_system,
    dgt,
    feasibility_residual,
    project_constraint,
)
from .metrics import SweepRecord, cosine_similarity, db_magnitude, normalized_l1, penalty_ratio
from .penalties import (
    LinearOperatorSpec,
    PenaltyConfig,
    apply_operator,
    apply_operator_adjoint,
    estimate_operator_norm,
    make_penalty,
    prox_psi,
    psi_value,
)
from .perspective import CubicRoot, phi_value, prox_perspective, solve_prox_cubic, varphi_value
from .signal_io import read_matrix, read_wav, render_spectrogram, synthesize, write_matrix, write_wav
from .solver import (
    Diagnostics,
    SolverParams,
    SolverState,
    fixed_weight_solution,
    init_state,
    iterate,
    objective_value,
    run,
    validate_params,
)

__version__ = "0.1.0"

__all__ = [
    "Signal",
    "GaborSystem",
    "ConstraintSet",
    "build_system",
    "dgt",
    "adjoint_dgt",
    "project_constraint",
    "feasibility_residual",
    "phi_value",
    "varphi_value",
    "CubicRoot",
    "solve_prox_cubic",
    "prox_perspective",
    "LinearOperatorSpec",
    "PenaltyConfig",
    "apply_operator",
    "apply_operator_adjoint",
    "estimate_operator_norm",
    "psi_value",
    "prox_psi",
    "make_penalty",
    "SolverParams",
    "SolverState",
    "Diagnostics",
    "validate_params",
    "init_state",
    "iterate",
    "run",
    "fixed_weight_solution",
    "objective_value",
    "SweepRecord",
    "penalty_ratio",
    "cosine_similarity",
    "normalized_l1",
    "db_magnitude",
    "read_wav",
    "write_wav",
    "synthesize",
    "write_matrix",
    "read_matrix",
    "render_spectrogram",
    "kernel_backend",
    "__version__",
]
