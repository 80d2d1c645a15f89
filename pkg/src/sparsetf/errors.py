"""Exception hierarchy shared across the package."""


class SparseTFError(Exception):
    """Base class for all errors raised by sparsetf."""


# --- transform construction / application ---

class NonDivisibleHop(SparseTFError):
    """Hop size does not divide the signal length."""


class NotPainless(SparseTFError):
    """Window/lattice geometry leaves the frame operator non-diagonal."""


class IncompleteCover(SparseTFError):
    """Window shifts leave some sample uncovered (zero frame-operator entry)."""


class LengthMismatch(SparseTFError):
    """Vector length disagrees with the expected length."""


class ShapeMismatch(SparseTFError):
    """Grid shape disagrees with the expected (channels, frames) shape."""


# --- proximity operators ---

class PreconditionViolated(SparseTFError):
    """Operation called outside its stated precondition."""


class NonPositiveStep(SparseTFError):
    """Prox step size must be strictly positive."""


# --- solver ---

class ParamsInvalid(SparseTFError):
    """Solver parameters fail validation."""


class StepSizeViolation(ParamsInvalid):
    """tau * mu * ||L||_op^2 exceeds 1."""


class NonPositiveWeights(SparseTFError):
    """Fixed weight vector must be strictly positive."""


class CGNoConvergence(SparseTFError):
    """Conjugate gradient failed to reach the requested residual."""


# --- metrics ---

class DegenerateReference(SparseTFError):
    """Reference penalty or norm is zero; ratio undefined."""


class ZeroVector(SparseTFError):
    """Cosine similarity of a zero vector is undefined."""


# --- file I/O ---

class UnsupportedFormat(SparseTFError):
    """Input file is not a supported PCM WAV variant."""


class EmptyFile(SparseTFError):
    """Input file contains no samples."""


class SidecarMismatch(SparseTFError):
    """Sidecar metadata disagrees with the payload."""


class AboveNyquist(SparseTFError):
    """Requested frequency is at or above the Nyquist limit."""
