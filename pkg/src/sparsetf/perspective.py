"""Coupled magnitude functional and its exact entry-wise proximity operator.

The functional couples a complex coefficient with a nonnegative weight,

    phi(x, sigma) = |x|^2 / (2 sigma) + sigma / 2   for sigma > 0,
                    0                               for x = 0, sigma = 0,
                    +inf                            otherwise,

summed over all grid entries. Its prox separates per entry and reduces to
the positive root of a depressed cubic, solved in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import NonPositiveStep, PreconditionViolated, ShapeMismatch

__all__ = [
    "phi_value",
    "varphi_value",
    "CubicRoot",
    "solve_prox_cubic",
    "prox_perspective",
]


def phi_value(x_k: complex, sigma_k: float) -> float:
    """Single-entry value; returns math.inf outside the domain."""
    if sigma_k > 0.0:
        return abs(x_k) ** 2 / (2.0 * sigma_k) + sigma_k / 2.0
    if sigma_k == 0.0 and x_k == 0.0:
        return 0.0
    return math.inf


def varphi_value(x: np.ndarray, sigma: np.ndarray) -> float:
    """Sum of phi over a coefficient grid and a matching weight grid."""
    x = np.asarray(x)
    sigma = np.asarray(sigma, dtype=np.float64)
    if x.shape != sigma.shape:
        raise ShapeMismatch(f"coefficient shape {x.shape} != weight shape {sigma.shape}")
    a2 = np.abs(x) ** 2
    if np.any(sigma < 0.0) or np.any((sigma == 0.0) & (a2 > 0.0)):
        return math.inf
    pos = sigma > 0.0
    return float(np.sum(a2[pos] / (2.0 * sigma[pos]) + sigma[pos] / 2.0))


@dataclass(frozen=True)
class CubicRoot:
    """Cardano data for s^3 + p s + q = 0 together with its positive root."""

    p: float
    q: float
    r: float
    s: float


def solve_prox_cubic(abs_x: float, sigma_k: float, tau: float) -> CubicRoot:
    """Positive root of the prox cubic s^3 + (2 sigma/tau + 1) s - 2|x|/tau = 0.

    Valid only in the shrinkage case of the prox (abs_x > 0); the root is
    unique because q < 0. Exposed scalar-wise for inspection; the batched
    kernels inline the same arithmetic.
    """
    if tau <= 0.0:
        raise NonPositiveStep(f"tau must be > 0, got {tau}")
    if abs_x <= 0.0:
        raise PreconditionViolated("cubic solve requires |x| > 0")
    p = 2.0 * sigma_k / tau + 1.0
    q = -2.0 * abs_x / tau
    r = -0.25 * q * q - p**3 / 27.0
    s = float(_kernel.positive_cubic_roots(np.array([p]), np.array([q]))[0])
    return CubicRoot(p=p, q=q, r=r, s=s)


def prox_perspective(x: np.ndarray, sigma: np.ndarray, tau: float):
    """Exact prox of tau * varphi, applied entry-wise on matching grids.

    Returns a (coefficients, weights) pair in the domain of the functional:
    weights are nonnegative, and strictly positive wherever the returned
    coefficient is nonzero. Output coefficients keep the input phase.
    """
    if tau <= 0.0:
        raise NonPositiveStep(f"tau must be > 0, got {tau}")
    x = np.asarray(x, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.float64)
    if x.shape != sigma.shape:
        raise ShapeMismatch(f"coefficient shape {x.shape} != weight shape {sigma.shape}")
    x_out, sigma_out = _kernel.prox_pairs(x.ravel(), sigma.ravel(), float(tau))
    return x_out.reshape(x.shape), sigma_out.reshape(sigma.shape)
