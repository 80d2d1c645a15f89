"""Pure-numpy twin of the compiled perspective-prox kernel.

Same contract as ``_perspective_cy``: flat arrays in, flat arrays out,
entry order preserved. Kept in sync with the Cython source; the test suite
asserts parity between the two backends.
"""

import numpy as np


def positive_cubic_roots(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unique positive root of s^3 + p s + q = 0 for each entry, q < 0.

    Cardano branches on the sign of r = -q^2/4 - p^3/27, then one
    residual-driven Newton step recovers digits lost in the trigonometric
    branch near r -> 0+.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    r = -0.25 * q * q - (p * p * p) / 27.0
    half = -0.5 * q
    s = np.empty_like(p)

    neg = r < 0.0
    pos = r > 0.0
    zero = ~(neg | pos)
    if np.any(neg):
        disc = np.sqrt(-r[neg])
        s[neg] = np.cbrt(half[neg] + disc) + np.cbrt(half[neg] - disc)
    if np.any(zero):
        s[zero] = 2.0 * np.cbrt(half[zero])
    if np.any(pos):
        rp = r[pos]
        qp = q[pos]
        amp = 2.0 * np.cbrt(np.sqrt(0.25 * qp * qp + rp))
        # q < 0 always here, so atan2(2 sqrt(r), -q) is the principal-branch
        # arctan(-2 sqrt(r) / q) in (0, pi/2).
        s[pos] = amp * np.cos(np.arctan2(2.0 * np.sqrt(rp), -qp) / 3.0)

    f = s * (s * s + p) + q
    df = 3.0 * s * s + p
    safe = df > 0.0
    s[safe] -= f[safe] / df[safe]
    return s


def prox_pairs(x: np.ndarray, sigma: np.ndarray, tau: float):
    """Entry-wise prox of tau * phi on flat (coefficient, weight) pairs.

    Three-way case split:
      1. 2 tau sigma + |x|^2 <= tau^2        -> (0, 0)
      2. x = 0 and 2 sigma > tau             -> (0, sigma - tau/2)
      3. otherwise, shrink |x| by tau*s and lift sigma by tau*(s^2-1)/2
         where s is the positive cubic root for p = 2 sigma/tau + 1,
         q = -2 |x| / tau.
    """
    x = np.asarray(x, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.float64)
    a = np.abs(x)
    case1 = 2.0 * tau * sigma + a * a <= tau * tau
    case2 = ~case1 & (a == 0.0)  # given x = 0, ~case1 is exactly 2 sigma > tau
    case3 = ~(case1 | case2)

    x_out = np.zeros_like(x)
    sigma_out = np.zeros_like(sigma)
    sigma_out[case2] = sigma[case2] - 0.5 * tau
    if np.any(case3):
        a3 = a[case3]
        s = positive_cubic_roots(2.0 * sigma[case3] / tau + 1.0, -2.0 * a3 / tau)
        x_out[case3] = x[case3] * (1.0 - tau * s / a3)
        sigma_out[case3] = sigma[case3] + 0.5 * tau * (s * s - 1.0)
    return x_out, sigma_out
