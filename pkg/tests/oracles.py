"""Independent reference implementations used to verify the package.

Everything here is built from first principles (dense matrices, scalar
loops, bracketed root finding, brute-force minimization) and deliberately
avoids the package's own computational paths.
"""

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, minimize_scalar


# --- dense transform matrices -------------------------------------------------

def dense_gabor_matrix(system, which="analysis_window"):
    """Literal (M*N, L) analysis matrix: row m+nM, entry conj(w[l-an]) e^{-2i pi ml/M}."""
    L = system.signal_length
    M, N = system.shape
    a = system.hop
    w = system.window if which == "analysis_window" else system.dual_window
    l = np.arange(L)
    phase = np.exp(-2j * np.pi * np.outer(np.arange(M), l) / M)  # (M, L)
    G = np.zeros((M * N, L), dtype=np.complex128)
    for n in range(N):
        G[n * M : (n + 1) * M, :] = phase * np.conj(w[(l - a * n) % L])[None, :]
    return G


def flatten_grid(grid):
    """Column-major flatten matching the k = m + n*M index convention."""
    return np.asarray(grid).ravel(order="F")


def unflatten_grid(vec, shape):
    return np.asarray(vec).reshape(shape, order="F")


# --- dense penalty operators --------------------------------------------------

def dense_gradient_matrix(shape):
    """Forward differences (freq then time channel), Neumann edge, on F-order vectors."""
    m, n = shape
    mn = m * n
    freq = np.zeros((mn, mn))
    time = np.zeros((mn, mn))
    for col in range(n):
        for row in range(m):
            k = row + col * m
            if row < m - 1:
                freq[k, (row + 1) + col * m] = 1.0
                freq[k, k] = -1.0
            if col < n - 1:
                time[k, row + (col + 1) * m] = 1.0
                time[k, k] = -1.0
    return np.vstack([freq, time])


def dense_dct2_matrix(m):
    """Orthonormal DCT-II matrix from its definition."""
    j = np.arange(m)
    C = np.cos(np.pi * np.outer(np.arange(m), 2 * j + 1) / (2 * m)) * np.sqrt(2.0 / m)
    C[0, :] /= np.sqrt(2.0)
    return C


def dense_operator_matrix(kind, shape):
    m, n = shape
    if kind == "identity":
        return np.eye(m * n)
    D = dense_gradient_matrix(shape)
    if kind == "gradient":
        return D
    block = np.kron(np.eye(n), dense_dct2_matrix(m))  # DCT along frequency per frame
    return np.vstack([block @ D[: m * n], block @ D[m * n :]])


# --- cubic root and entry-wise prox -------------------------------------------

def brentq_positive_cubic(p, q):
    """Positive root of s^3 + p s + q = 0 (q < 0) by bracketed root finding."""
    f = lambda s: s * (s * s + p) + q
    hi = max(np.sqrt(2.0 * abs(p)), np.cbrt(2.0 * abs(q))) + 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def prox_phi_entry(xk, sk, tau):
    """Scalar three-case prox, cubic solved independently of Cardano."""
    a = abs(xk)
    if 2.0 * tau * sk + a * a <= tau * tau:
        return 0.0j, 0.0
    if a == 0.0:
        return 0.0j, sk - tau / 2.0
    s = brentq_positive_cubic(2.0 * sk / tau + 1.0, -2.0 * a / tau)
    return xk - tau * s * xk / a, sk + tau * (s * s - 1.0) / 2.0


def numeric_prox_perspective(xk, sk, tau):
    """Brute-force minimizer of phi(xi, c) + (|x - xi|^2 + (s - c)^2) / (2 tau).

    For fixed c > 0 the optimal xi is x * c / (c + tau) (plain calculus on
    the quadratic), which reduces the problem to one variable; that convex
    1-d function is minimized by dense sampling plus bounded refinement,
    then compared against the origin pair (0, 0).
    """
    xk = complex(xk)

    def g(c):
        xi = xk * (c / (c + tau))
        return (
            abs(xi) ** 2 / (2.0 * c)
            + c / 2.0
            + (abs(xk - xi) ** 2 + (sk - c) ** 2) / (2.0 * tau)
        )

    best_val = (abs(xk) ** 2 + sk**2) / (2.0 * tau)
    best = (0.0j, 0.0)
    hi = max(abs(xk), sk, 0.0) + 3.0 * tau + 5.0
    grid = np.linspace(1e-9, hi, 4001)
    xi_grid = xk * (grid / (grid + tau))
    vals = (
        np.abs(xi_grid) ** 2 / (2.0 * grid)
        + grid / 2.0
        + (np.abs(xk - xi_grid) ** 2 + (sk - grid) ** 2) / (2.0 * tau)
    )
    k = int(np.argmin(vals))
    lo_b = grid[max(k - 1, 0)]
    hi_b = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(g, bounds=(lo_b, hi_b), method="bounded", options={"xatol": 1e-12})
    if res.fun < best_val:
        c = float(res.x)
        best = (xk * (c / (c + tau)), c)
    return best


# --- reference psi prox pieces ------------------------------------------------

def ref_prox_psi(kind, gamma, z, shape=None, power=None):
    z = np.asarray(z, dtype=np.float64)
    if kind == "zero" or gamma == 0.0:
        return z.copy()
    if kind == "l1":
        return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)
    if kind == "nuclear":
        u, s, vt = scipy.linalg.svd(unflatten_grid(z, shape), full_matrices=False)
        return flatten_grid(u @ np.diag(np.maximum(s - gamma, 0.0)) @ vt)
    if kind == "group_l21":
        half = z.size // 2
        out = np.empty_like(z)
        for i in range(half):
            g = np.array([z[i], z[half + i]])
            norm = np.linalg.norm(g)
            factor = max(0.0, 1.0 - gamma / norm) if norm > 0 else 0.0
            out[i], out[half + i] = factor * g
        return out
    if kind == "p_power":
        out = np.empty_like(z)
        for i, zi in enumerate(z):
            a = abs(zi)
            if a == 0.0:
                out[i] = 0.0
                continue
            if power == 2:
                t = a / (1.0 + 2.0 * gamma)
            else:
                t = brentq(lambda t: t + power * gamma * t ** (power - 1) - a, 0.0, a, xtol=1e-15)
            out[i] = np.sign(zi) * t
        return out
    raise ValueError(kind)


def ref_psi_value(kind, z, shape=None, power=None):
    z = np.asarray(z, dtype=np.float64)
    if kind == "zero":
        return 0.0
    if kind == "l1":
        return float(np.sum(np.abs(z)))
    if kind == "nuclear":
        return float(np.sum(scipy.linalg.svdvals(unflatten_grid(z, shape))))
    if kind == "group_l21":
        half = z.size // 2
        return float(np.sum(np.sqrt(z[:half] ** 2 + z[half:] ** 2)))
    if kind == "p_power":
        return float(np.sum(np.abs(z) ** power))
    raise ValueError(kind)


# --- line-by-line reference of the relaxed primal-dual iteration ---------------

def reference_algorithm(system, d, psi_kind, op_kind, lam, scale, power, tau, mu, rho, niters):
    """Dense, scalar-prox transliteration of the solver loop.

    State lives in flat vectors; the transform, its adjoint and the penalty
    operator are explicit matrices. Returns (x, sigma, u, v) flat after
    niters iterations from the standard initialization.
    """
    M, N = system.shape
    Gw = dense_gabor_matrix(system, "analysis_window")
    Gd = dense_gabor_matrix(system, "dual_window")
    B = dense_operator_matrix(op_kind, (M, N))
    d = np.asarray(d, dtype=np.complex128)

    def P_C(z):
        return z - Gw @ (Gd.conj().T @ z - d)

    x = Gw @ d
    sigma = np.abs(x)
    u = np.zeros(M * N, dtype=np.complex128)
    v = np.zeros(B.shape[0])
    for _ in range(niters):
        x_t = x - tau * u
        s_t = sigma - tau * (B.T @ v)
        xh = np.empty_like(x)
        sh = np.empty_like(sigma)
        for k in range(x.size):
            xh[k], sh[k] = prox_phi_entry(x_t[k], s_t[k], tau)
        u_t = u + mu * (2.0 * xh - x)
        uh = u_t - mu * P_C(u_t / mu)
        v_t = v + mu * (B @ (2.0 * sh - sigma))
        vh = v_t - mu * ref_prox_psi(psi_kind, scale * lam / mu, v_t / mu, shape=(M, N), power=power)
        x = x + rho * (xh - x)
        sigma = sigma + rho * (sh - sigma)
        u = u + rho * (uh - u)
        v = v + rho * (vh - v)
    return x, sigma, u, v
