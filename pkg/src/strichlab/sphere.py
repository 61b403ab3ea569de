"""Zonal spherical harmonics on S^{n-1} built from Gegenbauer polynomials."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special


class QuadratureError(RuntimeError):
    pass


def sphere_area(m: int) -> float:
    """Surface measure of S^{m-1} in R^m (|S^0| = 2)."""
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


def gegenbauer_eval(n: int, k: int, t):
    """C_k^{(n-2)/2}(t) by the three-term recurrence; Chebyshev T_k when n == 2."""
    t = np.asarray(t, dtype=float)
    lam = (n - 2) / 2
    prev = np.ones_like(t)
    if k == 0:
        return prev if t.ndim else float(prev)
    if n == 2:
        cur = t.copy()
        for m in range(1, k):
            prev, cur = cur, 2 * t * cur - prev
    else:
        cur = 2 * lam * t
        for m in range(1, k):
            prev, cur = cur, (2 * t * (m + lam) * cur - (m + 2 * lam - 1) * prev) / (m + 1)
    return cur if t.ndim else float(cur)


def harmonic_dimension(n: int, k: int) -> int:
    """Dimension d(k) of the degree-k spherical harmonics on S^{n-1}."""
    if n < 2 or k < 0:
        raise ValueError("need n >= 2, k >= 0")
    if k == 0:
        return 1
    lower = math.comb(n + k - 3, k - 2) if k >= 2 else 0
    return math.comb(n + k - 1, k) - lower


@lru_cache(maxsize=None)
def _zero_angles(n: int, k: int) -> tuple[float, ...]:
    """Polar angles of the zeros of C_k^{(n-2)/2}(cos theta), plus the endpoints."""
    if k == 0:
        return (0.0, math.pi)
    if n == 2:
        roots = special.roots_chebyt(k)[0]
    else:
        roots = special.roots_gegenbauer(k, (n - 2) / 2)[0]
    return (0.0, *sorted(np.arccos(np.clip(roots, -1, 1)).tolist()), math.pi)


def _theta_integral(f, n: int, k: int, nodes: int) -> float:
    """|S^{n-2}| * integral over [0, pi] of f(theta) sin^{n-2}(theta), panels split at zeros."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.asarray(_zero_angles(n, k))
    half = 0.5 * np.diff(edges)
    th = (0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * x[None, :]
    vals = f(th) * np.sin(th) ** (n - 2) * half[:, None]
    return sphere_area(n - 1) * float(np.sum(vals @ w))


def _converged(f, n: int, k: int, tol: float = 1e-8, max_nodes: int = 1 << 12) -> float:
    nodes = 8 * (k + 4)
    prev = _theta_integral(f, n, k, nodes)
    while nodes < max_nodes:
        nodes *= 2
        cur = _theta_integral(f, n, k, nodes)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(f"sphere quadrature did not settle for n={n}, k={k}")


@lru_cache(maxsize=None)
def zonal_normalization(n: int, k: int) -> float:
    """Factor A with ||A C_k(cos theta)||_{L^2(S^{n-1})} = 1."""
    mass = _converged(lambda th: gegenbauer_eval(n, k, np.cos(th)) ** 2, n, k)
    return 1.0 / math.sqrt(mass)


def zonal_harmonic(n: int, k: int, theta):
    """L^2-normalized zonal harmonic of degree k as a function of the polar angle."""
    return zonal_normalization(n, k) * gegenbauer_eval(n, k, np.cos(theta))


def zonal_lp_norm(n: int, k: int, p) -> float:
    """||Y_k||_{L^p(S^{n-1})} for the normalized zonal harmonic; sup norm when p is inf."""
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    A = zonal_normalization(n, k)
    if math.isinf(p):
        # |C_k^lambda| peaks at the poles for lambda >= 0
        return A * abs(gegenbauer_eval(n, k, 1.0))
    val = _converged(lambda th: np.abs(A * gegenbauer_eval(n, k, np.cos(th))) ** p, n, k)
    return val ** (1.0 / p)


def angular_weight(n: int, k: int, alpha: float) -> float:
    """Eigenvalue of D_sigma^alpha = (1 - Laplace-Beltrami)^(alpha/2) on degree-k harmonics."""
    return (1.0 + k * (k + n - 2)) ** (alpha / 2)
