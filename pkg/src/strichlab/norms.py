"""Discrete mixed Lebesgue norms L^q_t L^p(r^{n-1} dr) and the data-side norm."""
from __future__ import annotations

import math

import numpy as np

from .dispersion import d_omega_multiplier
from .exponents import RangeError
from .propagator import RadialProfile, SpaceTimeField
from .sphere import angular_weight, zonal_lp_norm


def _exponent(p) -> float:
    p = float(p)
    if not p >= 1:
        raise RangeError(f"Lebesgue exponent must be >= 1, got {p}")
    return p


def lp_norm(values, weights, p) -> float:
    """(sum w |v|^p)^{1/p}; max |v| when p is inf."""
    p = _exponent(p)
    a = np.abs(np.asarray(values))
    if math.isinf(p):
        return float(np.max(a)) if a.size else 0.0
    return float(np.sum(np.asarray(weights) * a**p)) ** (1.0 / p)


def radial_norms(field: SpaceTimeField, p) -> np.ndarray:
    """||u(t, .)||_{L^p(r^{n-1} dr)} for every time row."""
    p = _exponent(p)
    g = field.grid
    a = np.abs(field.values)
    if math.isinf(p):
        return a.max(axis=1)
    w = g.r_weights[None, :] * g.radii() ** (g.n - 1)
    return np.sum(w * a**p, axis=1) ** (1.0 / p)


def mixed_norm(field: SpaceTimeField, p, q) -> float:
    """||u||_{L^q_t L^p(r^{n-1} dr)} with the grid's own quadrature weights."""
    return lp_norm(radial_norms(field, p), field.grid.t_weights, q)


def full_space_norm(field: SpaceTimeField, p, q, k: int | None = None) -> float:
    """L^q_t L^p_x norm of u(t, r) Y_k(sigma) with the L^2-normalized zonal harmonic."""
    k = field.k if k is None else k
    if k is None:
        raise ValueError("harmonic degree unknown; pass k")
    return mixed_norm(field, p, q) * zonal_lp_norm(field.n, k, p)


class RadialAccumulator:
    """Streams blocks of radii and collects per-time radial L^p sums for several p."""

    def __init__(self, n: int, r_nodes, r_weights, ps, nt: int):
        self.n = n
        self.r = np.asarray(r_nodes, dtype=float)
        self.w = np.asarray(r_weights, dtype=float) * self.r ** (n - 1)
        self.ps = [_exponent(p) for p in ps]
        self.sums = {p: np.zeros(nt) for p in self.ps}

    def __call__(self, values, block) -> None:
        a = np.abs(values)
        w = self.w[block]
        for p in self.ps:
            if math.isinf(p):
                np.maximum(self.sums[p], a.max(axis=1), out=self.sums[p])
            else:
                self.sums[p] += (a**p) @ w

    def radial_norms(self, p) -> np.ndarray:
        p = _exponent(p)
        s = self.sums[p]
        return s if math.isinf(p) else s ** (1.0 / p)

    def mixed_norm(self, p, q, t_weights) -> float:
        return lp_norm(self.radial_norms(p), t_weights, q)


def data_norm(a: RadialProfile, n: int, k: int, s: float, alpha: float, rel=None, s1: float = 0.0, s2: float = 0.0) -> float:
    """(1 + k(k+n-2))^{alpha/2} ||rho^s D(rho) a||_{L^2(rho^{n-1} drho)} with D the dispersion multiplier."""
    if abs(s) >= n / 2:
        raise RangeError(f"|s| = {abs(s)} must stay below n/2 = {n / 2}")
    rho = a.nodes
    mult = 1.0 if rel is None or (s1 == 0 and s2 == 0) else d_omega_multiplier(rel, s1, s2, rho)
    vals = rho**s * mult * a.values
    radial = math.sqrt(float(np.sum(a.weights * rho ** (n - 1) * np.abs(vals) ** 2)))
    return angular_weight(n, k, alpha) * radial
