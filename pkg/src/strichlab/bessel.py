"""Bessel functions J_nu of real order nu >= 0 at real argument r >= 0.

Two independent evaluation routes are kept apart on purpose:

* ``j_oracle`` is self-contained: an ascending power series (compensated
  summation) where it is well conditioned, otherwise adaptive composite
  Gauss-Legendre quadrature of Schlafli's integral representation.
* ``j_fast`` is the vectorized workhorse used by the propagator quadratures
  (backed by ``scipy.special.jv``).

The remaining functions study the large-argument decomposition
J_nu = main part + O(1/r) and the L^2 bounds on dyadic intervals.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "ConvergenceError",
    "Regime",
    "nu_of",
    "regime",
    "j_oracle",
    "j_oracle_array",
    "j_fast",
    "theta_phase",
    "asymptotic_main",
    "residual_audit",
    "residual_table",
    "decay_audit",
    "square_function_integral",
    "normalization_integral",
]

OSC_R_MIN = 4.0
_GL_ORDER = 20
_MAX_PANELS = 1 << 17


class ConvergenceError(RuntimeError):
    """Adaptive refinement hit its depth cap before reaching the tolerance."""


class Regime(enum.Enum):
    SMALL_ARG = "small-arg"
    TRANSITION = "transition"
    OSCILLATORY = "oscillatory"


def nu_of(n: int, k: int) -> float:
    """Order (n - 2 + 2k)/2 attached to the degree-k spherical harmonics in R^n."""
    if n < 2 or k < 0:
        raise ValueError("need n >= 2 and k >= 0")
    return (n - 2 + 2 * k) / 2


def oscillatory_threshold(nu: float) -> float:
    return 4.0 * nu**1.6


def regime(nu: float, r: float) -> Regime:
    """Which of the three argument ranges (r << nu, transition, r >> nu^(8/5)) r falls in."""
    if r >= max(oscillatory_threshold(nu), OSC_R_MIN):
        return Regime.OSCILLATORY
    if r <= 1.0 or r < nu / 2:
        return Regime.SMALL_ARG
    return Regime.TRANSITION


# ---------------------------------------------------------------------------
# oracle


@lru_cache(maxsize=None)
def _gl(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gl(f, a: float, b: float, panels: int, order: int = _GL_ORDER) -> float:
    x, w = _gl(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = f(pts) * w[None, :] * half[:, None]
    return math.fsum(vals.ravel())


def adaptive_gl(f, a: float, b: float, panels: int, tol: float) -> float:
    """Double the panel count until two successive composite rules agree to ``tol``."""
    if b <= a:
        return 0.0
    panels = max(1, int(panels))
    prev = composite_gl(f, a, b, panels)
    while True:
        panels *= 2
        if panels > _MAX_PANELS:
            raise ConvergenceError(f"no convergence on [{a}, {b}] with {panels // 2} panels")
        cur = composite_gl(f, a, b, panels)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur


def _series(nu: float, r: float) -> tuple[float, float]:
    """Ascending series; returns (value, sum of |terms|)."""
    half = 0.5 * r
    if half == 0.0:
        return (1.0 if nu == 0 else 0.0), 1.0
    log_t0 = nu * math.log(half) - math.lgamma(nu + 1.0)
    if log_t0 < -745.0:
        return 0.0, 0.0
    t = math.exp(log_t0)
    x = half * half
    terms = [t]
    m = 0
    while True:
        t *= -x / ((m + 1) * (m + nu + 1))
        m += 1
        terms.append(t)
        if m > x and abs(t) <= 1e-18 * abs(terms[0]) + 1e-300:
            break
        if m > 10_000:
            raise ConvergenceError("power series did not terminate")
    return math.fsum(terms), math.fsum(abs(v) for v in terms)


def _schlafli(nu: float, r: float, tol: float) -> float:
    def osc(theta):
        return np.cos(r * np.sin(theta) - nu * theta)

    # split at the stationary point of r sin(theta) - nu theta
    pieces = [0.0, math.pi]
    if nu < r:
        pieces = [0.0, math.acos(nu / r), math.pi]
    first = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        panels = math.ceil((r + nu) * (b - a) / 6.0) + 1
        first += adaptive_gl(osc, a, b, panels, tol / 4)
    first /= math.pi

    if float(nu).is_integer():
        return first
    s = math.sin(nu * math.pi)
    tau_max = math.asinh(60.0 / r)
    if nu > 0:
        tau_max = min(tau_max, 60.0 / nu)

    def tail(tau):
        return np.exp(-nu * tau - r * np.sinh(tau))

    second = adaptive_gl(tail, 0.0, tau_max, 4, tol / 4)
    return first - s / math.pi * second


def j_oracle(nu: float, r: float, precision_target: float = 1e-12) -> float:
    """J_nu(r) to absolute error about ``precision_target``.

    Uses the power series for r <= max(8, nu) when its cancellation error
    estimate is below the target, otherwise Schlafli's representation.
    """
    nu = float(nu)
    r = float(r)
    if nu < 0 or r < 0:
        raise ValueError("j_oracle needs nu >= 0 and r >= 0")
    if r <= max(8.0, nu):
        value, mass = _series(nu, r)
        if 8 * np.finfo(float).eps * mass <= precision_target / 10:
            return value
    return _schlafli(nu, r, precision_target)


def j_oracle_array(nu: float, r, precision_target: float = 1e-12) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.array([j_oracle(nu, x, precision_target) for x in r.ravel()]).reshape(r.shape)


def j_fast(nu, r):
    """Vectorized J_nu(r) for the propagator quadratures."""
    return special.jv(nu, r)


# ---------------------------------------------------------------------------
# large-argument structure


def theta_phase(nu: float, r):
    """theta(r) = r[(1 - nu^2/r^2)^(1/2) - (nu/r)(pi/2 - arccos(nu/r))] for r > nu."""
    ra = np.asarray(r, dtype=float)
    if np.any(ra <= nu):
        raise ValueError("theta_phase requires r > nu")
    x = np.minimum(nu / ra, 1.0)
    out = ra * (np.sqrt(1.0 - x * x) - x * (0.5 * math.pi - np.arccos(x)))
    return float(out) if np.isscalar(r) else out


def main_coefficients(nu: float, coefficients: str = "hankel") -> tuple[complex, complex]:
    """(c, c_tilde) in  main = (c r^-1/2 + c_tilde nu^2 r^-3/2) e^{ir} + conjugate.

    ``"hankel"`` gives the two leading terms of Hankel's expansion,
    c = e^{-i(pi/4 + nu pi/2)} / sqrt(2 pi) and c_tilde = i c / 2.
    ``"printed"`` keeps c = e^{-i(pi/4 + nu pi/2)} / (2 sqrt(2 pi)) and
    c_tilde = -2 i c; that pair misses J_nu by half its amplitude, so its
    residual grows like r^(1/2) (kept for comparison in the audits).
    """
    phase = np.exp(-1j * (math.pi / 4 + nu * math.pi / 2))
    if coefficients == "hankel":
        c = phase / math.sqrt(2 * math.pi)
        return c, 0.5j * c
    if coefficients == "printed":
        c = phase / (2 * math.sqrt(2 * math.pi))
        return c, -2j * c
    raise ValueError(f"unknown coefficient set {coefficients!r}")


def asymptotic_main(nu: float, r, coefficients: str = "hankel"):
    """Two-term oscillatory main part of J_nu, valid for nu >= 1/2 and r >= 4 nu^(8/5)."""
    ra = np.asarray(r, dtype=float)
    if nu < 0.5:
        raise ValueError("asymptotic_main needs nu >= 1/2")
    if np.any(ra < oscillatory_threshold(nu)):
        raise ValueError(f"asymptotic_main needs r >= 4 nu^(8/5) = {oscillatory_threshold(nu):.6g}")
    c, ct = main_coefficients(nu, coefficients)
    out = 2.0 * np.real((c * ra**-0.5 + ct * nu * nu * ra**-1.5) * np.exp(1j * ra))
    return float(out) if np.isscalar(r) else out


def residual_table(nu: float, r_grid, j=None, coefficients: str = "hankel"):
    """Columns (r, J, main, r * |J - main|) over ``r_grid``."""
    r = np.asarray(r_grid, dtype=float)
    J = j_oracle_array(nu, r) if j is None else j(nu, r)
    main = asymptotic_main(nu, r, coefficients)
    return r, J, main, r * np.abs(J - main)


def residual_audit(nu: float, r_grid, j=None, coefficients: str = "hankel") -> float:
    """sup over the grid of r |J_nu(r) - main(nu, r)|; the empirical O(1/r) constant."""
    return float(np.max(residual_table(nu, r_grid, j, coefficients)[3]))


def decay_audit(fraction: float = 0.5, nus=None) -> float:
    """Fitted rate c in |J_nu(fraction * nu)| ~ e^{-c nu} (least-squares slope over the sweep)."""
    if not 0 < fraction <= 0.5:
        raise ValueError("fraction must lie in (0, 1/2]")
    nus = np.linspace(10, 80, 15) if nus is None else np.asarray(nus, dtype=float)
    if np.any(nus <= 1):
        raise ValueError("decay sweep needs nu > 1")
    y = np.array([-math.log(abs(j_oracle(v, fraction * v))) for v in nus])
    slope, _ = np.polyfit(nus, y, 1)
    return float(slope)


def square_function_integral(nu: float, R: float, j=j_fast) -> float:
    """Integral of |J_nu|^2 over [R, 2R]."""
    if not R > 0:
        raise ValueError("R must be positive")
    panels = math.ceil(R / 2) + 4
    return composite_gl(lambda x: j(nu, x) ** 2, R, 2 * R, panels, order=16)


def normalization_integral(nu: float, r_max: float, j=j_fast) -> float:
    """Truncated integral of J_nu(r)^2 / r over [0, r_max] (tends to 1/(2 nu))."""
    if nu < 0.5:
        raise ValueError("normalization integral needs nu >= 1/2")
    f = lambda x: j(nu, x) ** 2 / x
    total = 0.0
    # geometric panels toward the origin, where the integrand behaves like r^(2 nu - 1)
    lo = min(1.0, r_max)
    edges = [lo * 2.0**-k for k in range(40)][::-1]
    for a, b in zip(edges[:-1], edges[1:]):
        total += composite_gl(f, a, b, 1, order=16)
    if r_max > 1.0:
        total += composite_gl(f, 1.0, r_max, math.ceil((r_max - 1.0) / 2) + 1, order=16)
    return total


@dataclass(frozen=True)
class AuditConstants:
    """Fixed caps that make the Bessel bounds falsifiable."""

    residual_cap: float = 10.0
    residual_growth: float = 0.05
    square_function_cap: float = 1.0
    decay_min_rate: float = 0.3
    normalization_rel: float = 0.01
