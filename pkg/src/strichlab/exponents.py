"""Strichartz exponent calculus in exact rational arithmetic.

Exponents p, q are stored through their reciprocals so that infinity maps to
zero and every region boundary is decided exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


class RangeError(ValueError):
    """Exponent outside [2, inf]."""


def as_reciprocal(x) -> Fraction:
    """1/x as an exact Fraction; x may be int, Fraction, float, inf or a string like '10/3'."""
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return Fraction(0)
        x = Fraction(s)
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            return Fraction(0)
        if math.isnan(x):
            raise RangeError("exponent is NaN")
        guess = Fraction(x).limit_denominator(1_000_000)
        x = guess if float(guess) == x else Fraction(x)
    x = Fraction(x)
    if x <= 0:
        raise RangeError(f"exponent must be positive, got {x}")
    return 1 / x


def from_reciprocal(inv: Fraction):
    return INF if inv == 0 else 1 / inv


def _checked(n: int, p, q) -> tuple[Fraction, Fraction]:
    if int(n) != n or n < 2:
        raise RangeError(f"dimension n must be an integer >= 2, got {n}")
    ip, iq = as_reciprocal(p), as_reciprocal(q)
    for name, inv in (("p", ip), ("q", iq)):
        if not 0 <= inv <= HALF:
            raise RangeError(f"{name} must lie in [2, inf], got {from_reciprocal(inv)}")
    return ip, iq


def _fmt(x) -> str:
    if x is None:
        return ""
    if x == INF:
        return "inf"
    return str(x)


@dataclass(frozen=True)
class StrichartzExponents:
    n: int
    inv_p: Fraction
    inv_q: Fraction
    s1: Fraction
    s2: Fraction
    s: Fraction

    @property
    def p(self):
        return from_reciprocal(self.inv_p)

    @property
    def q(self):
        return from_reciprocal(self.inv_q)


def exponents(n: int, p, q) -> StrichartzExponents:
    ip, iq = _checked(n, p, q)
    s1 = QUARTER - ip / 2 - iq
    s2 = ip / 2 - QUARTER
    s = n * (HALF - ip) - 2 * iq
    return StrichartzExponents(int(n), ip, iq, s1, s2, s)


class Region(enum.Enum):
    CLASSICAL = "classical"
    EXTENDED = "extended"
    SHARP_LINE = "sharp-line"
    NECESSITY_VIOLATED = "necessity-violated"
    EXCLUDED_ENDPOINT = "excluded-endpoint"


@dataclass(frozen=True)
class AdmissibilityClass:
    region: Region
    alpha_thm1: Fraction | None
    alpha_thm2: Fraction | None
    alpha_wave: Fraction | None


def sharp_value(n: int, inv_p: Fraction) -> Fraction:
    """Right-hand side of the necessary condition: (2n-1)/2 * (1/2 - 1/p)."""
    return Fraction(2 * n - 1, 2) * (HALF - inv_p)


def classical_value(n: int, inv_p: Fraction) -> Fraction:
    return Fraction(n, 2) * (HALF - inv_p)


def classify(n: int, p, q) -> AdmissibilityClass:
    """Place (n, p, q) into an admissibility region and report the angular-regularity thresholds.

    Ties go to the more restrictive boundary label: the classical line is
    Classical and the sharp line is SharpLine.  Inside the classical region
    the alpha thresholds are reported as 0 (no angular regularity needed).
    """
    ip, iq = _checked(n, p, q)
    endpoint_ip = Fraction(2 * n - 3, 2 * (2 * n - 1))
    gap = n * ip + 2 * iq - Fraction(n, 2)
    wave_edge = (n - 1) * (HALF - ip)
    alpha_wave = max(Fraction(0), 2 * iq - wave_edge) if iq <= wave_edge else None

    if (n == 2 and ip == 0 and iq == HALF) or (ip == endpoint_ip and iq == HALF):
        return AdmissibilityClass(Region.EXCLUDED_ENDPOINT, None, None, alpha_wave)
    if iq <= classical_value(n, ip):
        return AdmissibilityClass(Region.CLASSICAL, Fraction(0), Fraction(0), alpha_wave)
    sharp = sharp_value(n, ip)
    if iq > sharp:
        return AdmissibilityClass(Region.NECESSITY_VIOLATED, None, None, alpha_wave)
    a1 = Fraction(5 * n - 1, 5 * n - 5) * gap
    a2 = Fraction(2 * n - 1, 2 * (n - 1)) * gap
    region = Region.SHARP_LINE if iq == sharp else Region.EXTENDED
    return AdmissibilityClass(region, a1, a2, alpha_wave)


def sharp_line_q(n: int, p):
    """q on the sharp line for given (n, p); inf when p == 2.

    The result can drop below 2 (no admissible q); check with ``q_admissible``.
    """
    ip = as_reciprocal(p)
    v = sharp_value(n, ip)
    return from_reciprocal(v)


def q_admissible(q) -> bool:
    return q == INF or q >= 2


def knapp_ratio_exponent(n: int, p, q) -> Fraction:
    """Predicted R-exponent of ||u|| / ||phi|| for the Knapp example.

    Equals 1/q - (2n-1)/2 (1/2 - 1/p); positive exactly when the necessary
    condition fails.
    """
    ip, iq = _checked(n, p, q)
    return iq - sharp_value(n, ip)


def knapp_field_exponent(n: int, p, q) -> Fraction:
    ip, iq = _checked(n, p, q)
    return -Fraction(n, 2) + iq + Fraction(2 * n - 1, 2) * ip


def operator_exponent(n: int, p, q) -> Fraction:
    """R-power of the dyadic shell operator bound: 1/q - (2n-1)/2 (1/2 - 1/p)."""
    ip, iq = _checked(n, p, q)
    return iq - sharp_value(n, ip)


def wave_exponent(n: int, p, q) -> Fraction:
    """R-power for the wave shell operator: 1/q + (n-1)/p - (n-1)/2."""
    ip, iq = _checked(n, p, q)
    return iq + (n - 1) * ip - Fraction(n - 1, 2)


def csv_header() -> list[str]:
    return ["n", "p", "q", "s1", "s2", "s", "region", "alpha_thm1", "alpha_thm2", "alpha_wave"]


def csv_row(n: int, p, q) -> list[str]:
    e = exponents(n, p, q)
    c = classify(n, p, q)
    return [
        str(e.n),
        _fmt(e.p),
        _fmt(e.q),
        _fmt(e.s1),
        _fmt(e.s2),
        _fmt(e.s),
        c.region.value,
        _fmt(c.alpha_thm1),
        _fmt(c.alpha_thm2),
        _fmt(c.alpha_wave),
    ]
