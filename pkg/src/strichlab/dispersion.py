"""Radial dispersion relations omega(rho) and the quantities derived from them.

Every family carries hard-coded closed-form derivatives, so nothing here
relies on finite differences or symbolic algebra.  Orders 0..4 are the public
contract; order 5 is also available because the ratio condition
``rho |omega^(k+1)| <~ |omega^(k)|`` is checked up to k = 4.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

MAX_ORDER = 5


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class SingularityError(ArithmeticError):
    """A multiplier is singular at the requested frequency."""


class Family(enum.Enum):
    POWER = "power"
    KLEIN_GORDON = "klein-gordon"
    BOUSSINESQ = "boussinesq"
    MODIFIED_BOUSSINESQ = "modified-boussinesq"
    WAVE = "wave"


_ALIASES = {
    "power": Family.POWER,
    "powerlaw": Family.POWER,
    "klein-gordon": Family.KLEIN_GORDON,
    "kleingordon": Family.KLEIN_GORDON,
    "kg": Family.KLEIN_GORDON,
    "boussinesq": Family.BOUSSINESQ,
    "ibq": Family.BOUSSINESQ,
    "modified-boussinesq": Family.MODIFIED_BOUSSINESQ,
    "modifiedboussinesq": Family.MODIFIED_BOUSSINESQ,
    "imbq": Family.MODIFIED_BOUSSINESQ,
    "wave": Family.WAVE,
}


def _falling(a: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= a - j
    return out


def _power(a, rho, order):
    return _falling(a, order) * rho ** (a - order)


def _klein_gordon(rho, order):
    s2 = 1.0 + rho * rho
    s = np.sqrt(s2)
    if order == 0:
        return s
    if order == 1:
        return rho / s
    if order == 2:
        return 1.0 / (s2 * s)
    if order == 3:
        return -3.0 * rho / (s2 * s2 * s)
    if order == 4:
        return (12.0 * rho**2 - 3.0) / (s2**3 * s)
    return (45.0 * rho - 60.0 * rho**3) / (s2**4 * s)


def _boussinesq(rho, order):
    s2 = 1.0 + rho * rho
    s = np.sqrt(s2)
    if order == 0:
        return rho * s
    if order == 1:
        return (1.0 + 2.0 * rho**2) / s
    if order == 2:
        return (2.0 * rho**3 + 3.0 * rho) / (s2 * s)
    if order == 3:
        return 3.0 / (s2 * s2 * s)
    if order == 4:
        return -15.0 * rho / (s2**3 * s)
    return (90.0 * rho**2 - 15.0) / (s2**4 * s)


def _modified_boussinesq(rho, order):
    # rho / sqrt(1 + rho^2) is the first derivative of sqrt(1 + rho^2)
    if order < MAX_ORDER:
        return _klein_gordon(rho, order + 1)
    s2 = 1.0 + rho * rho
    s = np.sqrt(s2)
    return (45.0 - 540.0 * rho**2 + 360.0 * rho**4) / (s2**5 * s)


def _wave(rho, order):
    if order == 0:
        return rho * 1.0
    if order == 1:
        return np.ones_like(rho) * 1.0
    return np.zeros_like(rho) * 1.0


@dataclass(frozen=True)
class DispersionRelation:
    """One of the radial symbol families.

    ``PowerLaw(a)`` is rho**a (a > 0, a != 1); the remaining families are
    sqrt(1+rho^2), rho sqrt(1+rho^2), rho/sqrt(1+rho^2) and rho.
    """

    family: Family
    a: float | None = None

    def __post_init__(self):
        if self.family is Family.POWER:
            if self.a is None or not self.a > 0 or self.a == 1:
                raise ValueError(f"power-law exponent must satisfy a > 0, a != 1; got {self.a}")
        elif self.a is not None:
            raise ValueError(f"{self.family.value} takes no exponent")

    @classmethod
    def power(cls, a: float) -> "DispersionRelation":
        return cls(Family.POWER, float(a))

    @classmethod
    def parse(cls, token: str) -> "DispersionRelation":
        """Parse a text token such as ``power:2.0`` or ``klein-gordon``."""
        name, _, arg = token.strip().lower().partition(":")
        fam = _ALIASES.get(name.replace("_", "-")) or _ALIASES.get(name.replace("-", "").replace("_", ""))
        if fam is None:
            raise ValueError(f"unknown dispersion family {token!r}")
        if fam is Family.POWER:
            if not arg:
                raise ValueError("power family needs an exponent, e.g. 'power:2'")
            return cls.power(float(arg))
        if arg:
            raise ValueError(f"{fam.value} takes no parameter (got {token!r})")
        return cls(fam)

    @property
    def token(self) -> str:
        if self.family is Family.POWER:
            return f"power:{self.a!r}"
        return self.family.value

    def __str__(self):
        return self.token

    def omega(self, rho, order: int = 0):
        """omega^(order)(rho); accepts scalars or arrays."""
        return eval_omega(self, rho, order)

    __call__ = omega


KleinGordon = DispersionRelation(Family.KLEIN_GORDON)
Boussinesq = DispersionRelation(Family.BOUSSINESQ)
ModifiedBoussinesq = DispersionRelation(Family.MODIFIED_BOUSSINESQ)
Wave = DispersionRelation(Family.WAVE)


def PowerLaw(a: float) -> DispersionRelation:
    return DispersionRelation.power(a)


def eval_omega(rel: DispersionRelation, rho, order: int = 0):
    """Closed-form omega^(order)(rho) for rho > 0 and order in 0..5."""
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise DomainError(f"derivative order must be an integer in 0..{MAX_ORDER}, got {order!r}")
    scalar = np.isscalar(rho)
    r = np.asarray(rho, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("omega is only defined for rho > 0")
    fam = rel.family
    if fam is Family.POWER:
        out = _power(rel.a, r, order)
    elif fam is Family.KLEIN_GORDON:
        out = _klein_gordon(r, order)
    elif fam is Family.BOUSSINESQ:
        out = _boussinesq(r, order)
    elif fam is Family.MODIFIED_BOUSSINESQ:
        out = _modified_boussinesq(r, order)
    else:
        out = _wave(r, order)
    return float(out) if scalar else np.asarray(out, dtype=float)


def lambda0(rel: DispersionRelation, N: float) -> float:
    """Normalized curvature |N omega''(N) / omega'(N)| at frequency scale N."""
    if not N > 0:
        raise DomainError("N must be positive")
    w1 = eval_omega(rel, N, 1)
    if w1 == 0:
        raise DomainError(f"omega'({N}) = 0")
    return abs(N * eval_omega(rel, N, 2) / w1)


def d_omega_multiplier(rel: DispersionRelation, s1: float, s2: float, rho):
    """(omega'(rho)/rho)**s1 * |omega''(rho)|**s2."""
    r = np.asarray(rho, dtype=float)
    w1 = eval_omega(rel, r, 1)
    w2 = np.abs(eval_omega(rel, r, 2))
    if s2 < 0 and np.any(w2 == 0):
        raise SingularityError(f"|omega''|**{s2} is singular where omega'' vanishes ({rel.token})")
    out = (w1 / r) ** s1 * w2**s2
    return float(out) if np.isscalar(rho) else out


@dataclass(frozen=True)
class RescaledProfile:
    """Symbol rescaled to the unit frequency annulus around scale ``N``.

    varpi(rho) = omega(N rho) / (N omega'(N)), so that varpi'(1) == 1.
    """

    base: DispersionRelation
    N: float = 1.0

    def __post_init__(self):
        if not self.N > 0:
            raise DomainError("N must be positive")

    @property
    def scale(self) -> float:
        return self.N * eval_omega(self.base, self.N, 1)

    @property
    def lambda0(self) -> float:
        return lambda0(self.base, self.N)

    def omega(self, rho, order: int = 0):
        r = np.asarray(rho, dtype=float)
        out = self.N**order * eval_omega(self.base, self.N * r, order) / self.scale
        return float(out) if np.isscalar(rho) else out

    __call__ = omega

    @property
    def token(self) -> str:
        return f"{self.base.token}@N={self.N!r}"


@dataclass(frozen=True)
class Reversed:
    """Time-reversed phase: -varpi."""

    inner: object

    def omega(self, rho, order: int = 0):
        return -self.inner.omega(rho, order)

    __call__ = omega


# --------------------------------------------------------------------------
# structural conditions


@dataclass
class ConditionReport:
    condition_i: bool
    condition_ii: dict[int, bool]
    condition_iii: dict[int, bool]
    condition_iv: bool
    worst: dict[str, tuple[float, float]] = field(default_factory=dict)
    witness: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return (
            self.condition_i
            and all(self.condition_ii.values())
            and all(self.condition_iii.values())
            and self.condition_iv
        )


def dyadic_grid(lo_exp: int = -10, hi_exp: int = 10, per_octave: int = 64) -> np.ndarray:
    """Log-spaced grid with ``per_octave`` points per octave; includes every power of two."""
    k = np.arange(lo_exp * per_octave, hi_exp * per_octave + 1)
    return np.exp2(k / per_octave)


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(num == 0, 0.0, num / den)
    return np.where((num != 0) & (den == 0), np.inf, out)


def check_conditions(
    rel: DispersionRelation,
    grid: np.ndarray | None = None,
    ratio_tolerance: float = 32.0,
    per_octave: int | None = None,
) -> ConditionReport:
    """Check conditions (i)-(iv) on a dyadic grid.

    ``~`` is read as ratio in [1/tol, tol] and ``<~`` as ratio <= tol.  The
    grid must be geometric with an integer number of points per octave so
    that (ii) can be tested on windows [rho, 2 rho).
    """
    if grid is None:
        grid = dyadic_grid()
        per_octave = 64
    grid = np.asarray(grid, dtype=float)
    if per_octave is None:
        per_octave = int(round(math.log(2) / math.log(grid[1] / grid[0])))
    tol = float(ratio_tolerance)
    d = {k: np.abs(eval_omega(rel, grid, k)) for k in range(MAX_ORDER + 1)}
    signed2 = eval_omega(rel, grid, 2)
    worst: dict[str, tuple[float, float]] = {}
    witness: dict[str, tuple[float, float]] = {}

    def record(name, values, ok_mask, worst_idx):
        worst[name] = (float(grid[worst_idx]), float(values[worst_idx]))
        if not ok_mask.all():
            witness[name] = worst[name]
        return bool(ok_mask.all())

    # (i): omega' > 0 and omega'' of one strict sign
    w1 = eval_omega(rel, grid, 1)
    pos = np.all(signed2 > 0)
    neg = np.all(signed2 < 0)
    cond_i = bool(np.all(w1 > 0) and (pos or neg))
    if not cond_i:
        bad = np.flatnonzero(~(w1 > 0))
        if bad.size == 0:
            zero = np.flatnonzero(signed2 == 0)
            bad = zero if zero.size else np.flatnonzero(np.sign(signed2) != np.sign(signed2[0]))
        i = int(bad[0])
        witness["i"] = (float(grid[i]), float(signed2[i] / w1[i]) if w1[i] else math.inf)
        worst["i"] = witness["i"]

    # (ii): |omega^(k)| comparable on every window [rho, 2 rho)
    cond_ii = {}
    for k in (1, 2):
        v = d[k]
        m = len(grid) - per_octave
        ratios = np.empty(m)
        for i in range(m):
            win = v[i : i + per_octave]
            hi, lo = win.max(), win.min()
            ratios[i] = 1.0 if hi == 0 else (math.inf if lo == 0 else hi / lo)
        j = int(np.argmax(ratios))
        name = f"ii.{k}"
        worst[name] = (float(grid[j]), float(ratios[j]))
        cond_ii[k] = bool(np.all(ratios <= tol))
        if not cond_ii[k]:
            witness[name] = worst[name]

    # (iii): rho |omega^(k+1)| <~ |omega^(k)|
    cond_iii = {}
    for k in range(1, 5):
        r = _ratio(grid * d[k + 1], d[k])
        cond_iii[k] = record(f"iii.{k}", r, r <= tol, int(np.argmax(r)))

    # (iv): rho |omega''| ~ omega'
    r = _ratio(grid * d[2], d[1])
    dev = np.maximum(r, _ratio(np.ones_like(r), r))
    cond_iv = record("iv", r, (r <= tol) & (r >= 1.0 / tol), int(np.argmax(dev)))

    return ConditionReport(cond_i, cond_ii, cond_iii, cond_iv, worst, witness)
