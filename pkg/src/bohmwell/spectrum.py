"""Bound states of the symmetric double well with infinite outer walls.

Atomic units throughout (hbar = m = 1). The box spans [-a, a]; a rectangular
barrier of height V sits on [-b, b].

Spatial profiles are written in terms of y = |x| so that parity holds exactly:

    outer (b <= y <= a):  g(y) = sin(k (a - y))
    inner (0 <= y <= b):  even  S cosh(alpha y) / cosh(alpha b)
                          odd   S sinh(alpha y) / sinh(alpha b)

with S = sin(k (a - b)). The even profile is u(x) = g(|x|), the odd one
u(x) = -sign(x) g(|x|). Matching value and slope at y = b is exactly the
eigenvalue condition solved by :func:`solve_mode`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoBoundMode
from .numerics import QUAD_TOL, ROOT_TOL, Bracket, Tolerance, find_root, integrate_1d, sign_changes

SCAN_POINTS = 4096
SCAN_MARGIN = 1e-9


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class WellGeometry:
    a: float
    b: float
    V: float

    def __post_init__(self):
        for name in ("a", "b", "V"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"geometry.{name} must be a finite number, got {value!r}")
        if not 0 < self.b < self.a:
            raise DomainError(f"geometry requires 0 < b < a, got a={self.a!r}, b={self.b!r}")
        if not self.V > 0:
            raise DomainError(f"geometry requires V > 0, got V={self.V!r}")

    @property
    def breakpoints(self) -> tuple[float, float]:
        return (-self.b, self.b)


@dataclass(frozen=True)
class EigenMode:
    """One stationary state. ``norm`` is real and positive; the factor ``i``
    of the time-dependent solution is applied by :func:`eval_mode`."""

    parity: Parity
    n: int
    energy: float
    wavenumber: float
    decay_constant: float
    norm: float

    @classmethod
    def unnormalized(cls, parity: Parity, n: int, energy: float, geom: WellGeometry) -> "EigenMode":
        return cls(parity, n, energy, math.sqrt(2.0 * energy), math.sqrt(2.0 * (geom.V - energy)), 1.0)


# ---------------------------------------------------------------------------
# eigenvalue conditions
# ---------------------------------------------------------------------------

def _check_energy(E: float, geom: WellGeometry) -> None:
    if not 0.0 < E < geom.V:
        raise DomainError(f"energy must lie in (0, V={geom.V}), got {E!r}")


def even_residual(E: float, geom: WellGeometry, n: int = 1) -> float:
    _check_energy(E, geom)
    alpha = math.sqrt(2.0 * (geom.V - E))
    ratio = math.sqrt(E) / math.sqrt(geom.V - E)
    return math.atan(ratio / math.tanh(geom.b * alpha)) - n * math.pi + (geom.a - geom.b) * math.sqrt(2.0 * E)


def odd_residual(E: float, geom: WellGeometry, n: int = 1) -> float:
    _check_energy(E, geom)
    alpha = math.sqrt(2.0 * (geom.V - E))
    ratio = math.sqrt(E) / math.sqrt(geom.V - E)
    return math.atan(ratio * math.tanh(geom.b * alpha)) - n * math.pi + (geom.a - geom.b) * math.sqrt(2.0 * E)


def residual(parity: Parity, E: float, geom: WellGeometry, n: int = 1) -> float:
    return even_residual(E, geom, n) if parity is Parity.EVEN else odd_residual(E, geom, n)


def scan_bracket(parity: Parity, n: int, geom: WellGeometry, points: int = SCAN_POINTS) -> Bracket:
    """First sign-change interval of the residual on a uniform grid over (0, V)."""
    margin = SCAN_MARGIN * geom.V
    grid = np.linspace(margin, geom.V - margin, points)
    values = [residual(parity, float(E), geom, n) for E in grid]
    changes = sign_changes(values)
    if changes:
        i = changes[0]
        return Bracket(float(grid[i]), float(grid[i + 1]))
    zeros = [i for i, r in enumerate(values) if r == 0.0]
    if zeros:
        E = float(grid[zeros[0]])
        return Bracket(E - margin, E + margin)
    raise NoBoundMode(
        f"no {parity.value} bound state on branch n={n} below V={geom.V} "
        f"(a={geom.a}, b={geom.b})"
    )


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def _inner_ratio_cosh(alpha: float, y, b: float):
    """cosh(alpha y) / cosh(alpha b), overflow-free."""
    return np.exp(alpha * (y - b)) * (1.0 + np.exp(-2.0 * alpha * y)) / (1.0 + math.exp(-2.0 * alpha * b))


def _inner_ratio_sinh(alpha: float, y, b: float):
    """sinh(alpha y) / sinh(alpha b), overflow-free."""
    return np.exp(alpha * (y - b)) * np.expm1(-2.0 * alpha * y) / math.expm1(-2.0 * alpha * b)


def _scalar_profile(mode: EigenMode, geom: WellGeometry, x: float) -> tuple[float, float]:
    a, b = geom.a, geom.b
    k, alpha = mode.wavenumber, mode.decay_constant
    y = abs(x)
    if y > b:
        g = math.sin(k * (a - y))
        dg = -k * math.cos(k * (a - y))
    else:
        s = math.sin(k * (a - b))
        grow = math.exp(alpha * (y - b))
        if mode.parity is Parity.EVEN:
            den = 1.0 + math.exp(-2.0 * alpha * b)
            g = s * grow * (1.0 + math.exp(-2.0 * alpha * y)) / den
            dg = s * alpha * grow * (-math.expm1(-2.0 * alpha * y)) / den
        else:
            den = -math.expm1(-2.0 * alpha * b)
            g = s * grow * (-math.expm1(-2.0 * alpha * y)) / den
            dg = s * alpha * grow * (1.0 + math.exp(-2.0 * alpha * y)) / den
    sgn = (x > 0) - (x < 0)
    if mode.parity is Parity.EVEN:
        return g, sgn * dg
    return -sgn * g, -dg


def _array_profile(mode: EigenMode, geom: WellGeometry, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = geom.a, geom.b
    k, alpha = mode.wavenumber, mode.decay_constant
    y = np.abs(x)
    outer = y > b
    yi = np.where(outer, b, y)
    s = math.sin(k * (a - b))
    if mode.parity is Parity.EVEN:
        g_in = s * _inner_ratio_cosh(alpha, yi, b)
        dg_in = s * alpha * np.exp(alpha * (yi - b)) * (-np.expm1(-2.0 * alpha * yi)) / (1.0 + math.exp(-2.0 * alpha * b))
    else:
        g_in = s * _inner_ratio_sinh(alpha, yi, b)
        dg_in = s * alpha * np.exp(alpha * (yi - b)) * (1.0 + np.exp(-2.0 * alpha * yi)) / (-math.expm1(-2.0 * alpha * b))
    g = np.where(outer, np.sin(k * (a - y)), g_in)
    dg = np.where(outer, -k * np.cos(k * (a - y)), dg_in)
    sgn = np.sign(x)
    if mode.parity is Parity.EVEN:
        return g, sgn * dg
    return -sgn * g, -dg


def is_scalar(x) -> bool:
    return isinstance(x, (float, int, np.floating, np.integer)) or np.ndim(x) == 0


def _check_domain(geom: WellGeometry, x) -> None:
    if is_scalar(x):
        if not abs(x) <= geom.a:
            raise DomainError(f"x={x!r} outside the box [-{geom.a}, {geom.a}]")
    elif not np.all(np.abs(x) <= geom.a):
        raise DomainError(f"positions outside the box [-{geom.a}, {geom.a}]")


def profile_and_slope(mode: EigenMode, geom: WellGeometry, x):
    """Normalized real profile ``N u(x)`` and its slope ``N u'(x)``."""
    _check_domain(geom, x)
    if is_scalar(x):
        u, du = _scalar_profile(mode, geom, float(x))
        return mode.norm * u, mode.norm * du
    u, du = _array_profile(mode, geom, np.asarray(x, dtype=float))
    return mode.norm * u, mode.norm * du


def profile(mode: EigenMode, geom: WellGeometry, x):
    return profile_and_slope(mode, geom, x)[0]


def _phase(mode: EigenMode, t):
    if is_scalar(t):
        return 1j * cmath.exp(-1j * mode.energy * float(t))
    return 1j * np.exp(-1j * mode.energy * np.asarray(t, dtype=float))


def eval_mode(mode: EigenMode, geom: WellGeometry, x, t):
    """Time-dependent stationary state ``N i exp(-iEt) u(x)``; zero at the walls."""
    return _phase(mode, t) * profile(mode, geom, x)


def eval_mode_dx(mode: EigenMode, geom: WellGeometry, x, t):
    return _phase(mode, t) * profile_and_slope(mode, geom, x)[1]


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

def _norm_integral(mode: EigenMode, geom: WellGeometry, tol: Tolerance) -> float:
    def density(x: float) -> float:
        u, _ = _scalar_profile(mode, geom, x)
        return u * u

    return integrate_1d(density, -geom.a, geom.a, tol, breakpoints=geom.breakpoints)


def solve_mode(
    parity: Parity,
    n: int,
    geom: WellGeometry,
    tol: Tolerance = ROOT_TOL,
    quad_tol: Tolerance = QUAD_TOL,
) -> EigenMode:
    """Bound state of the given parity on branch ``n`` (``n = 1`` is the lowest).

    Raises:
        NoBoundMode: the residual has no sign change in (0, V).
    """
    if int(n) != n or n < 1:
        raise DomainError(f"branch index must be a positive integer, got {n!r}")
    n = int(n)
    bracket = scan_bracket(parity, n, geom)
    E = find_root(lambda e: residual(parity, e, geom, n), bracket, tol)
    raw = EigenMode.unnormalized(parity, n, E, geom)
    norm = 1.0 / math.sqrt(_norm_integral(raw, geom, quad_tol))
    return EigenMode(parity, n, E, raw.wavenumber, raw.decay_constant, norm)


def infinite_barrier_energy(geom: WellGeometry, n: int = 1) -> float:
    """Limit of both branch-``n`` eigenvalues as V grows without bound."""
    return (n * math.pi) ** 2 / (2.0 * (geom.a - geom.b) ** 2)
