"""Scalar numerical primitives: bracketed root finding, adaptive quadrature and
adaptive explicit ODE integration.

Everything here is written against plain Python floats so that it can be driven
by scalar callables that raise (e.g. the density-floor guard of the velocity
field) without numpy getting in the way.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import MaxIterations, NoSignChange, StepUnderflow

__all__ = [
    "Tolerance",
    "Bracket",
    "OdePath",
    "find_root",
    "integrate_1d",
    "integrate_ode",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_iterations: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if int(self.max_iterations) < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo!r}, {self.hi!r}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


ROOT_TOL = Tolerance(abs_tol=1e-14, rel_tol=4 * _EPS, max_iterations=200)
QUAD_TOL = Tolerance(abs_tol=1e-13, rel_tol=1e-12, max_iterations=500_000)
ODE_TOL = Tolerance(abs_tol=1e-11, rel_tol=1e-11, max_iterations=200_000)


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def find_root(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol: Tolerance = ROOT_TOL,
) -> float:
    """Find a zero of ``f`` inside ``bracket`` with Brent's method.

    Inverse quadratic / secant steps are taken when they stay well inside the
    current bracket; otherwise the step falls back to bisection, so any valid
    sign-change bracket converges.

    Args:
        f: Continuous scalar function.
        bracket: ``Bracket`` or ``(lo, hi)`` pair with ``f(lo)`` and ``f(hi)``
            of opposite sign.
        tol: ``abs_tol`` bounds both ``|f(x)|`` and the absolute part of the
            bracket-width test, ``rel_tol`` the relative part.

    Returns:
        A point ``x`` in ``[lo, hi]``.

    Raises:
        NoSignChange: ``f(lo)`` and ``f(hi)`` have the same strict sign.
        MaxIterations: the iteration budget ran out before convergence.
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket(float(bracket[0]), float(bracket[1]))
    a, b = float(bracket.lo), float(bracket.hi)
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.isnan(fa) or math.isnan(fb) or (fa > 0) == (fb > 0):
        raise NoSignChange(f"f({a!r})={fa!r} and f({b!r})={fb!r} do not bracket a root")

    c, fc = a, fa
    d = e = b - a
    for _ in range(tol.max_iterations):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        delta = 0.5 * (tol.abs_tol + tol.rel_tol * abs(b))
        half = 0.5 * (c - b)
        if abs(fb) <= tol.abs_tol or abs(half) <= delta:
            return b
        if abs(e) >= delta and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * half * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * half * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * half * q - abs(delta * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = half
        else:
            d = e = half
        a, fa = b, fb
        b += d if abs(d) > delta else math.copysign(delta, half)
        fb = float(f(b))
    raise MaxIterations(f"find_root: no convergence within {tol.max_iterations} iterations")


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_INITIAL_PANELS = 4
_MAX_DEPTH = 60


def integrate_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = QUAD_TOL,
    breakpoints: Iterable[float] = (),
) -> float:
    """Adaptive composite Simpson quadrature of ``f`` over ``[lo, hi]``.

    ``breakpoints`` inside the interval start new panels, so integrands with
    derivative kinks there (the eigenfunctions at the barrier edges) stay
    smooth on every panel. Accepted panels are Richardson-corrected.
    ``tol.max_iterations`` caps the number of panel bisections.
    """
    lo, hi = float(lo), float(hi)
    if lo == hi:
        return 0.0
    if lo > hi:
        return -integrate_1d(f, hi, lo, tol, breakpoints)

    edges = sorted({lo, hi, *(float(p) for p in breakpoints if lo < p < hi)})
    stack = []
    for left, right in zip(edges[:-1], edges[1:]):
        xs = np.linspace(left, right, 2 * _INITIAL_PANELS + 1)
        fs = [float(f(float(x))) for x in xs]
        for i in range(0, 2 * _INITIAL_PANELS, 2):
            x0, x1, x2 = float(xs[i]), float(xs[i + 1]), float(xs[i + 2])
            f0, f1, f2 = fs[i], fs[i + 1], fs[i + 2]
            stack.append((x0, x2, f0, f1, f2, (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2), 0))

    coarse = math.fsum(item[5] for item in stack)
    eps = max(tol.abs_tol, tol.rel_tol * abs(coarse))
    length = hi - lo

    parts: list[float] = []
    splits = 0
    while stack:
        x0, x2, f0, f1, f2, whole, depth = stack.pop()
        x1 = 0.5 * (x0 + x2)
        ql, qr = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        fl, fr = float(f(ql)), float(f(qr))
        h = x2 - x0
        left = h / 12.0 * (f0 + 4.0 * fl + f1)
        right = h / 12.0 * (f1 + 4.0 * fr + f2)
        diff = left + right - whole
        local = eps * h / length
        if abs(diff) <= 15.0 * local or depth >= _MAX_DEPTH or h <= 4 * _EPS * max(abs(x0), abs(x2)):
            parts.append(left + right + diff / 15.0)
            continue
        splits += 1
        if splits > tol.max_iterations:
            raise MaxIterations(f"integrate_1d: more than {tol.max_iterations} subdivisions on [{lo}, {hi}]")
        stack.append((x0, x1, f0, fl, f1, left, depth + 1))
        stack.append((x1, x2, f1, fr, f2, right, depth + 1))
    return math.fsum(parts)


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------

# Dormand-Prince 5(4), propagating the 5th-order solution (FSAL).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class OdePath:
    """Accepted steps of a scalar ODE solution with cubic Hermite dense output.

    ``t`` is strictly increasing, ``x`` the state and ``v`` the right-hand side
    at each accepted node.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.x.tolist()))

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def segment(self, s: float) -> int:
        """Index ``i`` of the step ``[t[i], t[i+1]]`` containing ``s``."""
        i = bisect_right(self.t, s) - 1
        return min(max(i, 0), len(self.t) - 2)

    def hermite(self, i: int, s: float) -> float:
        t0, t1 = self.t[i], self.t[i + 1]
        h = t1 - t0
        th = (s - t0) / h
        th2 = th * th
        th3 = th2 * th
        return float(
            (2 * th3 - 3 * th2 + 1) * self.x[i]
            + (th3 - 2 * th2 + th) * h * self.v[i]
            + (-2 * th3 + 3 * th2) * self.x[i + 1]
            + (th3 - th2) * h * self.v[i + 1]
        )

    def __call__(self, s):
        if np.ndim(s) == 0:
            s = float(s)
            if not self.t[0] <= s <= self.t[-1]:
                raise ValueError(f"t={s!r} outside integrated range [{self.t[0]}, {self.t[-1]}]")
            if len(self.t) == 1:
                return float(self.x[0])
            return self.hermite(self.segment(s), s)
        return np.array([self(float(si)) for si in np.asarray(s).ravel()]).reshape(np.shape(s))


def _initial_step(v, t0, x0, f0, direction_span, tol):
    scale = tol.abs_tol + tol.rel_tol * abs(x0)
    d0 = abs(x0) / scale
    d1 = abs(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = v(x0 + h0 * f0, t0 + h0)
    d2 = abs(f1 - f0) / scale / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100 * h0, h1, direction_span)


def integrate_ode(
    v: Callable[[float, float], float],
    x0: float,
    t0: float,
    t1: float,
    tol: Tolerance = ODE_TOL,
    max_step: float | None = None,
) -> OdePath:
    """Integrate ``dx/dt = v(x, t)`` from ``(t0, x0)`` to ``t1 > t0``.

    Dormand-Prince 5(4) with local extrapolation and standard step-size
    control on the mixed error norm ``abs_tol + rel_tol * |x|``;
    ``tol.max_iterations`` caps the number of attempted steps. Exceptions
    raised by ``v`` (``DensityFloor`` in particular) propagate unchanged.

    Raises:
        StepUnderflow: the step size collapsed below floating resolution.
        MaxIterations: the step budget ran out.
    """
    t0, t1, x = float(t0), float(t1), float(x0)
    if not t1 > t0:
        raise ValueError(f"integrate_ode requires t1 > t0, got t0={t0!r}, t1={t1!r}")
    span = t1 - t0
    hmax = span if max_step is None else min(float(max_step), span)

    ts, xs, vs = [t0], [x], []
    t = t0
    k1 = float(v(x, t))
    vs.append(k1)
    h = min(_initial_step(v, t, x, k1, span, tol), hmax)

    attempts = 0
    while t < t1:
        attempts += 1
        if attempts > tol.max_iterations:
            raise MaxIterations(f"integrate_ode: step budget {tol.max_iterations} exhausted at t={t!r}")
        if h < 16 * _EPS * max(abs(t), 1.0):
            raise StepUnderflow(f"integrate_ode: step size {h!r} underflow at t={t!r}, x={x!r}")
        last = t + h >= t1 or (t1 - (t + h)) < 16 * _EPS * max(abs(t1), 1.0)
        if last:
            h = t1 - t

        k = [k1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        for s in range(1, 6):
            acc = 0.0
            for j, a in enumerate(_A[s]):
                acc += a * k[j]
            k[s] = float(v(x + h * acc, t + _C[s] * h))
        x_new = x + h * (_B5[0] * k[0] + _B5[2] * k[2] + _B5[3] * k[3] + _B5[4] * k[4] + _B5[5] * k[5])
        t_new = t1 if last else t + h
        k[6] = float(v(x_new, t_new))

        err_abs = abs(h * sum(e * ki for e, ki in zip(_E, k)))
        scale = tol.abs_tol + tol.rel_tol * max(abs(x), abs(x_new))
        err = err_abs / scale

        if err <= 1.0:
            t, x, k1 = t_new, x_new, k[6]
            ts.append(t)
            xs.append(x)
            vs.append(k1)
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))
            h = min(h * factor, hmax)
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)

    return OdePath(np.asarray(ts), np.asarray(xs), np.asarray(vs))


def refine_crossing(path: OdePath, i: int, level: float, tol: float = 1e-10) -> float:
    """Bisect the dense output on step ``i`` for the time where ``x == level``."""
    lo, hi = float(path.t[i]), float(path.t[i + 1])
    g_lo = path.x[i] - level
    if g_lo == 0.0:
        return lo
    if path.x[i + 1] - level == 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g = path.hermite(i, mid) - level
        if g == 0.0:
            return mid
        if (g > 0) == (g_lo > 0):
            lo, g_lo = mid, g
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossings(path: OdePath, level: float, tol: float = 1e-10) -> list[tuple[float, int]]:
    """All times where the path crosses ``level``, with direction +1 / -1.

    Sign changes are detected between accepted nodes and refined on the
    Hermite interpolant. Touching the level without changing side is not
    reported.
    """
    g = path.x - level
    out: list[tuple[float, int]] = []
    side = np.sign(g)
    # a node sitting exactly on the level inherits the side it is heading to
    for i in range(len(side) - 2, -1, -1):
        if side[i] == 0:
            side[i] = side[i + 1]
    for i in range(len(g) - 1):
        if side[i] != side[i + 1] and side[i] != 0 and side[i + 1] != 0:
            out.append((refine_crossing(path, i, level, tol), int(side[i + 1])))
    return out


def sign_changes(values: Sequence[float]) -> list[int]:
    """Indices ``i`` with ``values[i]`` and ``values[i+1]`` of strictly opposite sign."""
    return [i for i in range(len(values) - 1) if values[i] * values[i + 1] < 0]
