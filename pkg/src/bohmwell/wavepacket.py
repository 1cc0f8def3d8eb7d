"""Two-mode wave packet and its derived fields.

With u_e, u_o the normalized real profiles and z(t) = conj(c_e) c_o exp(-i w t),
w = E_o - E_e, the fields reduce to

    rho = |c_e|^2 u_e^2 + |c_o|^2 u_o^2 + 2 Re z  u_e u_o
    j   = Im z (u_e u_o' - u_o u_e')

which is what the evaluators below compute; the diagonal terms carry no
current, so a single-mode packet has j == 0 exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModes, DensityFloor, DomainError, QuantileFailure
from .numerics import QUAD_TOL, ROOT_TOL, Bracket, Tolerance, find_root, integrate_1d
from .spectrum import (
    EigenMode,
    Parity,
    WellGeometry,
    _scalar_profile,
    eval_mode,
    is_scalar,
    profile_and_slope,
    solve_mode,
)

DENSITY_FLOOR = 1e-12
INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class FieldSample:
    x: float
    t: float
    psi: complex
    rho: float
    j: float
    v: float | None


@dataclass(frozen=True)
class WavePacket:
    geom: WellGeometry
    even_mode: EigenMode
    odd_mode: EigenMode
    c_even: complex = INV_SQRT2
    c_odd: complex = INV_SQRT2
    density_floor: float = DENSITY_FLOOR
    quad_tol: Tolerance = field(default=QUAD_TOL, compare=False)

    def __post_init__(self):
        if self.even_mode.parity is not Parity.EVEN or self.odd_mode.parity is not Parity.ODD:
            raise ValueError("even_mode/odd_mode parities are swapped")
        weight = abs(self.c_even) ** 2 + abs(self.c_odd) ** 2
        if abs(weight - 1.0) > 1e-12:
            raise ValueError(f"|c_even|^2 + |c_odd|^2 must be 1, got {weight!r}")
        if not self.density_floor > 0:
            raise ValueError("density_floor must be positive")
        # scalar fast-path constants (the guidance velocity is the hot loop)
        object.__setattr__(self, "_w_even", abs(self.c_even) ** 2)
        object.__setattr__(self, "_w_odd", abs(self.c_odd) ** 2)
        object.__setattr__(self, "_base", self.c_even.conjugate() * self.c_odd)

    @classmethod
    def build(
        cls,
        geom: WellGeometry,
        n_even: int = 1,
        n_odd: int = 1,
        c_even: complex = INV_SQRT2,
        c_odd: complex = INV_SQRT2,
        density_floor: float = DENSITY_FLOOR,
        root_tol: Tolerance = ROOT_TOL,
        quad_tol: Tolerance = QUAD_TOL,
    ) -> "WavePacket":
        even = solve_mode(Parity.EVEN, n_even, geom, root_tol, quad_tol)
        odd = solve_mode(Parity.ODD, n_odd, geom, root_tol, quad_tol)
        return cls(geom, even, odd, complex(c_even), complex(c_odd), density_floor, quad_tol)

    # -- basic properties -------------------------------------------------

    @property
    def splitting(self) -> float:
        return self.odd_mode.energy - self.even_mode.energy

    @property
    def is_stationary(self) -> bool:
        """No cross term, hence no current anywhere."""
        return self.c_even == 0 or self.c_odd == 0

    def half_period(self) -> float:
        if not self.splitting > 0:
            raise DegenerateModes(
                f"E_o={self.odd_mode.energy!r} does not exceed E_e={self.even_mode.energy!r}"
            )
        return math.pi / self.splitting

    def _cross(self, t):
        if is_scalar(t):
            return self._base * cmath.exp(-1j * self.splitting * float(t))
        return self._base * np.exp(-1j * self.splitting * np.asarray(t, dtype=float))

    # -- fields -------------------------------------------------------------

    def psi(self, x, t):
        return self.c_even * eval_mode(self.even_mode, self.geom, x, t) + self.c_odd * eval_mode(
            self.odd_mode, self.geom, x, t
        )

    def _parts(self, x, t):
        ue, due = profile_and_slope(self.even_mode, self.geom, x)
        uo, duo = profile_and_slope(self.odd_mode, self.geom, x)
        return ue, due, uo, duo, self._cross(t)

    def density(self, x, t):
        ue, _, uo, _, z = self._parts(x, t)
        return (
            self._w_even * ue * ue
            + self._w_odd * uo * uo
            + 2.0 * np.real(z) * ue * uo
        )

    def current(self, x, t):
        ue, due, uo, duo, z = self._parts(x, t)
        return np.imag(z) * (ue * duo - uo * due)

    def density_and_current(self, x, t):
        if type(x) is float and type(t) is float:
            if not -self.geom.a <= x <= self.geom.a:
                raise DomainError(f"x={x!r} outside the box [-{self.geom.a}, {self.geom.a}]")
            even, odd = self.even_mode, self.odd_mode
            ue, due = _scalar_profile(even, self.geom, x)
            uo, duo = _scalar_profile(odd, self.geom, x)
            ue, due, uo, duo = even.norm * ue, even.norm * due, odd.norm * uo, odd.norm * duo
            z = self._base * cmath.exp(-1j * self.splitting * t)
        else:
            ue, due, uo, duo, z = self._parts(x, t)
        rho = self._w_even * ue * ue + self._w_odd * uo * uo + 2.0 * z.real * ue * uo
        return rho, z.imag * (ue * duo - uo * due)

    def velocity(self, x: float, t: float) -> float:
        """Guidance velocity j / rho at a single point.

        Raises:
            DensityFloor: rho is below ``density_floor``.
        """
        rho, j = self.density_and_current(x, t)
        if not rho >= self.density_floor:
            raise DensityFloor(x, t, rho, self.density_floor)
        return j / rho

    def sample(self, x: float, t: float) -> FieldSample:
        psi = complex(self.psi(x, t))
        rho, j = self.density_and_current(x, t)
        v = j / rho if rho >= self.density_floor else None
        return FieldSample(float(x), float(t), psi, float(rho), float(j), v)

    # -- probabilities ------------------------------------------------------

    def probability(self, lo: float, hi: float, t: float, tol: Tolerance | None = None) -> float:
        """Integral of rho(., t) over [lo, hi]."""
        return integrate_1d(
            lambda x: self.density(x, t), lo, hi, tol or self.quad_tol, breakpoints=self.geom.breakpoints
        )

    def barrier_probability(self, t: float = 0.0) -> float:
        return self.probability(-self.geom.b, self.geom.b, t)

    def norm(self, t: float) -> float:
        return self.probability(-self.geom.a, self.geom.a, t)


# module-level spellings of the packet operations


def psi(packet: WavePacket, x, t):
    return packet.psi(x, t)


def density(packet: WavePacket, x, t):
    return packet.density(x, t)


def current(packet: WavePacket, x, t):
    return packet.current(x, t)


def velocity(packet: WavePacket, x: float, t: float) -> float:
    return packet.velocity(x, t)


def half_period(packet: WavePacket) -> float:
    return packet.half_period()


def barrier_probability(packet: WavePacket, t: float = 0.0) -> float:
    return packet.barrier_probability(t)


class CumulativeDensity:
    """Cumulative distribution of rho(., t) on [-a, a] with quantile inversion.

    The box is cut into ``panels`` pieces (plus the barrier edges), each
    integrated once; evaluating F(x) then costs one short integral.
    """

    def __init__(self, packet, t: float = 0.0, panels: int = 512, tol: Tolerance | None = None):
        geom = packet.geom
        self.packet = packet
        self.t = float(t)
        self.tol = tol or getattr(packet, "quad_tol", QUAD_TOL)
        nodes = set(np.linspace(-geom.a, geom.a, panels + 1).tolist())
        nodes.update((-geom.b, geom.b))
        self.nodes = np.array(sorted(nodes))
        pieces = [self._segment(lo, hi) for lo, hi in zip(self.nodes[:-1], self.nodes[1:])]
        self.values = np.concatenate([[0.0], np.cumsum(pieces)])

    def _rho(self, x: float) -> float:
        return float(self.packet.density(x, self.t))

    def _segment(self, lo: float, hi: float) -> float:
        return integrate_1d(self._rho, float(lo), float(hi), self.tol)

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def __call__(self, x: float) -> float:
        x = float(x)
        i = int(np.searchsorted(self.nodes, x, side="right")) - 1
        i = min(max(i, 0), len(self.nodes) - 2)
        return float(self.values[i]) + self._segment(self.nodes[i], x)

    def between(self, lo: float, hi: float) -> float:
        return self(hi) - self(lo)

    def quantile(self, p: float, tol: Tolerance = ROOT_TOL) -> float:
        """Position x with F(x) = p, for 0 < p < total."""
        if not 0.0 < p < self.total:
            raise QuantileFailure(f"quantile level {p!r} outside (0, {self.total!r})")
        i = int(np.searchsorted(self.values, p, side="right")) - 1
        i = min(max(i, 0), len(self.nodes) - 2)
        lo, hi = float(self.nodes[i]), float(self.nodes[i + 1])
        base = float(self.values[i])
        if base == p:
            return lo
        try:
            return find_root(lambda x: base + self._segment(lo, x) - p, Bracket(lo, hi), tol)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise QuantileFailure(f"could not invert the cumulative density at p={p!r}: {exc}") from exc
