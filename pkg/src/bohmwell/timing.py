"""Critical points, transmission/reflection coefficients and barrier times.

Two independent routes are provided:

* route B works from rho and j alone: cumulative-probability conditions give
  s1, s2, t_p, t_m, t_n, and flux-weighted time averages give the arrival,
  transmission and reflection times;
* route A integrates trajectory ensembles and reads the same quantities off
  their barrier-edge crossings.

``full_report`` computes both and records every cross-check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BisectionFailure, BohmwellError, NoSignChange, ZeroFlux
from .numerics import ODE_TOL, QUAD_TOL, ROOT_TOL, Bracket, Tolerance, find_root, integrate_1d
from .trajectories import Trajectory, bifurcation_s2, build_ensemble, run_trajectory
from .wavepacket import CumulativeDensity, WavePacket

log = logging.getLogger(__name__)

ZERO_FLUX = 1e-14
TIME_QUAD_TOL = Tolerance(abs_tol=1e-13, rel_tol=1e-12, max_iterations=500_000)


@dataclass(frozen=True)
class CriticalPoints:
    """Start-position boundaries and the special times of the half period.

    Times are None for a packet without current.
    """

    s1: float
    s2: float
    t_p: float | None
    t_m: float | None
    t_n: float | None
    t_half: float | None
    a: float
    b: float


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def within(cls, name: str, residual: float, tolerance: float, detail: str = "") -> "Check":
        return cls(name, float(residual), float(tolerance), bool(abs(residual) <= tolerance), detail)


@dataclass
class TimingReport:
    T2: float
    R2: float
    R2_never: float
    P_inside0: float
    P_right0: float
    P_barrier: float
    t_dwell: float | None
    t_trans: float | None
    t_refl: float | None
    mean_arrival_entry: float | None
    mean_arrival_exit: float | None
    critical: CriticalPoints
    routes: dict[str, str] = field(default_factory=dict)
    route_a: dict[str, float | None] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _cdf0(packet, cdf: CumulativeDensity | None) -> CumulativeDensity:
    return cdf if cdf is not None else CumulativeDensity(packet, 0.0)


def _prob(packet, lo: float, hi: float, t: float) -> float:
    geom = packet.geom
    tol = getattr(packet, "quad_tol", QUAD_TOL)
    return integrate_1d(lambda x: float(packet.density(x, t)), lo, hi, tol, breakpoints=(-geom.b, geom.b))


def left_probability(packet, t: float) -> float:
    """Probability in the left well, (-a, -b), at time ``t``."""
    return _prob(packet, -packet.geom.a, -packet.geom.b, t)


def right_probability(packet, t: float) -> float:
    return _prob(packet, packet.geom.b, packet.geom.a, t)


def _solve(residual: Callable[[float], float], lo: float, hi: float, tol: Tolerance, what: str) -> float:
    try:
        return find_root(residual, Bracket(lo, hi), tol)
    except NoSignChange as exc:
        raise BisectionFailure(f"{what}: condition does not change sign on [{lo!r}, {hi!r}]") from exc


def flux_integral(packet, x1: float, t0: float, t1: float, weight_power: int = 0, absolute: bool = False) -> float:
    """Integral of t**weight_power * j(x1, t) over [t0, t1] (|j| if ``absolute``)."""

    def integrand(t: float) -> float:
        j = float(packet.current(x1, t))
        if absolute:
            j = abs(j)
        return j * t**weight_power if weight_power else j

    return integrate_1d(integrand, t0, t1, TIME_QUAD_TOL)


# ---------------------------------------------------------------------------
# route B: density / flux conditions
# ---------------------------------------------------------------------------

def find_s1(packet, tol: Tolerance = ROOT_TOL, cdf: CumulativeDensity | None = None) -> float:
    """Start position below which trajectories never reach the barrier.

    The probability on (-a, s1) at t = 0 equals the probability on (b, a).
    """
    geom = packet.geom
    target = right_probability(packet, 0.0)
    if target <= 0.0:
        return -geom.a
    if getattr(packet, "is_stationary", False):
        return -geom.b
    cdf = _cdf0(packet, cdf)
    return _solve(lambda s: cdf(s) - target, -geom.a, -geom.b, tol, "s1")


def find_s2(packet, s1: float, tol: Tolerance = ROOT_TOL, cdf: CumulativeDensity | None = None) -> float:
    """Start position separating returners from travellers.

    The probability on (s1, s2) at t = 0 equals the barrier probability.
    """
    geom = packet.geom
    target = _prob(packet, -geom.b, geom.b, 0.0)
    if target <= 0.0 or getattr(packet, "is_stationary", False):
        return s1
    cdf = _cdf0(packet, cdf)
    base = cdf(s1)
    return _solve(lambda s: cdf(s) - base - target, s1, -geom.b, tol, "s2")


def transmission_coefficient(packet, s2: float) -> float:
    return _prob(packet, s2, -packet.geom.b, 0.0)


def transmission_complement(packet) -> float:
    """|T|^2 from everything else: 1 - 2 P(-b < x < a) at t = 0."""
    geom = packet.geom
    return 1.0 - 2.0 * _prob(packet, -geom.b, geom.a, 0.0)


def transmission_fluxes(packet, crit: CriticalPoints) -> tuple[float, float]:
    """|T|^2 as flux through -b on [0, t_p] and through b on [t_m, t_half]."""
    b = packet.geom.b
    return (
        flux_integral(packet, -b, 0.0, crit.t_p),
        flux_integral(packet, b, crit.t_m, crit.t_half),
    )


def reflection_coefficient(packet, s1: float, s2: float) -> float:
    return _prob(packet, s1, s2, 0.0)


def find_tp(packet, s2: float, tol: Tolerance = ROOT_TOL) -> float:
    """Time at which the left well has drained down to P(x < s2, t=0)."""
    geom = packet.geom
    t_half = packet.half_period()
    target = _prob(packet, -geom.a, s2, 0.0)
    return _solve(lambda t: left_probability(packet, t) - target, 0.0, t_half, tol, "t_p")


def find_tm(packet, tol: Tolerance = ROOT_TOL) -> float:
    """Time at which the right well holds P(x > -b, t=0)."""
    geom = packet.geom
    t_half = packet.half_period()
    target = _prob(packet, -geom.b, geom.a, 0.0)
    return _solve(lambda t: right_probability(packet, t) - target, 0.0, t_half, tol, "t_m")


def find_tn(packet, s2: float, tol: Tolerance = ROOT_TOL) -> float:
    """Time in the second half period at which the left well is refilled to
    P(x < s2, t=0), i.e. when the last returner has left the barrier."""
    geom = packet.geom
    t_half = packet.half_period()
    target = _prob(packet, -geom.a, s2, 0.0)
    return _solve(lambda t: left_probability(packet, t) - target, t_half, 2.0 * t_half, tol, "t_n")


def critical_points(packet, tol: Tolerance = ROOT_TOL, cdf: CumulativeDensity | None = None) -> CriticalPoints:
    geom = packet.geom
    cdf = _cdf0(packet, cdf)
    s1 = find_s1(packet, tol, cdf)
    s2 = find_s2(packet, s1, tol, cdf)
    if packet.is_stationary:
        return CriticalPoints(s1, s2, None, None, None, None, geom.a, geom.b)
    t_half = packet.half_period()
    return CriticalPoints(
        s1, s2, find_tp(packet, s2, tol), find_tm(packet, tol), find_tn(packet, s2, tol), t_half, geom.a, geom.b
    )


def dwell_time(packet) -> float:
    """Half period times the (time-independent) barrier probability."""
    return packet.half_period() * packet.barrier_probability(0.0)


@dataclass(frozen=True)
class ArrivalDistribution:
    """Normalized flux j(x1, t) / Z over a time window."""

    packet: object = field(repr=False)
    x1: float
    window: tuple[float, float]
    normalizer: float
    absolute: bool = False

    def __call__(self, t):
        if np.ndim(t) == 0:
            j = float(self.packet.current(self.x1, float(t)))
            return (abs(j) if self.absolute else j) / self.normalizer
        return np.array([self(float(s)) for s in np.ravel(t)]).reshape(np.shape(t))

    def mean(self) -> float:
        lo, hi = self.window
        return flux_integral(self.packet, self.x1, lo, hi, 1, self.absolute) / self.normalizer

    def cdf(self, t: float) -> float:
        lo, _ = self.window
        return flux_integral(self.packet, self.x1, lo, t, 0, self.absolute) / self.normalizer


def arrival_distribution(packet, x1: float, window: Sequence[float], absolute: bool = False) -> ArrivalDistribution:
    """Arrival-time density at ``x1`` from the single-crossing flux identity.

    Raises:
        ZeroFlux: the flux through ``x1`` over the window is negligible.
    """
    lo, hi = float(window[0]), float(window[1])
    z = flux_integral(packet, x1, lo, hi, 0, absolute)
    if abs(z) < ZERO_FLUX:
        raise ZeroFlux(f"flux through x={x1!r} over [{lo!r}, {hi!r}] is {z!r}")
    return ArrivalDistribution(packet, float(x1), (lo, hi), z, absolute)


def mean_arrival(packet, x1: float, window: Sequence[float], absolute: bool = False) -> float:
    return arrival_distribution(packet, x1, window, absolute).mean()


def transmission_time(packet, crit: CriticalPoints | None = None) -> float:
    """Mean arrival at b over [t_m, t_half] minus mean arrival at -b over [0, t_p]."""
    crit = crit or critical_points(packet)
    b = packet.geom.b
    return mean_arrival(packet, b, (crit.t_m, crit.t_half)) - mean_arrival(packet, -b, (0.0, crit.t_p))


def reflection_time(packet, crit: CriticalPoints | None = None) -> float:
    """Mean outgoing |flux| time at -b over [t_half, t_n] minus mean incoming
    flux time at -b over [t_p, t_half]."""
    crit = crit or critical_points(packet)
    b = packet.geom.b
    back = mean_arrival(packet, -b, (crit.t_half, crit.t_n), absolute=True)
    return back - mean_arrival(packet, -b, (crit.t_p, crit.t_half))


# ---------------------------------------------------------------------------
# route A: trajectory ensembles
# ---------------------------------------------------------------------------

@dataclass
class Ensembles:
    travellers: list[Trajectory]
    returners: list[Trajectory]
    insiders: list[Trajectory]


def band_ensembles(
    packet: WavePacket,
    crit: CriticalPoints,
    n: int,
    tol: Tolerance = ODE_TOL,
    cdf: CumulativeDensity | None = None,
    workers: int = 1,
) -> Ensembles:
    """Equal-probability ensembles inside the traveller, returner and
    inside-at-start bands, each integrated as far as its members' fates need."""
    cdf = _cdf0(packet, cdf)
    b = packet.geom.b
    t_back = min(2.0 * crit.t_half, crit.t_n + 1e-3 * crit.t_half)
    return Ensembles(
        travellers=build_ensemble(packet, n, crit.t_half, tol, interval=(crit.s2, -b), cdf=cdf, workers=workers),
        returners=build_ensemble(packet, n, t_back, tol, interval=(crit.s1, crit.s2), cdf=cdf, workers=workers),
        insiders=build_ensemble(packet, n, crit.t_half, tol, interval=(-b, b), cdf=cdf, workers=workers),
    )


def _weighted_mean(values: Sequence[float], weights: Sequence[float]) -> float:
    w = math.fsum(weights)
    return math.fsum(v * wi for v, wi in zip(values, weights)) / w


def ensemble_crossing_mean(ensemble: Sequence[Trajectory], edge: float, direction: int, which: int = 0) -> float:
    """Weighted mean of the ``which``-th crossing of ``edge`` in ``direction``."""
    times, weights = [], []
    for tr in ensemble:
        hits = tr.crossing_times(edge, direction)
        if len(hits) <= which:
            raise BohmwellError(f"trajectory from x0={tr.x0!r} has no crossing #{which} of {edge!r}")
        times.append(hits[which])
        weights.append(tr.weight)
    return _weighted_mean(times, weights)


def ensemble_transmission_time(travellers: Sequence[Trajectory], b: float) -> float:
    return ensemble_crossing_mean(travellers, b, +1) - ensemble_crossing_mean(travellers, -b, +1)


def ensemble_reflection_time(returners: Sequence[Trajectory], b: float) -> float:
    return ensemble_crossing_mean(returners, -b, -1) - ensemble_crossing_mean(returners, -b, +1)


def ensemble_residence(ensemble: Sequence[Trajectory], b: float, t0: float, t1: float) -> float:
    """Weighted sum of the time each member spends in (-b, b) during [t0, t1]."""
    return math.fsum(tr.weight * tr.residence_time(-b, b, t0, t1) for tr in ensemble)


def stratified_dwell_time(ens: Ensembles, b: float, t_half: float) -> float:
    """Barrier residence over [0, t_half] summed over the band ensembles.

    Left stayers and right-side starts never occupy the barrier in the first
    half period and contribute nothing.
    """
    return math.fsum(
        ensemble_residence(group, b, 0.0, t_half) for group in (ens.travellers, ens.returners, ens.insiders)
    )


def uniform_ensemble_dwell_time(
    packet: WavePacket, n_tot: int, tol: Tolerance = ODE_TOL, cdf: CumulativeDensity | None = None, workers: int = 1
) -> float:
    """Barrier residence over [0, t_half] averaged over an n_tot-member
    equal-weight quantile ensemble of the whole initial density."""
    t_half = packet.half_period()
    members = build_ensemble(packet, n_tot, t_half, tol, cdf=_cdf0(packet, cdf), workers=workers)
    return ensemble_residence(members, packet.geom.b, 0.0, t_half)


def trajectory_edge_time(packet: WavePacket, x0: float, edge: float, t_end: float, tol: Tolerance = ODE_TOL) -> float:
    """First rightward passage time of the trajectory from ``x0`` through ``edge``.

    A start exactly on the edge is nudged by one part in 1e12 of the box so
    that the passage is detected as a crossing.
    """
    if x0 == edge:
        x0 = edge - 1e-12 * packet.geom.a
    traj = run_trajectory(packet, x0, t_end, tol)
    t = traj.first_crossing(edge, +1)
    if t is None:
        raise BohmwellError(f"trajectory from {x0!r} did not reach {edge!r} by t={t_end!r}")
    return t


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

PROB_TOL = 1e-8
T2_TOL = 1e-6
IDENTITY_TOL = 1e-6  # relative to t_half
ROUTE_TOL = 1e-3  # relative
S2_TOL = 1e-5  # relative to 2a
EDGE_TIME_TOL = 1e-4  # relative to t_half
SIGN_SLACK = 1e-12


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def full_report(
    packet: WavePacket,
    trajectories: bool = True,
    n_route_a: int = 512,
    root_tol: Tolerance = ROOT_TOL,
    ode_tol: Tolerance = ODE_TOL,
    workers: int = 1,
) -> TimingReport:
    """All coefficients and times by the density route, and (optionally) by
    trajectory ensembles, together with the pass/fail cross-checks."""
    geom = packet.geom
    a, b = geom.a, geom.b
    cdf = CumulativeDensity(packet, 0.0)
    crit = critical_points(packet, root_tol, cdf)

    P_right0 = right_probability(packet, 0.0)
    P_barrier = _prob(packet, -b, b, 0.0)
    T2 = transmission_coefficient(packet, crit.s2)
    R2 = reflection_coefficient(packet, crit.s1, crit.s2)
    R2_never = _prob(packet, -a, crit.s1, 0.0)
    routes = {k: "B" for k in ("T2", "R2", "R2_never", "P_inside0", "P_right0", "s1", "s2", "t_p", "t_m", "t_n")}
    checks: list[Check] = []

    total = T2 + R2 + R2_never + P_barrier + P_right0
    checks.append(Check.within("probability_partition", total - 1.0, PROB_TOL))
    probs = (T2, R2, R2_never, P_barrier, P_right0)
    checks.append(
        Check("probabilities_in_unit_interval", 0.0, 0.0, all(-PROB_TOL <= p <= 1 + PROB_TOL for p in probs))
    )

    if packet.is_stationary:
        xs = np.linspace(-a, a, 257)
        ts = np.linspace(0.0, math.pi / max(packet.splitting, 1e-300), 17)
        j_max = max(float(np.max(np.abs(packet.current(xs, t)))) for t in ts)
        checks.append(Check.within("stationary_zero_flux", j_max, SIGN_SLACK))
        checks.append(Check.within("stationary_zero_transmission", T2, SIGN_SLACK))
        return TimingReport(
            T2, R2, R2_never, P_barrier, P_right0, P_barrier, None, None, None, None, None, crit, routes, {}, checks
        )

    th = crit.t_half
    t_dwell = dwell_time(packet)
    entry = mean_arrival(packet, -b, (0.0, crit.t_p))
    exit_ = mean_arrival(packet, b, (crit.t_m, th))
    t_trans = exit_ - entry
    t_refl = reflection_time(packet, crit)
    routes.update(t_dwell="B", t_trans="B", t_refl="B", mean_arrival_entry="B", mean_arrival_exit="B")

    checks.append(Check("critical_ordering", 0.0, 0.0, -a < crit.s1 < crit.s2 < -b, f"s1={crit.s1!r}, s2={crit.s2!r}"))
    T2_routes = {
        "s2_integral": T2,
        "complement": transmission_complement(packet),
    }
    T2_routes["flux_entry"], T2_routes["flux_exit"] = transmission_fluxes(packet, crit)
    spread = max(T2_routes.values()) - min(T2_routes.values())
    checks.append(Check.within("transmission_three_way", spread, T2_TOL, repr(T2_routes)))
    checks.append(Check.within("reflection_equals_barrier_probability", R2 - P_barrier, PROB_TOL))
    pb_times = [packet.barrier_probability(t) for t in (0.0, th / 3.0, th)]
    checks.append(Check.within("barrier_probability_constant", max(pb_times) - min(pb_times), PROB_TOL))
    checks.append(Check.within("t_m_identity", (crit.t_m - (th - crit.t_p)) / th, IDENTITY_TOL))
    checks.append(Check.within("t_n_identity", (crit.t_n - (th + crit.t_m)) / th, IDENTITY_TOL))

    fwd = np.linspace(0.0, th, 1000)
    back = np.linspace(th, crit.t_n, 1000)
    j_fwd = min(float(packet.current(-b, float(t))) for t in fwd)
    j_back = max(float(packet.current(-b, float(t))) for t in back)
    checks.append(Check("entry_flux_nonnegative", j_fwd, SIGN_SLACK, j_fwd >= -SIGN_SLACK))
    checks.append(Check("return_flux_nonpositive", j_back, SIGN_SLACK, j_back <= SIGN_SLACK))
    checks.append(Check("times_positive", 0.0, 0.0, 0.0 < t_trans < th and t_refl > 0.0))
    checks.append(
        Check.within("dwell_decomposition", _rel(T2 * t_trans + R2 * t_refl, t_dwell), ROUTE_TOL)
    )

    route_a: dict[str, float | None] = {}
    if trajectories:
        ens = band_ensembles(packet, crit, n_route_a, ode_tol, cdf, workers)
        route_a["s2"] = bifurcation_s2(packet, ode_tol)
        route_a["t_p"] = trajectory_edge_time(packet, crit.s2, -b, th, ode_tol)
        route_a["t_m"] = trajectory_edge_time(packet, -b, b, th, ode_tol)
        route_a["t_trans"] = ensemble_transmission_time(ens.travellers, b)
        route_a["t_refl"] = ensemble_reflection_time(ens.returners, b)
        route_a["mean_arrival_entry"] = ensemble_crossing_mean(ens.travellers, -b, +1)
        route_a["mean_arrival_exit"] = ensemble_crossing_mean(ens.travellers, b, +1)
        route_a["t_dwell"] = stratified_dwell_time(ens, b, th)

        checks.append(Check.within("route_s2", (route_a["s2"] - crit.s2) / (2 * a), S2_TOL))
        checks.append(Check.within("route_t_p", (route_a["t_p"] - crit.t_p) / th, EDGE_TIME_TOL))
        checks.append(Check.within("route_t_m", (route_a["t_m"] - crit.t_m) / th, EDGE_TIME_TOL))
        checks.append(Check.within("route_t_trans", _rel(route_a["t_trans"], t_trans), ROUTE_TOL))
        checks.append(Check.within("route_t_refl", _rel(route_a["t_refl"], t_refl), ROUTE_TOL))
        checks.append(Check.within("route_mean_arrival_entry", (route_a["mean_arrival_entry"] - entry) / th, ROUTE_TOL))
        checks.append(Check.within("route_mean_arrival_exit", (route_a["mean_arrival_exit"] - exit_) / th, ROUTE_TOL))
        checks.append(Check.within("route_t_dwell", _rel(route_a["t_dwell"], t_dwell), ROUTE_TOL))

    return TimingReport(
        T2, R2, R2_never, P_barrier, P_right0, P_barrier,
        t_dwell, t_trans, t_refl, entry, exit_, crit, routes, route_a, checks,
    )
