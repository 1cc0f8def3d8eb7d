"""Bohmian trajectories of a two-mode packet: integration, ensembles, fate
classification and the trajectory-side bifurcation point s2.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import BisectionFailure, ClassMismatch, DensityFloor, DomainError
from .numerics import ODE_TOL, OdePath, Tolerance, crossings, integrate_ode
from .wavepacket import CumulativeDensity, WavePacket

if TYPE_CHECKING:
    from .timing import CriticalPoints

log = logging.getLogger(__name__)

# relative tolerances (in units of the box length 2a / of t_half)
CLASS_X_TOL = 1e-5
CLASS_T_TOL = 1e-6


class TrajectoryClass(enum.Enum):
    LEFT_STAYER = "LeftStayer"
    RETURNER = "Returner"
    TRAVELLER = "Traveller"
    INSIDE_AT_START = "InsideAtStart"
    RIGHT_SIDE = "RightSide"


@dataclass(frozen=True)
class Crossing:
    edge: float
    t: float
    direction: int  # +1 moving right, -1 moving left


@dataclass(frozen=True)
class Trajectory:
    x0: float
    weight: float
    path: OdePath = field(repr=False)
    crossings: tuple[Crossing, ...] = ()
    klass: TrajectoryClass | None = None

    @property
    def samples(self) -> list[tuple[float, float]]:
        return self.path.samples

    @property
    def t_end(self) -> float:
        return self.path.t_end

    def position(self, t):
        return self.path(t)

    def crossing_times(self, edge: float, direction: int | None = None) -> list[float]:
        return [c.t for c in self.crossings if c.edge == edge and (direction is None or c.direction == direction)]

    def first_crossing(self, edge: float, direction: int | None = None) -> float | None:
        times = self.crossing_times(edge, direction)
        return times[0] if times else None

    def residence_time(self, lo: float, hi: float, t0: float, t1: float) -> float:
        """Time spent strictly between ``lo`` and ``hi`` during ``[t0, t1]``."""
        events = sorted(c.t for c in self.crossings if c.edge in (lo, hi) and t0 < c.t < t1)
        marks = [t0, *events, t1]
        total = 0.0
        for s, e in zip(marks[:-1], marks[1:]):
            mid = float(self.path(0.5 * (s + e)))
            if lo < mid < hi:
                total += e - s
        return total


def region_of(x0: float, critical: "CriticalPoints") -> TrajectoryClass:
    """Fate implied by the start position; regions are closed on the left."""
    if x0 < critical.s1:
        return TrajectoryClass.LEFT_STAYER
    if x0 < critical.s2:
        return TrajectoryClass.RETURNER
    if x0 < -critical.b:
        return TrajectoryClass.TRAVELLER
    if x0 < critical.b:
        return TrajectoryClass.INSIDE_AT_START
    return TrajectoryClass.RIGHT_SIDE


def _near_boundary(x0: float, critical: "CriticalPoints") -> bool:
    slack = CLASS_X_TOL * 2 * critical.a
    return any(abs(x0 - edge) <= slack for edge in (critical.s1, critical.s2, -critical.b, critical.b))


def _crossing_evidence(traj: Trajectory, critical: "CriticalPoints", region: TrajectoryClass) -> str | None:
    """Return a description of the first disagreement, or None."""
    b = critical.b
    flowing = critical.t_half is not None and critical.t_p is not None
    slack = CLASS_T_TOL * critical.t_half if critical.t_half else 0.0
    enter = traj.crossing_times(-b, +1)
    leave_left = traj.crossing_times(-b, -1)
    exit_right = traj.crossing_times(b, +1)

    if not flowing:
        return "trajectory of a stationary packet crossed a barrier edge" if traj.crossings else None

    th = critical.t_half
    first_half_exit = [t for t in exit_right if t <= th + slack]
    if region is TrajectoryClass.LEFT_STAYER:
        if enter:
            return f"left stayer entered the barrier at t={enter[0]!r}"
    elif region is TrajectoryClass.RETURNER:
        if not enter or enter[0] < critical.t_p - slack or enter[0] > th + slack:
            return f"returner entry times {enter!r} not in [t_p, t_half]"
        if first_half_exit:
            return f"returner reached b at t={first_half_exit[0]!r}"
        if traj.t_end >= critical.t_n and (not leave_left or leave_left[0] < th - slack):
            return f"returner exit times {leave_left!r} not after t_half"
    elif region is TrajectoryClass.TRAVELLER:
        if not enter or not first_half_exit or not enter[0] < first_half_exit[0]:
            return f"traveller did not cross -b then b before t_half (entries {enter!r}, exits {exit_right!r})"
    elif region is TrajectoryClass.INSIDE_AT_START:
        if not first_half_exit or first_half_exit[0] > critical.t_m + slack:
            return f"inside start did not leave through b by t_m (exits {exit_right!r})"
        if [t for t in leave_left if t < th - slack]:
            return "inside start left through -b during the first half period"
    elif region is TrajectoryClass.RIGHT_SIDE:
        left_moves = [c for c in traj.crossings if c.edge == b and c.t < th - slack]
        if left_moves:
            return f"right-side start crossed b at t={left_moves[0].t!r}"
    return None


def classify(trajectory: Trajectory, critical: "CriticalPoints") -> TrajectoryClass:
    """Region-based fate, cross-checked against the realized crossings.

    Starts within ``1e-5 * 2a`` of a region boundary are not cross-checked.

    Raises:
        ClassMismatch: the crossings contradict the region of ``x0``.
    """
    region = region_of(trajectory.x0, critical)
    if _near_boundary(trajectory.x0, critical):
        return region
    problem = _crossing_evidence(trajectory, critical, region)
    if problem:
        raise ClassMismatch(f"x0={trajectory.x0!r} ({region.value}): {problem}")
    return region


def run_trajectory(
    packet: WavePacket,
    x0: float,
    t_end: float,
    tol: Tolerance = ODE_TOL,
    critical: "CriticalPoints | None" = None,
    weight: float = 0.0,
    max_step: float | None = None,
) -> Trajectory:
    """Integrate the guidance equation from ``(0, x0)`` to ``t_end``.

    Barrier-edge crossings are located on the dense output. The fate is
    assigned when ``critical`` is given and the path reaches ``t_n`` (or the
    packet is stationary).
    """
    geom = packet.geom
    x0 = float(x0)
    if not abs(x0) < geom.a:
        raise DomainError(f"start x0={x0!r} not strictly inside the box")
    rho0 = float(packet.density(x0, 0.0))
    if not rho0 >= packet.density_floor:
        raise DensityFloor(x0, 0.0, rho0, packet.density_floor)

    path = integrate_ode(packet.velocity, x0, 0.0, t_end, tol, max_step=max_step)
    events = []
    for edge in (-geom.b, geom.b):
        events.extend(Crossing(edge, t, d) for t, d in crossings(path, edge))
    events.sort(key=lambda c: c.t)
    traj = Trajectory(x0, weight, path, tuple(events))

    if critical is not None and (critical.t_n is None or t_end >= critical.t_n * (1 - 1e-12)):
        traj = Trajectory(x0, weight, path, tuple(events), classify(traj, critical))
    return traj


def quantile_starts(
    cdf: CumulativeDensity,
    n: int,
    interval: tuple[float, float] | None = None,
) -> tuple[list[float], float]:
    """Starts with F(x_i) = F(lo) + (i - 1/2) / n * (F(hi) - F(lo)).

    Returns the starts and the probability carried by each of them.
    """
    if interval is None:
        p_lo, p_hi = 0.0, cdf.total
    else:
        p_lo, p_hi = cdf(interval[0]), cdf(interval[1])
    band = p_hi - p_lo
    starts = [cdf.quantile(p_lo + (i - 0.5) / n * band) for i in range(1, n + 1)]
    return starts, band / n


def _run_one(args):
    packet, x0, t_end, tol, critical, weight, max_step = args
    return run_trajectory(packet, x0, t_end, tol, critical, weight, max_step)


def run_many(
    packet: WavePacket,
    starts: Sequence[float],
    t_end: float,
    tol: Tolerance = ODE_TOL,
    critical: "CriticalPoints | None" = None,
    weight: float = 0.0,
    max_step: float | None = None,
    workers: int = 1,
) -> list[Trajectory]:
    jobs = [(packet, x0, t_end, tol, critical, weight, max_step) for x0 in starts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_run_one(job) for job in jobs]


def build_ensemble(
    packet: WavePacket,
    n_tot: int,
    t_end: float,
    tol: Tolerance = ODE_TOL,
    critical: "CriticalPoints | None" = None,
    interval: tuple[float, float] | None = None,
    cdf: CumulativeDensity | None = None,
    workers: int = 1,
    max_step: float | None = None,
) -> list[Trajectory]:
    """Trajectories started at equal-probability quantiles of rho(., 0).

    With ``interval`` the quantiles are taken inside that band only and each
    member carries ``P(band) / n_tot``; otherwise each carries ``1 / n_tot``.

    Raises:
        QuantileFailure: the cumulative density could not be inverted.
    """
    if int(n_tot) < 1:
        raise ValueError(f"ensemble size must be positive, got {n_tot!r}")
    cdf = cdf or CumulativeDensity(packet, 0.0)
    starts, weight = quantile_starts(cdf, int(n_tot), interval)
    return run_many(packet, starts, t_end, tol, critical, weight, max_step, workers)


def bifurcation_s2(
    packet: WavePacket,
    tol: Tolerance = ODE_TOL,
    x_tol: float = 1e-6,
    scan_points: int = 9,
    max_step: float | None = None,
) -> float:
    """Start position separating starts that reach b by t_half from those that do not.

    Uses trajectories only: a coarse scan over (-a, -b) checks that the
    predicate "x(t_half) >= b" switches exactly once, then bisection narrows
    the switching cell to ``x_tol * 2a``.

    Raises:
        BisectionFailure: the predicate is not monotone over the scan.
    """
    geom = packet.geom
    t_half = packet.half_period()

    def crossed(x0: float) -> bool:
        traj = run_trajectory(packet, x0, t_half, tol, max_step=max_step)
        return float(traj.path.x[-1]) >= geom.b

    grid = np.linspace(-geom.a, -geom.b, scan_points + 2)[1:-1].tolist() + [-geom.b]
    flags = [crossed(x) for x in grid[:-1]] + [True]
    switches = [i for i in range(len(flags) - 1) if flags[i] != flags[i + 1]]
    if len(switches) != 1 or flags[0]:
        raise BisectionFailure(f"transmission predicate not monotone over starts {grid!r}: {flags!r}")
    i = switches[0]
    lo, hi = grid[i], grid[i + 1]
    while hi - lo > x_tol * 2 * geom.a:
        mid = 0.5 * (lo + hi)
        if crossed(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def min_ordered_gap(ensemble: Sequence[Trajectory], times: Sequence[float]) -> float:
    """Smallest gap x_{k+1}(t) - x_k(t) between neighbours ordered by start,
    over all ``times``. A negative value means two members swapped order."""
    members = sorted(ensemble, key=lambda tr: tr.x0)
    grid = np.array([[float(tr.position(t)) for t in times] for tr in members])
    return float(np.min(np.diff(grid, axis=0))) if len(members) > 1 else np.inf
