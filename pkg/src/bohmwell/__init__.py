"""Bohmian trajectories and tunnelling times for a two-mode packet in a
symmetric double well with infinite outer walls (atomic units)."""

from .errors import (
    BisectionFailure,
    BohmwellError,
    ClassMismatch,
    DegenerateModes,
    DensityFloor,
    DomainError,
    NoBoundMode,
    NumericsError,
    QuantileFailure,
    ZeroFlux,
)
from .numerics import Bracket, OdePath, Tolerance, find_root, integrate_1d, integrate_ode
from .spectrum import EigenMode, Parity, WellGeometry, even_residual, odd_residual, solve_mode
from .timing import CriticalPoints, TimingReport, full_report
from .trajectories import Trajectory, TrajectoryClass, build_ensemble, run_trajectory
from .wavepacket import CumulativeDensity, WavePacket

__version__ = "0.1.0"
