"""Command-line front end.

    bohmwell spectrum|trajectories|density|report [--config cfg.json] [--out dir] [--format csv|json]

Exit codes: 0 success, 1 config error, 2 spectrum failure, 3 integration
failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from .config import ConfigError, RunConfig
from .errors import (
    BohmwellError,
    ClassMismatch,
    DegenerateModes,
    DensityFloor,
    DomainError,
    NoBoundMode,
    NumericsError,
    QuantileFailure,
)
from .serialize import SCHEMA_VERSION, to_csv, to_json
from .timing import TimingReport, critical_points, full_report
from .trajectories import quantile_starts, run_trajectory
from .wavepacket import CumulativeDensity, WavePacket

log = logging.getLogger("bohmwell")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SPECTRUM = 2
EXIT_INTEGRATION = 3
EXIT_INVARIANT = 4

TRAJECTORY_HEADER = ["trajectory_id", "x0", "class", "weight", "t", "x"]
DENSITY_HEADER = ["t", "x", "rho", "j", "v_or_blank"]


class CommandFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# shared steps
# ---------------------------------------------------------------------------

def build_packet(cfg: RunConfig) -> WavePacket:
    try:
        return WavePacket.build(
            cfg.geometry,
            cfg.n_even,
            cfg.n_odd,
            cfg.c_even,
            cfg.c_odd,
            cfg.density_floor,
            cfg.root_tol,
            cfg.quad_tol,
        )
    except NoBoundMode as exc:
        raise CommandFailure(EXIT_SPECTRUM, f"spectrum failure: {exc}") from exc
    except NumericsError as exc:
        raise CommandFailure(EXIT_SPECTRUM, f"spectrum failure: {exc}") from exc


def half_period(packet: WavePacket) -> float:
    try:
        return packet.half_period()
    except DegenerateModes as exc:
        raise CommandFailure(EXIT_SPECTRUM, f"spectrum failure: {exc}") from exc


def spectrum_summary(packet: WavePacket) -> dict:
    return {
        "E_e": packet.even_mode.energy,
        "E_o": packet.odd_mode.energy,
        "splitting": packet.splitting,
        "t_half": half_period(packet),
    }


def _header(cfg: RunConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": cfg.echo()}


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out_dir: str, fmt: str = "json") -> int:
    packet = build_packet(cfg)
    spec = spectrum_summary(packet)
    for key, value in spec.items():
        print(f"{key:10s} {value:.17g}")
    if fmt == "csv":
        path = _write(out_dir, "spectrum.csv", to_csv(list(spec), [list(spec.values())], _header(cfg)))
    else:
        path = _write(out_dir, "spectrum.json", to_json({**_header(cfg), "spectrum": spec}) + "\n")
    log.info("wrote %s", path)
    return EXIT_OK


def trajectory_table(cfg: RunConfig, packet: WavePacket) -> list[dict]:
    """Quantile ensemble over the full period, classified and resampled on
    ``nt`` uniform times."""
    t_half = half_period(packet)
    t_end = 2.0 * t_half
    try:
        crit = critical_points(packet, cfg.root_tol)
        cdf = CumulativeDensity(packet, 0.0, tol=cfg.quad_tol)
        starts, weight = quantile_starts(cdf, cfg.n_trajectories)
    except (QuantileFailure, NumericsError) as exc:
        raise CommandFailure(EXIT_INTEGRATION, f"could not place trajectory starts: {exc}") from exc
    except BohmwellError as exc:
        raise CommandFailure(EXIT_INVARIANT, f"critical points: {exc}") from exc

    times = np.linspace(0.0, t_end, cfg.nt)
    table = []
    for tid, x0 in enumerate(starts):
        try:
            traj = run_trajectory(packet, x0, t_end, cfg.ode_tol, crit, weight)
        except (NumericsError, DomainError) as exc:
            raise CommandFailure(EXIT_INTEGRATION, f"trajectory {tid} (x0={x0!r}) failed: {exc}") from exc
        except ClassMismatch as exc:
            raise CommandFailure(EXIT_INVARIANT, f"trajectory {tid}: {exc}") from exc
        xs = traj.position(times)
        table.append(
            {"id": tid, "x0": x0, "class": traj.klass.value, "weight": weight, "t": times.tolist(), "x": xs.tolist()}
        )
    return table


def cmd_trajectories(cfg: RunConfig, out_dir: str, fmt: str = "csv") -> int:
    packet = build_packet(cfg)
    table = trajectory_table(cfg, packet)
    if fmt == "json":
        doc = {**_header(cfg), "spectrum": spectrum_summary(packet), "trajectories": table}
        path = _write(out_dir, "trajectories.json", to_json(doc) + "\n")
    else:
        rows = (
            (tr["id"], tr["x0"], tr["class"], tr["weight"], t, x)
            for tr in table
            for t, x in zip(tr["t"], tr["x"])
        )
        path = _write(out_dir, "trajectories.csv", to_csv(TRAJECTORY_HEADER, rows, _header(cfg)))
    counts: dict[str, int] = {}
    for tr in table:
        counts[tr["class"]] = counts.get(tr["class"], 0) + 1
    print(f"{len(table)} trajectories to t = {2 * half_period(packet):.17g}: "
          + ", ".join(f"{k} {v}" for k, v in counts.items()))
    log.info("wrote %s", path)
    return EXIT_OK


def density_times(cfg: RunConfig, t_half: float) -> list[float]:
    return [0.0, t_half, *cfg.density_times]


def density_rows(cfg: RunConfig, packet: WavePacket) -> list[tuple]:
    t_half = half_period(packet)
    a = cfg.geometry.a
    xs = np.linspace(-a, a, cfg.nx)
    rows = []
    for t in density_times(cfg, t_half):
        rho, j = packet.density_and_current(xs, t)
        for x, r, c in zip(xs.tolist(), rho.tolist(), j.tolist()):
            v = c / r if r >= packet.density_floor else None
            rows.append((t, x, r, c, v))
    return rows


def cmd_density(cfg: RunConfig, out_dir: str, fmt: str = "csv") -> int:
    packet = build_packet(cfg)
    rows = density_rows(cfg, packet)
    if fmt == "json":
        doc = {
            **_header(cfg),
            "spectrum": spectrum_summary(packet),
            "columns": DENSITY_HEADER,
            "rows": [list(r) for r in rows],
        }
        path = _write(out_dir, "density.json", to_json(doc) + "\n")
    else:
        path = _write(out_dir, "density.csv", to_csv(DENSITY_HEADER, rows, _header(cfg)))
    print(f"{len(rows)} field samples ({cfg.nx} points x {len(rows) // cfg.nx} times)")
    log.info("wrote %s", path)
    return EXIT_OK


def report_document(cfg: RunConfig, packet: WavePacket, report: TimingReport) -> dict:
    crit = report.critical

    def tagged(name: str, value) -> dict:
        return {"value": value, "route": report.routes.get(name, "B")}

    timing = {
        "T2": tagged("T2", report.T2),
        "R2": tagged("R2", report.R2),
        "R2_never": tagged("R2_never", report.R2_never),
        "P_inside0": tagged("P_inside0", report.P_inside0),
        "P_right0": tagged("P_right0", report.P_right0),
        "P_barrier": tagged("P_barrier", report.P_barrier),
        "t_dwell": tagged("t_dwell", report.t_dwell),
        "t_trans": tagged("t_trans", report.t_trans),
        "t_refl": tagged("t_refl", report.t_refl),
        "mean_arrival_entry": tagged("mean_arrival_entry", report.mean_arrival_entry),
        "mean_arrival_exit": tagged("mean_arrival_exit", report.mean_arrival_exit),
    }
    return {
        **_header(cfg),
        "spectrum": spectrum_summary(packet),
        "critical_points": {
            "s1": crit.s1,
            "s2": crit.s2,
            "t_p": crit.t_p,
            "t_m": crit.t_m,
            "t_n": crit.t_n,
            "t_half": crit.t_half,
        },
        "timing": timing,
        "route_a": {k: {"value": v, "route": "A"} for k, v in report.route_a.items()},
        "checks": [
            {
                "name": c.name,
                "residual": c.residual,
                "tolerance": c.tolerance,
                "passed": c.passed,
                "detail": c.detail,
            }
            for c in report.checks
        ],
        "ok": report.ok,
    }


def _fmt(value) -> str:
    return "null" if value is None else f"{value:.10g}"


def cmd_report(cfg: RunConfig, out_dir: str, fmt: str = "json", workers: int = 1) -> int:
    packet = build_packet(cfg)
    half_period(packet)
    n_a = cfg.route_a_trajectories
    try:
        report = full_report(
            packet,
            trajectories=n_a > 0 and not packet.is_stationary,
            n_route_a=max(n_a, 1),
            root_tol=cfg.root_tol,
            ode_tol=cfg.ode_tol,
            workers=workers,
        )
    except (NumericsError, DensityFloor, QuantileFailure) as exc:
        raise CommandFailure(EXIT_INTEGRATION, f"integration failure: {exc}") from exc
    except BohmwellError as exc:
        raise CommandFailure(EXIT_INVARIANT, f"invariant failure: {exc}") from exc

    doc = report_document(cfg, packet, report)
    path = _write(out_dir, "report.json", to_json(doc) + "\n")
    log.info("wrote %s", path)

    for section in ("spectrum", "critical_points"):
        print(section)
        for key, value in doc[section].items():
            print(f"  {key:20s} {_fmt(value)}")
    print("timing")
    for key, entry in doc["timing"].items():
        a_value = report.route_a.get(key)
        extra = f"   route A {_fmt(a_value)}" if a_value is not None else ""
        print(f"  {key:20s} {_fmt(entry['value'])} [{entry['route']}]{extra}")
    print("checks")
    for c in report.checks:
        print(f"  {'pass' if c.passed else 'FAIL'}  {c.name:40s} residual {c.residual:.3e}  tol {c.tolerance:.1e}")
    if not report.ok:
        failed = [c.name for c in report.checks if not c.passed]
        print(f"invariant checks failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


COMMANDS = {
    "spectrum": (cmd_spectrum, ("json", "csv"), "json"),
    "trajectories": (cmd_trajectories, ("csv", "json"), "csv"),
    "density": (cmd_density, ("csv", "json"), "csv"),
    "report": (cmd_report, ("json",), "json"),
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _complex_arg(text: str):
    """``re`` or ``re,im``."""
    parts = text.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}") from exc
    if len(values) == 1:
        return values[0]
    if len(values) == 2:
        return values
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


FLAG_TYPES = {
    "a": float, "b": float, "V": float,
    "n_even": int, "n_odd": int,
    "c_even": _complex_arg, "c_odd": _complex_arg,
    "n_trajectories": int, "route_a_trajectories": int,
    "root_tol": float, "quad_tol": float, "ode_tol": float, "density_floor": float,
    "nx": int, "nt": int,
    "density_times": _float_list,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bohmwell", description="Bohmian tunnelling times in a symmetric double well.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, formats, default) in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults are used for missing keys)")
        p.add_argument("--out", default=".", help="output directory (default: current directory)")
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--workers", type=int, default=1, help="processes for ensemble integration")
        p.add_argument("-v", "--verbose", action="store_true")
        overrides = p.add_argument_group("config overrides")
        for flag in cfgmod.FLAG_KEYS:
            overrides.add_argument(f"--{flag}", type=FLAG_TYPES[flag], default=None,
                                   help=f"overrides {'.'.join(cfgmod.FLAG_KEYS[flag])}")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {flag: getattr(args, flag) for flag in cfgmod.FLAG_KEYS}
    try:
        cfg = cfgmod.load(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    func, _, _ = COMMANDS[args.command]
    kwargs = {"workers": args.workers} if args.command == "report" else {}
    try:
        return func(cfg, args.out, args.format, **kwargs)
    except CommandFailure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
