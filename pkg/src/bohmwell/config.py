"""Run configuration: JSON ingestion, validation and command-line overrides.

A config document looks like::

    {
      "geometry": {"a": 1.0, "b": 0.2, "V": 60.0},
      "n_even": 1, "n_odd": 1,
      "coefficients": {"even": 0.7071067811865476, "odd": [0.7071067811865476, 0.0]},
      "n_trajectories": 64,
      "route_a_trajectories": 512,
      "tolerances": {"root": 1e-14, "quad": 1e-13, "ode": 1e-11, "density_floor": 1e-12},
      "grid": {"nx": 201, "nt": 201},
      "density_times": []
    }

Every key is optional. Coefficients are either real numbers or ``[re, im]``
pairs. Tolerance values set the absolute tolerance of the corresponding
solver; relative tolerances stay at the library defaults.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
from dataclasses import dataclass

from .numerics import ODE_TOL, QUAD_TOL, ROOT_TOL, Tolerance
from .spectrum import WellGeometry
from .wavepacket import DENSITY_FLOOR, INV_SQRT2


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; the message names the key."""


DEFAULTS: dict = {
    "geometry": {"a": 1.0, "b": 0.2, "V": 60.0},
    "n_even": 1,
    "n_odd": 1,
    "coefficients": {"even": INV_SQRT2, "odd": INV_SQRT2},
    "n_trajectories": 64,
    "route_a_trajectories": 512,
    "tolerances": {
        "root": ROOT_TOL.abs_tol,
        "quad": QUAD_TOL.abs_tol,
        "ode": ODE_TOL.abs_tol,
        "density_floor": DENSITY_FLOOR,
    },
    "grid": {"nx": 201, "nt": 201},
    "density_times": [],
}

# command-line flag -> path into the config document
FLAG_KEYS: dict[str, tuple[str, ...]] = {
    "a": ("geometry", "a"),
    "b": ("geometry", "b"),
    "V": ("geometry", "V"),
    "n_even": ("n_even",),
    "n_odd": ("n_odd",),
    "c_even": ("coefficients", "even"),
    "c_odd": ("coefficients", "odd"),
    "n_trajectories": ("n_trajectories",),
    "route_a_trajectories": ("route_a_trajectories",),
    "root_tol": ("tolerances", "root"),
    "quad_tol": ("tolerances", "quad"),
    "ode_tol": ("tolerances", "ode"),
    "density_floor": ("tolerances", "density_floor"),
    "nx": ("grid", "nx"),
    "nt": ("grid", "nt"),
    "density_times": ("density_times",),
}


@dataclass(frozen=True)
class RunConfig:
    geometry: WellGeometry
    n_even: int
    n_odd: int
    c_even: complex
    c_odd: complex
    n_trajectories: int
    route_a_trajectories: int
    root_tol: Tolerance
    quad_tol: Tolerance
    ode_tol: Tolerance
    density_floor: float
    nx: int
    nt: int
    density_times: tuple[float, ...]

    def echo(self) -> dict:
        """Full config document, defaults included, in input form."""
        g = self.geometry
        return {
            "geometry": {"a": g.a, "b": g.b, "V": g.V},
            "n_even": self.n_even,
            "n_odd": self.n_odd,
            "coefficients": {
                "even": [self.c_even.real, self.c_even.imag],
                "odd": [self.c_odd.real, self.c_odd.imag],
            },
            "n_trajectories": self.n_trajectories,
            "route_a_trajectories": self.route_a_trajectories,
            "tolerances": {
                "root": self.root_tol.abs_tol,
                "quad": self.quad_tol.abs_tol,
                "ode": self.ode_tol.abs_tol,
                "density_floor": self.density_floor,
            },
            "grid": {"nx": self.nx, "nt": self.nt},
            "density_times": list(self.density_times),
        }


def _merge(base: dict, override: dict, prefix: str = "") -> None:
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{path}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{path}' must be an object")
            _merge(base[key], value, path + ".")
        else:
            base[key] = value


def _real(doc: dict, *path: str, positive: bool = False) -> float:
    value = doc
    for key in path:
        value = value[key]
    name = ".".join(path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{name}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"config key '{name}' must be finite, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"config key '{name}' must be positive, got {value!r}")
    return float(value)


def _integer(doc: dict, *path: str, minimum: int = 1) -> int:
    value = doc
    for key in path:
        value = value[key]
    name = ".".join(path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config key '{name}' must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"config key '{name}' must be >= {minimum}, got {value!r}")
    return value


def _coefficient(value, name: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        parts = value
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        parts = (value, 0.0)
    else:
        raise ConfigError(f"config key '{name}' must be a number or a [re, im] pair, got {value!r}")
    if any(isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p) for p in parts):
        raise ConfigError(f"config key '{name}' has a non-numeric or non-finite part: {value!r}")
    return complex(float(parts[0]), float(parts[1]))


def from_document(doc: dict) -> RunConfig:
    """Validate a (partial) config document merged over the defaults.

    Raises:
        ConfigError: unknown key, wrong type or violated invariant.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    full = copy.deepcopy(DEFAULTS)
    _merge(full, doc)

    a, b, V = (_real(full, "geometry", k) for k in ("a", "b", "V"))
    try:
        geometry = WellGeometry(a, b, V)
    except ValueError as exc:
        raise ConfigError(f"config key 'geometry': {exc}") from exc

    c_even = _coefficient(full["coefficients"]["even"], "coefficients.even")
    c_odd = _coefficient(full["coefficients"]["odd"], "coefficients.odd")
    weight = abs(c_even) ** 2 + abs(c_odd) ** 2
    if abs(weight - 1.0) > 1e-12:
        raise ConfigError(f"config key 'coefficients': |even|^2 + |odd|^2 must be 1, got {weight!r}")

    times = full["density_times"]
    if not isinstance(times, list):
        raise ConfigError("config key 'density_times' must be a list of numbers")
    for i, t in enumerate(times):
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t):
            raise ConfigError(f"config key 'density_times[{i}]' must be a finite number, got {t!r}")

    return RunConfig(
        geometry=geometry,
        n_even=_integer(full, "n_even"),
        n_odd=_integer(full, "n_odd"),
        c_even=c_even,
        c_odd=c_odd,
        n_trajectories=_integer(full, "n_trajectories"),
        route_a_trajectories=_integer(full, "route_a_trajectories", minimum=0),
        root_tol=dataclasses.replace(ROOT_TOL, abs_tol=_real(full, "tolerances", "root", positive=True)),
        quad_tol=dataclasses.replace(QUAD_TOL, abs_tol=_real(full, "tolerances", "quad", positive=True)),
        ode_tol=dataclasses.replace(ODE_TOL, abs_tol=_real(full, "tolerances", "ode", positive=True)),
        density_floor=_real(full, "tolerances", "density_floor", positive=True),
        nx=_integer(full, "grid", "nx", minimum=2),
        nt=_integer(full, "grid", "nt", minimum=2),
        density_times=tuple(float(t) for t in times),
    )


def load(path: str | None, overrides: dict[str, object] | None = None) -> RunConfig:
    """Read a JSON config (or start from defaults) and apply flag overrides.

    ``overrides`` maps flag names from :data:`FLAG_KEYS` to already-parsed values.
    """
    doc: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
    for flag, value in (overrides or {}).items():
        if value is None:
            continue
        node = doc
        *parents, leaf = FLAG_KEYS[flag]
        for key in parents:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError(f"config key '{key}' must be an object")
            node = child
        node[leaf] = value
    return from_document(doc)
