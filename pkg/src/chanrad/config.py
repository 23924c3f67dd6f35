"""Run configuration: defaults, unit-suffixed parsing, aggregated validation.

Precedence: command-line flags override config-file values override the
built-in defaults, which reproduce the diamond(110) setup of the reference
tables (V0 = 23 eV, d = 1.26 A, theta_in = 31 urad, E = 4, 6, 10, 14 GeV).

Angles accept the suffix L meaning "fractions of the Lindhard angle",
resolved per beam energy; e.g. --theta-in 0.5L.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CHANNEL_SHAPES, CrystalChannel, lindhard_angle
from .entry import ENTRY_MODELS, PHASE_CONVENTIONS
from .errors import ConfigError
from .radiation import ANGULAR_WEIGHTS

_ENERGY_UNITS = {"ev": 1.0, "kev": 1e3, "mev": 1e6, "gev": 1e9}
_ANGLE_UNITS = {"rad": 1.0, "mrad": 1e-3, "urad": 1e-6}
_LENGTH_UNITS = {"a": 1.0, "ang": 1.0, "nm": 10.0}

DEFAULTS = {
    "v0": "23eV",
    "spacing": "1.26A",
    "shape": "parabolic",
    "pt_width": None,               # Angstrom; None -> spacing/4
    "energy": "4GeV,6GeV,10GeV,14GeV",
    "theta_in": "31urad",
    "sigma": "10urad",
    "grid": "0:0.85L:200",
    "harmonic": "1",
    "model": "glauber",
    "phase": "magnitude_aligned",
    "weight": "flat",
    "mode": "both",
    "estimator": "eq7",
    "quad_points": "4096",
    "points": "512",
    "exp_peaks": "23MeV,42MeV,90MeV,120MeV",
    "format": "csv",
    "output": None,
    "precision": "9",
    "parallel": "false",
}

_CHOICES = {
    "shape": CHANNEL_SHAPES,
    "model": ENTRY_MODELS,
    "phase": PHASE_CONVENTIONS,
    "weight": ANGULAR_WEIGHTS,
    "mode": ("coherent", "incoherent", "both"),
    "estimator": ("eq7", "n0"),
    "format": ("csv", "json"),
}


def _split_number_suffix(text: str) -> tuple[float, str]:
    text = text.strip()
    idx = len(text)
    while idx > 0 and not (text[idx - 1].isdigit() or text[idx - 1] == "."):
        idx -= 1
    value = float(text[:idx].strip())
    return value, text[idx:].strip().lower()


def parse_energy(text: str) -> float:
    """Energy in eV from a suffixed literal: '10GeV', '23eV', '4e9'."""
    value, suffix = _split_number_suffix(text)
    if suffix == "":
        return value
    if suffix not in _ENERGY_UNITS:
        raise ValueError(f"unknown energy unit {suffix!r} in {text!r}")
    return value * _ENERGY_UNITS[suffix]


def parse_length(text: str) -> float:
    """Length in Angstrom from a suffixed literal: '1.26A', '0.315A'."""
    value, suffix = _split_number_suffix(text)
    if suffix == "":
        return value
    if suffix not in _LENGTH_UNITS:
        raise ValueError(f"unknown length unit {suffix!r} in {text!r}")
    return value * _LENGTH_UNITS[suffix]


@dataclass(frozen=True)
class Angle:
    """An angle, either absolute (rad) or in units of theta_L."""

    rad: float | None = None
    theta_L_units: float | None = None

    def resolve(self, channel: CrystalChannel, E: float) -> float:
        if self.rad is not None:
            return self.rad
        return self.theta_L_units * lindhard_angle(channel, E)

    def echo(self) -> str:
        if self.rad is not None:
            return f"{self.rad!r}rad"
        return f"{self.theta_L_units!r}L"


def parse_angle(text: str) -> Angle:
    """Angle from a suffixed literal: '31urad', '1e-5', '0.5L'."""
    value, suffix = _split_number_suffix(text)
    if suffix == "l":
        return Angle(theta_L_units=value)
    if suffix == "":
        return Angle(rad=value)
    if suffix not in _ANGLE_UNITS:
        raise ValueError(f"unknown angle unit {suffix!r} in {text!r}")
    return Angle(rad=value * _ANGLE_UNITS[suffix])


@dataclass(frozen=True)
class GridSpec:
    """start:stop:count angle grid, e.g. '0:0.85L:200'."""

    start: Angle
    stop: Angle
    count: int

    def resolve(self, channel: CrystalChannel, E: float) -> np.ndarray:
        return np.linspace(self.start.resolve(channel, E),
                           self.stop.resolve(channel, E), self.count)

    def echo(self) -> str:
        return f"{self.start.echo()}:{self.stop.echo()}:{self.count}"


def parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:count, got {text!r}")
    return GridSpec(start=parse_angle(parts[0]), stop=parse_angle(parts[1]),
                    count=int(parts[2]))


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration for one CLI invocation."""

    channel: CrystalChannel
    energies: tuple[float, ...]
    theta_in: Angle
    sigma: Angle
    grid: GridSpec
    harmonic: int
    model: str
    phase: str
    weight: str
    mode: str
    estimator: str
    quad_points: int
    points: int
    exp_peaks: tuple[float, ...] | None
    out_format: str
    output: str | None
    precision: int
    parallel: bool
    raw: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Canonical configuration block embedded in every output."""
        return dict(self.raw)


def _flags_to_mapping(args: list[str]) -> dict:
    """--key value / --key=value pairs to a mapping with underscored keys."""
    out = {}
    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith("--"):
            raise ConfigError([f"unexpected argument {token!r} (flags are --key value)"])
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(args):
                raise ConfigError([f"flag --{key} is missing a value"])
            value = args[i + 1]
            i += 1
        out[key.replace("-", "_")] = value
        i += 1
    return out


def parse_config(args: list[str], file: str | None = None) -> RunConfig:
    """Build a RunConfig from flag overrides, an optional JSON file, and defaults.

    All validation problems are collected and raised together as one
    ConfigError; unknown keys (flag or file) are hard errors.
    """
    merged = dict(DEFAULTS)
    problems: list[str] = []

    if file is not None:
        try:
            with open(file, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigError([f"cannot read config file {file!r}: {exc}"])
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config file {file!r} is not valid JSON: {exc}"])
        if not isinstance(file_values, dict):
            raise ConfigError([f"config file {file!r} must hold a JSON object"])
        for key, value in file_values.items():
            norm = str(key).replace("-", "_")
            if norm not in DEFAULTS:
                problems.append(f"unknown config key {key!r}")
            else:
                merged[norm] = value if value is None else str(value)

    flag_values = _flags_to_mapping(list(args))
    for key, value in flag_values.items():
        if key not in DEFAULTS:
            problems.append(f"unknown flag --{key.replace('_', '-')}")
        else:
            merged[key] = value
    if problems:
        raise ConfigError(problems)

    def grab(key, parser, description):
        try:
            return parser(merged[key])
        except (ValueError, TypeError) as exc:
            problems.append(f"{key}: {exc if str(exc) else description}")
            return None

    v0 = grab("v0", parse_energy, "bad well depth")
    spacing = grab("spacing", parse_length, "bad spacing")
    shape = merged["shape"]
    pt_width = None
    if merged["pt_width"] is not None:
        pt_width = grab("pt_width", parse_length, "bad width")
    energies = grab("energy", lambda s: tuple(parse_energy(p) for p in str(s).split(",")),
                    "bad energy list")
    theta_in = grab("theta_in", parse_angle, "bad angle")
    sigma = grab("sigma", parse_angle, "bad angle")
    grid = grab("grid", parse_grid, "bad grid")
    harmonic = grab("harmonic", int, "bad harmonic")
    quad_points = grab("quad_points", int, "bad node count")
    points = grab("points", int, "bad point count")
    precision = grab("precision", int, "bad precision")
    parallel = grab("parallel", _parse_bool, "bad boolean")
    exp_peaks = None
    if merged["exp_peaks"] not in (None, "", "none"):
        exp_peaks = grab("exp_peaks",
                         lambda s: tuple(parse_energy(p) for p in str(s).split(",")),
                         "bad peak list")

    for key in _CHOICES:
        if merged[key] not in _CHOICES[key]:
            problems.append(f"{key}: must be one of {', '.join(_CHOICES[key])}, "
                            f"got {merged[key]!r}")

    if v0 is not None and v0 <= 0:
        problems.append("v0: well depth must be > 0")
    if spacing is not None and spacing <= 0:
        problems.append("spacing: must be > 0")
    if pt_width is not None and pt_width <= 0:
        problems.append("pt_width: must be > 0")
    if energies is not None:
        for E in energies:
            if E < 1e8:
                problems.append(f"energy: {E:g} eV below the relativistic floor 1e8 eV")
    if theta_in is not None:
        if theta_in.rad is not None and theta_in.rad < 0:
            problems.append("theta_in: must be >= 0")
        if theta_in.theta_L_units is not None and theta_in.theta_L_units < 0:
            problems.append("theta_in: must be >= 0")
    if sigma is not None:
        if sigma.rad is not None and sigma.rad <= 0:
            problems.append("sigma: must be > 0")
        if sigma.theta_L_units is not None and sigma.theta_L_units <= 0:
            problems.append("sigma: must be > 0")
    if grid is not None:
        if grid.count < 2:
            problems.append("grid: count must be >= 2")
        if grid.stop.theta_L_units is not None and grid.stop.theta_L_units > 0.9:
            problems.append("grid: stop exceeds 0.9 theta_L")
    if harmonic is not None and not 1 <= harmonic <= 6:
        problems.append(f"harmonic: must be in 1..6, got {harmonic}")
    if quad_points is not None and quad_points < 32:
        problems.append("quad_points: must be >= 32")
    if points is not None and points < 16:
        problems.append("points: must be >= 16")
    if precision is not None and not 1 <= precision <= 17:
        problems.append("precision: must be in 1..17")

    if problems:
        raise ConfigError(problems)

    channel_kwargs = dict(name="diamond(110)" if (v0 == 23.0 and spacing == 1.26)
                          else "custom",
                          well_depth_V0=v0, spacing_d=spacing, shape=shape)
    if pt_width is not None:
        channel_kwargs["width_b"] = pt_width
    try:
        channel = CrystalChannel(**channel_kwargs)
    except ValueError as exc:
        raise ConfigError([str(exc)])

    raw = {k: merged[k] for k in sorted(merged)}
    return RunConfig(
        channel=channel,
        energies=energies,
        theta_in=theta_in,
        sigma=sigma,
        grid=grid,
        harmonic=harmonic,
        model=merged["model"],
        phase=merged["phase"],
        weight=merged["weight"],
        mode=merged["mode"],
        estimator=merged["estimator"],
        quad_points=quad_points,
        points=points,
        exp_peaks=exp_peaks,
        out_format=merged["format"],
        output=merged["output"],
        precision=precision,
        parallel=parallel,
        raw=raw,
    )
