"""INI experiment configuration: parsing, defaults, validation and echo."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import DEFAULT_CENTER_WIDTHS, PhysicalParams, PulseSchedule, PulseSpec
from .protocols import RunConfig
from .solver import Grid

# section -> key -> (type, default); None defaults are derived in _resolve
SCHEMA = {
    "params": {"e_c": (float, 0.009), "e_l": (float, 645.0), "e_0": (float, 76.0)},
    "grid": {"x_max": (float, 0.75), "n_points": (int, 1025), "d_tau": (float, 0.002)},
    "pulse": {"amplitude": (float, 0.59), "duration": (float, 5.0), "center": (float, None)},
    "sweep": {
        "a_min": (float, 0.40), "a_max": (float, 0.90), "a_steps": (int, 26),
        "tau0_min": (float, 2.0), "tau0_max": (float, 40.0), "tau0_steps": (int, 39),
    },
    "twopulse": {"delta_min": (float, None), "delta_max": (float, None), "delta_steps": (int, 161)},
    "output": {"directory": (str, "fluxpulse_out"), "sample_every": (int, 50)},
}

TWO_PULSE_SPAN = 40.0


@dataclass(frozen=True)
class ExperimentConfig:
    e_c: float = 0.009
    e_l: float = 645.0
    e_0: float = 76.0
    x_max: float = 0.75
    n_points: int = 1025
    d_tau: float = 0.002
    amplitude: float = 0.59
    duration: float = 5.0
    center: float | None = None
    a_min: float = 0.40
    a_max: float = 0.90
    a_steps: int = 26
    tau0_min: float = 2.0
    tau0_max: float = 40.0
    tau0_steps: int = 39
    delta_min: float | None = None
    delta_max: float | None = None
    delta_steps: int = 161
    directory: str = "fluxpulse_out"
    sample_every: int = 50

    def __post_init__(self):
        _resolve(self)

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.e_c, self.e_l, self.e_0)

    @property
    def grid(self) -> Grid:
        return Grid(self.x_max, self.n_points)

    @property
    def pulse(self) -> PulseSpec:
        return PulseSpec(self.amplitude, self.duration, self.center)

    def run_config(self, profile_times=None) -> RunConfig:
        return RunConfig(
            params=self.params,
            grid=self.grid,
            d_tau=self.d_tau,
            schedule=PulseSchedule((self.pulse,)),
            sample_every=self.sample_every,
            profile_times=profile_times,
        )

    def a_values(self) -> np.ndarray:
        return np.linspace(self.a_min, self.a_max, self.a_steps)

    def tau0_values(self) -> np.ndarray:
        return np.linspace(self.tau0_min, self.tau0_max, self.tau0_steps)

    def delta_values(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.delta_steps)

    def to_ini(self) -> str:
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                lines.append(f"{key} = {_format_value(getattr(self, key))}")
            lines.append("")
        return "\n".join(lines)


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _section_of(key: str) -> str:
    for section, keys in SCHEMA.items():
        if key in keys:
            return section
    raise KeyError(key)


def _fail(key: str, message: str):
    raise ConfigError(f"[{_section_of(key)}] {key}: {message}")


def _resolve(cfg: ExperimentConfig):
    """Fill derived defaults and validate every value, naming the offending key."""
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, float) and not math.isfinite(value):
            _fail(f.name, f"must be finite, got {value!r}")
    for key in ("e_c", "e_l", "e_0"):
        if not getattr(cfg, key) > 0:
            _fail(key, f"must be positive, got {getattr(cfg, key)!r}")
    if cfg.center is None:
        object.__setattr__(cfg, "center", DEFAULT_CENTER_WIDTHS * cfg.duration)
    if cfg.delta_min is None:
        object.__setattr__(cfg, "delta_min", DEFAULT_CENTER_WIDTHS * cfg.duration)
    if cfg.delta_max is None:
        object.__setattr__(cfg, "delta_max", cfg.delta_min + TWO_PULSE_SPAN)
    try:
        Grid(cfg.x_max, cfg.n_points)
    except ValueError as exc:
        _fail("n_points" if "n_points" in str(exc) else "x_max", str(exc))
    try:
        PulseSpec(cfg.amplitude, cfg.duration, cfg.center)
    except ValueError as exc:
        _fail(next(k for k in ("duration", "amplitude", "center") if k in str(exc)), str(exc))
    if not cfg.d_tau > 0:
        _fail("d_tau", "must be positive")
    for key in ("a_steps", "tau0_steps", "delta_steps", "sample_every"):
        if getattr(cfg, key) < 1:
            _fail(key, "must be at least 1")
    if not 0 <= cfg.a_min <= cfg.a_max <= 1:
        _fail("a_min", "need 0 <= a_min <= a_max <= 1")
    if not 0 < cfg.tau0_min <= cfg.tau0_max:
        _fail("tau0_min", "need 0 < tau0_min <= tau0_max")
    if not 0 < cfg.delta_min <= cfg.delta_max:
        _fail("delta_min", "need 0 < delta_min <= delta_max")


def config_from_mapping(values: dict) -> ExperimentConfig:
    """Build from a flat {key: value} mapping; values may be strings."""
    kwargs = {}
    for key, raw in values.items():
        try:
            section = _section_of(key)
        except KeyError:
            raise ConfigError(f"unknown key {key!r}") from None
        kind, _ = SCHEMA[section][key]
        try:
            kwargs[key] = kind(raw) if kind is not int else int(str(raw).strip())
        except (TypeError, ValueError):
            _fail(key, f"cannot interpret {raw!r} as {kind.__name__}")
    return ExperimentConfig(**kwargs)


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in section [{section}]")
            values[key] = raw
    return config_from_mapping(values)


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config_text(text, source=str(path))


def write_echo(config: ExperimentConfig, directory) -> Path:
    path = Path(directory) / "resolved_config.ini"
    path.write_text(config.to_ini(), encoding="utf-8", newline="\n")
    return path
