"""Experiment configuration: presets and the flat ``key = value`` file format.

Example::

    # nonresonant run
    params.m = 1.0
    pulse.kind = "sine_squared"
    pulse.F_m = 1.0
    pulse.Omega_over_omega = 0.5
    pulse.T_cycles = 10.0
    grid.x_min = -20.0
    out.dir = "runs/fig1"

Strings may be quoted or bare; ``#`` starts a comment.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .oscillator import Grid, OscillatorParams, build_grid
from .propagate import Method, PropagationConfig
from .pulse import ConstantPulse, Pulse, SineSquaredPulse, ZeroPulse, load_tabulated_pulse

PULSE_KINDS = ("zero", "constant", "sine_squared", "tabulated")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    kind: str = "zero"
    F_m: float = 1.0
    Omega_over_omega: float = 1.0
    T_cycles: float = 10.0
    F0: float = 0.0
    file: str = ""

    def build(self, params: OscillatorParams) -> Pulse:
        if self.kind == "zero":
            return ZeroPulse()
        if self.kind == "constant":
            return ConstantPulse(self.F0)
        if self.kind == "sine_squared":
            return SineSquaredPulse(self.F_m, self.Omega_over_omega * params.omega, self.T_cycles * params.period)
        if self.kind == "tabulated":
            if not self.file:
                raise ConfigError("pulse.file is required for tabulated pulses")
            return load_tabulated_pulse(self.file)
        raise ConfigError(f"unknown pulse.kind {self.kind!r}; expected one of {PULSE_KINDS}")


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -20.0
    x_max: float = 20.0
    n: int = 512

    def build(self) -> Grid:
        return build_grid(self.x_min, self.x_max, self.n)


@dataclass(frozen=True)
class PropSpec:
    dt_per_cycle: int = 2000
    t_end_cycles: float = 12.0
    method: str = Method.SPLIT_OPERATOR.value
    records_per_cycle: int = 100

    def build(self, grid: Grid, params: OscillatorParams) -> PropagationConfig:
        if self.dt_per_cycle % self.records_per_cycle:
            raise ConfigError("prop.records_per_cycle must divide prop.dt_per_cycle")
        return PropagationConfig(
            grid=grid,
            dt=params.period / self.dt_per_cycle,
            t_end=self.t_end_cycles * params.period,
            record_stride=self.dt_per_cycle // self.records_per_cycle,
            method=Method(self.method),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    params: OscillatorParams = field(default_factory=OscillatorParams)
    pulse: PulseSpec = field(default_factory=PulseSpec)
    n: int = 0
    grid: GridSpec = field(default_factory=GridSpec)
    prop: PropSpec = field(default_factory=PropSpec)
    out_dir: str = "runs/default"
    preset: Optional[str] = None

    def to_flat(self) -> dict:
        flat = {f"params.{k}": v for k, v in asdict(self.params).items()}
        flat.update({f"pulse.{k}": v for k, v in asdict(self.pulse).items()})
        flat["state.n"] = self.n
        flat.update({f"grid.{k}": v for k, v in asdict(self.grid).items()})
        flat.update({f"prop.{k}": v for k, v in asdict(self.prop).items()})
        flat["out.dir"] = self.out_dir
        if self.preset is not None:
            flat["preset"] = self.preset
        return flat

    def to_text(self) -> str:
        return "".join(f"{key} = {json.dumps(value)}\n" for key, value in self.to_flat().items())

    def validate(self) -> "ExperimentConfig":
        """Build every runtime object once so errors surface before a run starts."""
        try:
            grid = self.grid.build()
            self.pulse.build(self.params)
            self.prop.build(grid, self.params)
            if self.n < 0:
                raise ConfigError("state.n must be >= 0")
        except ConfigError:
            raise
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


_SECTIONS = {"params": OscillatorParams, "pulse": PulseSpec, "grid": GridSpec, "prop": PropSpec}


def _coerce(cls, name: str, raw):
    kinds = {f.name: f.type for f in fields(cls)}
    if name not in kinds:
        raise ConfigError(f"unknown key {cls.__name__}.{name}")
    kind = kinds[name]
    try:
        if kind in ("float", float):
            return float(raw)
        if kind in ("int", int):
            if float(raw) != int(float(raw)):
                raise ValueError
            return int(float(raw))
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def from_flat(flat: dict, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    if "preset" in flat and base is None:
        cfg = preset(str(flat["preset"]))
    sections = {key: asdict(getattr(cfg, key)) for key in _SECTIONS}
    top = {"n": cfg.n, "out_dir": cfg.out_dir, "preset": cfg.preset}
    for key, raw in flat.items():
        if key == "preset":
            top["preset"] = str(raw)
        elif key == "state.n":
            top["n"] = _coerce(ExperimentConfig, "n", raw)
        elif key == "out.dir":
            top["out_dir"] = str(raw)
        else:
            section, _, name = key.partition(".")
            if section not in _SECTIONS or not name:
                raise ConfigError(f"unknown key {key!r}")
            sections[section][name] = _coerce(_SECTIONS[section], name, raw)
    try:
        return ExperimentConfig(
            params=OscillatorParams(**sections["params"]),
            pulse=PulseSpec(**sections["pulse"]),
            grid=GridSpec(**sections["grid"]),
            prop=PropSpec(**sections["prop"]),
            **top,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_text(text: str) -> dict:
    flat = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        value = value.strip()
        try:
            flat[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            flat[key.strip()] = value
    return flat


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return from_flat(parse_text(text))


def preset(name: str) -> ExperimentConfig:
    """Nonresonant ("fig1", Omega = w/2) and resonant ("fig2", Omega = w) sine-squared runs.

    Both use F_m = 1 and T = 10 cycles, starting from the ground state.
    fig2 drives the packet out to |d| ~ F_m T / (4 m w), so it gets a wider grid and
    a finer step (the splitting phase error grows with the packet's energy).
    """
    if name == "fig1":
        return ExperimentConfig(
            pulse=PulseSpec(kind="sine_squared", F_m=1.0, Omega_over_omega=0.5, T_cycles=10.0),
            grid=GridSpec(-20.0, 20.0, 512),
            prop=PropSpec(dt_per_cycle=2000, t_end_cycles=12.0),
            out_dir="runs/fig1",
            preset="fig1",
        )
    if name == "fig2":
        return ExperimentConfig(
            pulse=PulseSpec(kind="sine_squared", F_m=1.0, Omega_over_omega=1.0, T_cycles=10.0),
            grid=GridSpec(-64.0, 64.0, 2048),
            prop=PropSpec(dt_per_cycle=4000, t_end_cycles=12.0),
            out_dir="runs/fig2",
            preset="fig2",
        )
    raise ConfigError(f"unknown preset {name!r}; expected 'fig1' or 'fig2'")


def with_out_dir(cfg: ExperimentConfig, out_dir) -> ExperimentConfig:
    return replace(cfg, out_dir=str(out_dir))
