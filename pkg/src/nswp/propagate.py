"""Grid solution of i hbar dpsi/dt = H(t) psi and the observables recorded along it."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import ode

from .oscillator import (
    EDGE_TOL,
    Grid,
    ObservableSet,
    OscillatorParams,
    WaveFunction,
    observables,
    peak_position,
)
from .pulse import Pulse, kinematics_series

TIMESERIES_COLUMNS = ("t", "peak", "mean_x", "mean_p", "dx", "dp", "dxdp", "energy", "accel", "d_ref", "norm")


class PropagationAborted(RuntimeError):
    """Raised when a run leaves the regime the grid can represent."""


class Method(str, enum.Enum):
    SPLIT_OPERATOR = "split_operator"
    ADAPTIVE_MULTISTEP = "adaptive_multistep"


@dataclass(frozen=True)
class PropagationConfig:
    grid: Grid
    dt: float
    t_end: float
    record_stride: int = 1
    method: Method = Method.SPLIT_OPERATOR
    rtol: float = 1e-9
    # the stiff high-k modes need a tight absolute floor or edge noise builds up
    atol: float = 1e-14

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        object.__setattr__(self, "method", Method(self.method))

    @property
    def n_steps(self) -> int:
        """Whole steps covering t_end; the effective step is t_end / n_steps."""
        return int(np.ceil(self.t_end / self.dt - 1e-9))

    @property
    def step(self) -> float:
        return self.t_end / self.n_steps if self.n_steps else self.dt

    def record_times(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.record_stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps * self.step


@dataclass
class TimeSeries:
    columns: dict = field(default_factory=lambda: {name: [] for name in TIMESERIES_COLUMNS})

    def append(self, **row) -> None:
        for name in TIMESERIES_COLUMNS:
            self.columns[name].append(float(row[name]))

    def __getitem__(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])

    def __len__(self) -> int:
        return len(self.columns["t"])

    @classmethod
    def from_columns(cls, data: dict) -> "TimeSeries":
        missing = set(TIMESERIES_COLUMNS) - set(data)
        if missing:
            raise ValueError(f"missing time-series columns: {sorted(missing)}")
        return cls({name: [float(v) for v in data[name]] for name in TIMESERIES_COLUMNS})


def _energy(obs: ObservableSet, force: float, params: OscillatorParams) -> float:
    mean_p2 = obs.var_p + obs.mean_p**2
    mean_x2 = obs.var_x + obs.mean_x**2
    return mean_p2 / (2 * params.m) + 0.5 * params.m * params.omega**2 * mean_x2 - force * obs.mean_x


def energy_expectation(psi: WaveFunction, pulse: Pulse, params: OscillatorParams, t: float) -> float:
    """<p^2/2m> + <m w^2 x^2 / 2> - F(t) <x>."""
    return _energy(observables(psi, params), float(pulse.force(t)), params)


def ehrenfest_acceleration(psi: WaveFunction, pulse: Pulse, params: OscillatorParams, t: float) -> float:
    """m <x''> = F(t) - m w^2 <x>."""
    obs = observables(psi, params)
    return float(pulse.force(t)) - params.m * params.omega**2 * obs.mean_x


def record_state(series: TimeSeries, psi: WaveFunction, pulse: Pulse, params: OscillatorParams, t: float, d_ref: float):
    obs = observables(psi, params)
    force = float(pulse.force(t))
    series.append(
        t=t,
        peak=peak_position(psi),
        mean_x=obs.mean_x,
        mean_p=obs.mean_p,
        dx=obs.dx_unc,
        dp=obs.dp_unc,
        dxdp=obs.product,
        energy=_energy(obs, force, params),
        accel=force - params.m * params.omega**2 * obs.mean_x,
        d_ref=d_ref,
        norm=obs.norm,
    )


def _check_edges(amps: np.ndarray, t: float) -> None:
    edge = max(abs(amps[0]), abs(amps[-1]))
    if edge >= EDGE_TOL:
        raise PropagationAborted(f"edge amplitude {edge:.2e} at t={t:.6g}; enlarge the domain")


def _split_operator(psi: np.ndarray, pulse, params, grid, config, times, on_record):
    dt = config.step
    x = grid.x
    hbar = params.hbar
    kinetic = np.exp(-1j * (hbar * grid.k) ** 2 / (2 * params.m) * dt / hbar)
    harmonic_half = np.exp(-0.5j * (0.5 * params.m * params.omega**2 * x**2) * dt / hbar)
    record_steps = {int(round(t / dt)): t for t in times}
    on_record(psi, 0.0)
    for k in range(config.n_steps):
        t_mid = (k + 0.5) * dt
        force = float(pulse.force(t_mid))
        half = harmonic_half if force == 0.0 else harmonic_half * np.exp(0.5j * force * x * dt / hbar)
        psi = half * np.fft.ifft(kinetic * np.fft.fft(half * psi))
        if k + 1 in record_steps:
            on_record(psi, record_steps[k + 1])
    return psi


def _adaptive_multistep(psi: np.ndarray, pulse, params, grid, config, times, on_record):
    x = grid.x
    hbar = params.hbar
    kinetic = (hbar * grid.k) ** 2 / (2 * params.m)
    harmonic = 0.5 * params.m * params.omega**2 * x**2

    def rhs(t, y):
        hy = np.fft.ifft(kinetic * np.fft.fft(y)) + (harmonic - float(pulse.force(t)) * x) * y
        return -1j / hbar * hy

    solver = ode(rhs).set_integrator(
        "zvode", method="adams", rtol=config.rtol, atol=config.atol, nsteps=10**7
    )
    solver.set_initial_value(psi, 0.0)
    on_record(psi, 0.0)
    for t in times[1:]:
        psi = solver.integrate(t)
        if not solver.successful():
            raise PropagationAborted(f"adaptive integrator failed at t={t:.6g} (code {solver.get_return_code()})")
        drift = abs(np.sum(np.abs(psi) ** 2) * grid.dx - 1.0)
        if drift > 1e-6:
            raise PropagationAborted(f"norm drift {drift:.2e} at t={t:.6g}")
        on_record(psi, t)
    return psi


def propagate(psi0: WaveFunction, pulse: Pulse, params: OscillatorParams, config: PropagationConfig, callback=None):
    """Evolve ``psi0`` from t = 0 to ``config.t_end``.

    Returns ``(TimeSeries, final WaveFunction)``. Observables are recorded every
    ``record_stride`` steps and at t_end; the edge amplitude is checked at every
    record and the run aborts if it reaches 1e-8. ``callback(t, psi)``, if given,
    sees the state at each record.
    """
    grid = config.grid
    if psi0.grid != grid:
        raise ValueError("initial state lives on a different grid than the configuration")
    if abs(psi0.norm() - 1.0) > 1e-6:
        raise ValueError(f"initial state not normalized: {psi0.norm()!r}")
    times = config.record_times() if config.n_steps else np.array([0.0])
    d_ref = dict(zip(times, kinematics_series(pulse, params, times).d))
    series = TimeSeries()

    def on_record(amps, t):
        _check_edges(amps, t)
        psi = WaveFunction(grid, amps)
        record_state(series, psi, pulse, params, t, d_ref[t])
        if callback is not None:
            callback(t, psi)

    stepper = _split_operator if config.method is Method.SPLIT_OPERATOR else _adaptive_multistep
    final = stepper(np.array(psi0.amps), pulse, params, grid, config, times, on_record)
    return series, WaveFunction(grid, final)
