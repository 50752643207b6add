"""Closed-form nonspreading solution of the driven oscillator.

    Psi(x, t) = exp(-i phi / hbar) exp(i m d_dot x / hbar) Phi_n(x - d(t))

The phase obeys phi' = E_n + m d_dot^2 - (fc^2 + fs^2)/2m, which is what the
ansatz needs to satisfy i hbar dPsi/dt = H Psi. The ``PAPER_LITERAL`` mode keeps
the commonly printed integrand E_n - (fc^2 + fs^2)/2m - m d_dot^2 for comparison;
it moves only the global phase, so every |Psi|-derived observable is unchanged.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .algebra import apply_operator, build_hamiltonian, build_h_tilde
from .oscillator import EDGE_TOL, Grid, OscillatorParams, WaveFunction, hermite_function, hermite_functions
from .pulse import Pulse, ZeroPulse, kinematics_from_weights, segment_weights, short_weights

PHASE_TOL = 1e-12


class PhaseMode(str, enum.Enum):
    RESIDUAL_VALIDATED = "residual_validated"
    PAPER_LITERAL = "paper_literal"


@dataclass(frozen=True)
class ExactState:
    n: int
    pulse: Pulse
    params: OscillatorParams = OscillatorParams()
    phase_mode: PhaseMode = PhaseMode.RESIDUAL_VALIDATED

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"quantum number must be >= 0, got {self.n}")
        object.__setattr__(self, "phase_mode", PhaseMode(self.phase_mode))

    @property
    def energy(self) -> float:
        return self.params.energy(self.n)


def _phase_rate(state: ExactState, t, fs, fc):
    p = state.params
    _, d_dot, _ = kinematics_from_weights(state.pulse, p, t, fs, fc)
    weights = (fc**2 + fs**2) / (2 * p.m)
    if state.phase_mode is PhaseMode.PAPER_LITERAL:
        return state.energy - weights - p.m * d_dot**2
    return state.energy + p.m * d_dot**2 - weights


@dataclass(frozen=True)
class Trajectory:
    """Classical data and phase of an exact state on a time mesh."""

    t: np.ndarray
    d: np.ndarray
    d_dot: np.ndarray
    phase: np.ndarray


def trajectory(state: ExactState, times) -> Trajectory:
    """d, d_dot and phi on an ascending mesh.

    Negative times are allowed and describe the oscillator at rest before the
    force switches on. fs/fc and phi are accumulated segment by segment, so
    neighbouring mesh points share all but their last short integral.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    p = state.params
    E = state.energy
    out_fs = np.zeros(times.shape)
    out_fc = np.zeros(times.shape)
    phase = np.where(times < 0, E * times, 0.0)
    positive = times > 0
    if np.any(positive) and isinstance(state.pulse, ZeroPulse):
        phase[positive] = E * times[positive]
    elif np.any(positive):
        t_pos = times[positive]
        step = min(p.period, state.pulse.shortest_period()) / 8
        extra = np.concatenate((np.arange(step, t_pos[-1], step), [b for b in state.pulse.breakpoints() if 0 < b < t_pos[-1]]))
        # drop cuts that would leave slivers next to a requested time
        gap = np.min(np.abs(extra[:, None] - t_pos[None, :]), axis=1) if extra.size else extra
        cuts = set(t_pos.tolist()) | set(extra[gap > 1e-9 * step].tolist())
        edges = [0.0] + sorted(cuts)
        fs = fc = acc = 0.0
        at_edge = {0.0: (0.0, 0.0, 0.0)}
        for a, b in zip(edges[:-1], edges[1:]):

            def rate(tau, a=a, fs_a=fs, fc_a=fc):
                ds, dc = short_weights(state.pulse, p, a, tau)
                return _phase_rate(state, tau, fs_a + ds, fc_a + dc)

            value, err = integrate.quad(rate, a, b, epsabs=PHASE_TOL, epsrel=PHASE_TOL, limit=100)
            if err > 1e-10:
                raise ArithmeticError(f"phase quadrature failed on [{a}, {b}]: error {err:.2e}")
            ds, dc = segment_weights(state.pulse, p, a, b)
            fs, fc, acc = fs + ds, fc + dc, acc + value
            at_edge[b] = (fs, fc, acc)
        vals = np.array([at_edge[t] for t in t_pos])
        out_fs[positive], out_fc[positive], phase[positive] = vals[:, 0], vals[:, 1], vals[:, 2]
    d, d_dot, _ = kinematics_from_weights(state.pulse, p, times, out_fs, out_fc)
    return Trajectory(times, np.asarray(d, dtype=float), np.asarray(d_dot, dtype=float), phase)


def phase_phi(state: ExactState, t: float) -> float:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return float(trajectory(state, [t]).phase[0])


def _psi_from(state: ExactState, grid: Grid, d: float, d_dot: float, phase: float) -> WaveFunction:
    p = state.params
    x = grid.x
    amps = np.exp(-1j * phase / p.hbar) * np.exp(1j * p.m * d_dot * x / p.hbar) * hermite_function(state.n, x - d, p)
    psi = WaveFunction(grid, amps)
    if psi.edge_amplitude() >= EDGE_TOL:
        raise ValueError(f"displaced state (d={d:.4g}) leaves the grid: edge amplitude {psi.edge_amplitude():.2e}")
    return psi


def exact_psi(state: ExactState, t: float, grid: Grid) -> WaveFunction:
    tr = trajectory(state, [t])
    return _psi_from(state, grid, tr.d[0], tr.d_dot[0], tr.phase[0])


def exact_series(state: ExactState, times, grid: Grid) -> list[WaveFunction]:
    tr = trajectory(state, times)
    return [_psi_from(state, grid, d, v, ph) for d, v, ph in zip(tr.d, tr.d_dot, tr.phase)]


def schrodinger_residual(state: ExactState, t: float, grid: Grid) -> float:
    """||i hbar dPsi/dt - H(t) Psi|| / ||Psi||, time derivative by a five-point stencil."""
    h = 1e-5 * state.params.period
    m2, m1, now, p1, p2 = exact_series(state, [t - 2 * h, t - h, t, t + h, t + 2 * h], grid)
    dpsi = (m2.amps - 8 * m1.amps + 8 * p1.amps - p2.amps) / (12 * h)
    h_psi = apply_operator(build_hamiltonian(state.pulse, state.params, t), now, state.params)
    diff = 1j * state.params.hbar * dpsi - h_psi.amps
    return float(np.linalg.norm(diff) / np.linalg.norm(now.amps))


def eigen_residual(state: ExactState, t: float, grid: Grid) -> float:
    """||H_tilde(t) Psi - E_n Psi|| / ||Psi||."""
    psi = exact_psi(state, t, grid)
    h_psi = apply_operator(build_h_tilde(state.pulse, state.params, t), psi, state.params)
    return float(np.linalg.norm(h_psi.amps - state.energy * psi.amps) / np.linalg.norm(psi.amps))


@dataclass(frozen=True)
class Occupation:
    probabilities: np.ndarray
    captured: float


def occupation_distribution(psi: WaveFunction, params: OscillatorParams, n_max: int, min_captured: float = 0.999) -> Occupation:
    """P_n = |<Phi_n|psi>|^2 for n = 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if abs(psi.norm() - 1.0) > 1e-6:
        raise ValueError(f"state not normalized: {psi.norm()!r}")
    basis = hermite_functions(n_max, psi.grid.x, params)
    amplitudes = basis @ psi.amps * psi.grid.dx
    probs = np.abs(amplitudes) ** 2
    captured = float(probs.sum())
    if captured < min_captured:
        raise ValueError(f"only {captured:.6f} of the probability lies in n <= {n_max}; raise n_max")
    return Occupation(probs, captured)


def coherent_mean(d: float, d_dot: float, params: OscillatorParams) -> float:
    """Mean occupation of a displaced ground state, (m w d^2 + m d_dot^2 / w) / (2 hbar)."""
    return (params.m * params.omega * d**2 + params.m * d_dot**2 / params.omega) / (2 * params.hbar)
