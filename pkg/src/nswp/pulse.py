"""Driving forces F(t) and the classical kinematics they induce.

The force overlaps ``fs(t) = int_0^t F sin(w tau)`` and ``fc(t) = int_0^t F cos(w tau)``
determine everything else:

    d(t)     = (sin(wt) fc - cos(wt) fs) / (m w)
    d_dot(t) = (cos(wt) fc + sin(wt) fs) / m
    d_ddot   = F(t)/m - w^2 d

Forces act from t = 0 onward; the oscillator is at rest before that, so every
variant gives d(0) = d_dot(0) = 0.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .oscillator import OscillatorParams

QUAD_TOL = 1e-13
# Longest sub-interval handed to one quad call, as a fraction of the oscillator period.
SEGMENT_FRACTION = 0.25


class Pulse:
    """Base for force descriptors; subclasses implement ``force``."""

    kind = "abstract"

    def force(self, t):
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        """Interval outside which the force vanishes identically."""
        return 0.0, np.inf

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def shortest_period(self) -> float:
        """Shortest oscillation period in F(t); inf for non-oscillating forces."""
        return np.inf

    smooth = True


@dataclass(frozen=True)
class ZeroPulse(Pulse):
    kind = "zero"

    def force(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    def support(self):
        return 0.0, 0.0


@dataclass(frozen=True)
class ConstantPulse(Pulse):
    F0: float
    kind = "constant"

    def force(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0.0, self.F0, 0.0)[()]


@dataclass(frozen=True)
class SineSquaredPulse(Pulse):
    """``F_m sin^2(pi t / T) sin(Omega t)`` on [0, T], exactly zero elsewhere."""

    F_m: float
    Omega: float
    T: float
    kind = "sine_squared"

    def __post_init__(self):
        if not np.isfinite(self.F_m):
            raise ValueError("F_m must be finite")
        if not self.Omega > 0 or not self.T > 0:
            raise ValueError(f"Omega and T must be positive, got Omega={self.Omega}, T={self.T}")

    def force(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.T)
        value = self.F_m * np.sin(np.pi * t / self.T) ** 2 * np.sin(self.Omega * t)
        return np.where(inside, value, 0.0)[()]

    def support(self):
        return 0.0, self.T

    def breakpoints(self):
        return (self.T,)

    def shortest_period(self):
        return 2.0 * np.pi / (self.Omega + self.envelope_rate)

    @property
    def envelope_rate(self) -> float:
        """Lambda = 2 pi / T, the envelope's own angular frequency."""
        return 2.0 * np.pi / self.T


@dataclass(frozen=True, eq=False)
class TabulatedPulse(Pulse):
    """Linear interpolation of sampled forces; zero outside the table."""

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    kind = "tabulated"
    smooth = False

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("tabulated pulse needs two equal-length 1-D columns with >= 2 rows")
        if np.any(np.diff(times) <= 0):
            raise ValueError("tabulated times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("tabulated pulse contains non-finite entries")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def force(self, t):
        return np.interp(t, self.times, self.values, left=0.0, right=0.0)[()]

    def support(self):
        return max(0.0, float(self.times[0])), float(self.times[-1])

    def breakpoints(self):
        return tuple(self.times)


def load_tabulated_pulse(path) -> TabulatedPulse:
    """Read a two-column ``time,force`` CSV; a header row is optional."""
    rows = []
    with open(Path(path), newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0 and not rows:
                    continue
                raise ValueError(f"{path}: malformed row {i + 1}: {row!r}")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    return TabulatedPulse(data[:, 0], data[:, 1])


def eval_force(pulse: Pulse, t):
    return pulse.force(t)


@dataclass(frozen=True)
class Kinematics:
    t: float
    fs: float
    fc: float
    d: float
    d_dot: float
    d_ddot: float


def _segments(pulse: Pulse, a: float, b: float, period: float) -> list[tuple[float, float]]:
    lo, hi = pulse.support()
    a, b = max(a, lo), min(b, hi)
    if b <= a:
        return []
    cuts = {a, b}
    cuts.update(p for p in pulse.breakpoints() if a < p < b)
    n = int(np.ceil((b - a) / (SEGMENT_FRACTION * period)))
    cuts.update(np.linspace(a, b, n + 1)[1:-1])
    edges = sorted(cuts)
    return list(zip(edges[:-1], edges[1:]))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gauss_pieces(f, nodes) -> float:
    """24-point Gauss-Legendre on each interval between consecutive ``nodes``."""
    left, right = nodes[:-1, None], nodes[1:, None]
    half = 0.5 * (right - left)
    s = left + half * (_GL_NODES + 1.0)
    return float(np.sum(half * (f(s) @ _GL_WEIGHTS[:, None])))


def _table_pieces(pulse: TabulatedPulse, g, a: float, b: float) -> float:
    """Integral over [a, b] split at every table node, where F is linear."""
    nodes = np.concatenate(([a], pulse.times[(pulse.times > a) & (pulse.times < b)], [b]))
    return _gauss_pieces(lambda s: pulse.force(s) * g(s), nodes)


def integrate_weighted(pulse: Pulse, g, a: float, b: float, period: float) -> float:
    """``int_a^b F(tau) g(tau) dtau`` for a smooth weight ``g``."""
    if isinstance(pulse, ZeroPulse):
        return 0.0
    total = 0.0
    for lo, hi in _segments(pulse, a, b, period):
        if isinstance(pulse, TabulatedPulse):
            total += _table_pieces(pulse, g, lo, hi)
            continue
        if hi - lo < 1e-9 * period:
            mid = 0.5 * (lo + hi)
            total += (hi - lo) * float(pulse.force(mid)) * g(mid)
            continue
        value, err = integrate.quad(
            lambda s: pulse.force(s) * g(s), lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200
        )
        if not np.isfinite(value) or err > 1e-10:
            raise ArithmeticError(f"quadrature failed on [{lo}, {hi}]: error estimate {err:.2e}")
        total += value
    return total


def segment_weights(pulse: Pulse, params: OscillatorParams, a: float, b: float) -> tuple[float, float]:
    w = params.omega
    fs = integrate_weighted(pulse, lambda s: np.sin(w * s), a, b, params.period)
    fc = integrate_weighted(pulse, lambda s: np.cos(w * s), a, b, params.period)
    return fs, fc


def short_weights(pulse: Pulse, params: OscillatorParams, a: float, b: float) -> tuple[float, float]:
    """segment_weights for a sub-cycle interval inside one smooth piece of F.

    Fixed 24-point Gauss-Legendre is at machine precision there and far cheaper
    than adaptive quadrature when called from inside another integrand.
    """
    if not pulse.smooth:
        return segment_weights(pulse, params, a, b)
    half = 0.5 * (b - a)
    s = a + half * (_GL_NODES + 1.0)
    f = pulse.force(s) * _GL_WEIGHTS * half
    w = params.omega
    return float(np.dot(f, np.sin(w * s))), float(np.dot(f, np.cos(w * s)))


def fourier_weights(pulse: Pulse, params: OscillatorParams, t: float) -> tuple[float, float]:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if isinstance(pulse, ZeroPulse):
        return 0.0, 0.0
    return segment_weights(pulse, params, 0.0, float(t))


def fourier_weights_series(pulse: Pulse, params: OscillatorParams, times) -> tuple[np.ndarray, np.ndarray]:
    """fs, fc on a nondecreasing time mesh, accumulated interval by interval."""
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("times must be nondecreasing and >= 0")
    fs = np.zeros(times.shape)
    fc = np.zeros(times.shape)
    if isinstance(pulse, ZeroPulse):
        return fs, fc
    acc_s = acc_c = 0.0
    prev = 0.0
    for i, t in enumerate(times):
        ds, dc = segment_weights(pulse, params, prev, t)
        acc_s += ds
        acc_c += dc
        fs[i], fc[i] = acc_s, acc_c
        prev = t
    return fs, fc


def kinematics_from_weights(pulse: Pulse, params: OscillatorParams, t, fs, fc):
    """(d, d_dot, d_ddot) from the overlap integrals; works elementwise on arrays."""
    m, w = params.m, params.omega
    s, c = np.sin(w * t), np.cos(w * t)
    d = (s * fc - c * fs) / (m * w)
    d_dot = (c * fc + s * fs) / m
    d_ddot = pulse.force(t) / m - w**2 * d
    return d, d_dot, d_ddot


def kinematics_quadrature(pulse: Pulse, params: OscillatorParams, t: float) -> Kinematics:
    """Kinematics at ``t`` with d taken directly from the sine-convolution integral."""
    t = float(t)
    fs, fc = fourier_weights(pulse, params, t)
    m, w = params.m, params.omega
    d = integrate_weighted(pulse, lambda s: np.sin(w * (t - s)), 0.0, t, params.period) / (m * w)
    _, d_dot, _ = kinematics_from_weights(pulse, params, t, fs, fc)
    d_ddot = float(pulse.force(t)) / m - w**2 * d
    return Kinematics(t=t, fs=fs, fc=fc, d=d, d_dot=float(d_dot), d_ddot=d_ddot)


@dataclass(frozen=True)
class KinematicsSeries:
    t: np.ndarray
    fs: np.ndarray
    fc: np.ndarray
    d: np.ndarray
    d_dot: np.ndarray
    d_ddot: np.ndarray
    force: np.ndarray


def kinematics_series(pulse: Pulse, params: OscillatorParams, times) -> KinematicsSeries:
    times = np.asarray(times, dtype=float)
    fs, fc = fourier_weights_series(pulse, params, times)
    d, d_dot, d_ddot = kinematics_from_weights(pulse, params, times, fs, fc)
    return KinematicsSeries(times, fs, fc, d, d_dot, d_ddot, np.asarray(pulse.force(times), dtype=float))


def post_pulse_oscillation(pulse: Pulse, params: OscillatorParams) -> tuple[float, float]:
    """(A, B) with d(t) = A cos(wt) + B sin(wt) once the force has switched off."""
    _, end = pulse.support()
    if not np.isfinite(end):
        raise ValueError(f"{pulse.kind} pulse never switches off")
    fs, fc = fourier_weights(pulse, params, end)
    mw = params.m * params.omega
    return -fs / mw, fc / mw


def _check_window(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T * (1 + 1e-12)):
        raise ValueError("closed forms hold only for 0 <= t <= T")
    return t


def _check_denominator(value: float, scale: float, what: str) -> None:
    if abs(value) <= 1e-12 * scale:
        raise ZeroDivisionError(f"degenerate parameters: {what} vanishes")


def d_closed_nonresonant(F_m: float, Omega: float, T: float, params: OscillatorParams, t):
    """Closed-form d(t) for the sine-squared pulse with Omega != omega, 0 <= t <= T."""
    t = _check_window(t, T)
    m, w = params.m, params.omega
    lam = 2.0 * np.pi / T
    scale = max(w, Omega, lam) ** 2
    d0 = w**2 - Omega**2
    dm = w**2 - (lam - Omega) ** 2
    dp = w**2 - (lam + Omega) ** 2
    _check_denominator(d0, scale, "omega^2 - Omega^2 (resonant drive)")
    _check_denominator(dm, scale, "omega^2 - (Lambda - Omega)^2")
    _check_denominator(dp, scale, "omega^2 - (Lambda + Omega)^2")
    sw = np.sin(w * t)
    carrier = F_m / (2 * m * w * d0) * (w * np.sin(Omega * t) - Omega * sw)
    sidebands = (
        (lam - Omega) * sw / dm
        - (lam + Omega) * sw / dp
        - w * np.sin((lam - Omega) * t) / dm
        + w * np.sin((lam + Omega) * t) / dp
    )
    return (carrier - F_m / (4 * m * w) * sidebands)[()]


def d_closed_resonant(F_m: float, T: float, params: OscillatorParams, t, literal: bool = False):
    """Closed-form d(t) for the sine-squared pulse with Omega == omega, 0 <= t <= T.

    The upper sideband enters with a plus sign. ``literal=True`` flips it to the
    minus sign of the commonly printed form, which fails the d'' + w^2 d = F/m check.
    """
    t = _check_window(t, T)
    m, w = params.m, params.omega
    lam = 2.0 * np.pi / T
    _check_denominator(2 * w - lam, w, "2 omega - Lambda")
    sw = np.sin(w * t)
    upper_sign = -1.0 if literal else 1.0
    braces = (
        sw / w
        - t * np.cos(w * t)
        - 2 * w * sw / (4 * w**2 - lam**2)
        - w * np.sin((w - lam) * t) / (lam * (2 * w - lam))
        + upper_sign * w * np.sin((w + lam) * t) / (lam * (2 * w + lam))
    )
    return (F_m / (4 * m * w) * braces)[()]


def classical_residual(pulse: Pulse, params: OscillatorParams, d_fn, t: float) -> float:
    """|d'' + w^2 d - F/m| with d'' from a central difference of ``d_fn``."""
    h = 1e-4 * params.period
    d_minus, d0, d_plus = d_fn(t - h), d_fn(t), d_fn(t + h)
    d_ddot = (d_plus - 2.0 * d0 + d_minus) / h**2
    return float(abs(d_ddot + params.omega**2 * d0 - float(pulse.force(t)) / params.m))
