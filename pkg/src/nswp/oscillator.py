"""Units, Fourier grid, wave functions and harmonic-oscillator eigenstates.

All grids are periodic: ``x_j = x_min + j*dx`` for ``j = 0..n_points-1`` with
``x_max`` excluded, so momentum acts diagonally in the discrete Fourier basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EDGE_TOL = 1e-8
NORM_TOL = 1e-6


@dataclass(frozen=True)
class OscillatorParams:
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "hbar"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def energy(self, n: int) -> float:
        return (n + 0.5) * self.hbar * self.omega


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"empty domain: x_min={self.x_min} >= x_max={self.x_max}")
        n = self.n_points
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order, ``2*pi*j/L`` for signed integer j."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=1.0 / self.n_points) / self.length


def build_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    return Grid(float(x_min), float(x_max), int(n_points))


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(f"amplitude shape {amps.shape} does not match grid size {self.grid.n_points}")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.dx)

    def edge_amplitude(self) -> float:
        return float(max(abs(self.amps[0]), abs(self.amps[-1])))

    def translate(self, d: float) -> "WaveFunction":
        """Shift by ``d`` using the Fourier shift theorem (exact for band-limited states)."""
        phase = np.exp(-1j * self.grid.k * d)
        return WaveFunction(self.grid, np.fft.ifft(np.fft.fft(self.amps) * phase))


@dataclass(frozen=True)
class ObservableSet:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    norm: float

    @property
    def dx_unc(self) -> float:
        return float(np.sqrt(self.var_x))

    @property
    def dp_unc(self) -> float:
        return float(np.sqrt(self.var_p))

    @property
    def product(self) -> float:
        return self.dx_unc * self.dp_unc


def hermite_functions(n_max: int, x, params: OscillatorParams = OscillatorParams()) -> np.ndarray:
    """Normalized oscillator eigenfunctions Phi_0..Phi_n_max at positions ``x``.

    Uses the normalized three-term recurrence, which stays finite for large n
    where raw Hermite polynomials overflow. Returns shape ``(n_max + 1, len(x))``.
    """
    if n_max < 0:
        raise ValueError(f"quantum number must be >= 0, got {n_max}")
    x = np.asarray(x, dtype=float)
    alpha = params.m * params.omega / params.hbar
    xi = np.sqrt(alpha) * x
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = (alpha / np.pi) ** 0.25 * np.exp(-0.5 * xi**2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_function(n: int, x, params: OscillatorParams = OscillatorParams()) -> np.ndarray:
    return hermite_functions(n, x, params)[n]


def eigenstate(n: int, params: OscillatorParams, grid: Grid) -> WaveFunction:
    if n < 0:
        raise ValueError(f"quantum number must be >= 0, got {n}")
    psi = WaveFunction(grid, hermite_function(n, grid.x, params))
    if psi.edge_amplitude() >= EDGE_TOL:
        raise ValueError(
            f"grid [{grid.x_min}, {grid.x_max}) too narrow for n={n}: "
            f"edge amplitude {psi.edge_amplitude():.3e}"
        )
    return psi


def _check_same_grid(a: WaveFunction, b: WaveFunction) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    _check_same_grid(a, b)
    return complex(np.vdot(a.amps, b.amps) * a.grid.dx)


def l2_distance(a: WaveFunction, b: WaveFunction) -> float:
    _check_same_grid(a, b)
    return float(np.sqrt(np.sum(np.abs(a.amps - b.amps) ** 2) * a.grid.dx))


def momentum_action(amps: np.ndarray, grid: Grid, hbar: float, power: int = 1) -> np.ndarray:
    """Apply ``p**power`` spectrally, p = -i hbar d/dx."""
    return np.fft.ifft((hbar * grid.k) ** power * np.fft.fft(amps))


def observables(psi: WaveFunction, params: OscillatorParams) -> ObservableSet:
    norm = psi.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state not normalized: norm = {norm!r}")
    grid = psi.grid
    x = grid.x
    rho = np.abs(psi.amps) ** 2 * grid.dx
    mean_x = float(np.sum(rho * x))
    mean_x2 = float(np.sum(rho * x**2))
    # Parseval: sum |psi_j|^2 dx == sum |fft_k|^2 dx / N
    weights = np.abs(np.fft.fft(psi.amps)) ** 2 * grid.dx / grid.n_points
    hk = params.hbar * grid.k
    mean_p = float(np.sum(weights * hk))
    mean_p2 = float(np.sum(weights * hk**2))
    return ObservableSet(
        mean_x=mean_x,
        mean_p=mean_p,
        var_x=max(mean_x2 - mean_x**2, 0.0),
        var_p=max(mean_p2 - mean_p**2, 0.0),
        norm=norm,
    )


def peak_position(psi: WaveFunction) -> float:
    """Position of max |psi|^2, refined by a parabola through the three nearest samples."""
    rho = np.abs(psi.amps) ** 2
    j = int(np.argmax(rho))  # argmax returns the lowest index on ties
    if j == 0 or j == len(rho) - 1:
        raise ValueError("probability maximum on the grid boundary; domain too small")
    left, mid, right = rho[j - 1], rho[j], rho[j + 1]
    curvature = left - 2.0 * mid + right
    offset = 0.0 if curvature == 0 else 0.5 * (left - right) / curvature
    return float(psi.grid.x[j] + offset * psi.grid.dx)
