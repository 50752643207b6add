"""Operator polynomials of degree <= 2 in (x, p) with [x, p] = i hbar.

A polynomial is stored in the Weyl-symmetrized basis

    A = c1 + cx x + cp p + cxx x^2 + cpp p^2 + cxp (xp + px)/2

so Hermiticity is simply "all coefficients real". Coefficients may be any ring
elements (complex numbers, or sympy expressions for the exact decomposition).
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np
from scipy import linalg

from .oscillator import EDGE_TOL, Grid, OscillatorParams, WaveFunction, hermite_functions, momentum_action
from .pulse import Pulse, fourier_weights, kinematics_from_weights

COEFFS = ("c1", "cx", "cp", "cxx", "cpp", "cxp")


@dataclass(frozen=True)
class PhaseSpacePolynomial:
    c1: complex = 0
    cx: complex = 0
    cp: complex = 0
    cxx: complex = 0
    cpp: complex = 0
    cxp: complex = 0

    def coefficients(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def map(self, fn) -> "PhaseSpacePolynomial":
        return PhaseSpacePolynomial(*(fn(c) for c in self.coefficients()))

    def __add__(self, other):
        if not isinstance(other, PhaseSpacePolynomial):
            other = PhaseSpacePolynomial(c1=other)
        return PhaseSpacePolynomial(*(a + b for a, b in zip(self.coefficients(), other.coefficients())))

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, PhaseSpacePolynomial):
            raise TypeError("use multiply() for operator products; it needs hbar")
        return self.map(lambda c: c * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.map(lambda c: c / scalar)

    @property
    def degree(self) -> int:
        if any(c != 0 for c in (self.cxx, self.cpp, self.cxp)):
            return 2
        if self.cx != 0 or self.cp != 0:
            return 1
        return 0

    def is_hermitian(self) -> bool:
        return all(np.imag(complex(c)) == 0 for c in self.coefficients())

    def to_complex(self) -> "PhaseSpacePolynomial":
        return self.map(complex)

    def max_abs_diff(self, other: "PhaseSpacePolynomial") -> float:
        return max(abs(complex(a) - complex(b)) for a, b in zip(self.coefficients(), other.coefficients()))


IDENTITY = PhaseSpacePolynomial(c1=1)
X = PhaseSpacePolynomial(cx=1)
P = PhaseSpacePolynomial(cp=1)


def multiply(a: PhaseSpacePolynomial, b: PhaseSpacePolynomial, hbar) -> PhaseSpacePolynomial:
    """Operator product a*b reduced to the symmetrized basis.

    Uses xp = sym(xp) + i hbar/2 and px = sym(xp) - i hbar/2.
    """
    if a.degree + b.degree > 2:
        raise ValueError(f"product degree {a.degree + b.degree} exceeds 2")
    if a.degree == 0:
        return b * a.c1
    if b.degree == 0:
        return a * b.c1
    # both are linear: (a0 + a1 x + a2 p)(b0 + b1 x + b2 p)
    a0, a1, a2 = a.c1, a.cx, a.cp
    b0, b1, b2 = b.c1, b.cx, b.cp
    return PhaseSpacePolynomial(
        c1=a0 * b0 + 1j * hbar / 2 * (a1 * b2 - a2 * b1),
        cx=a0 * b1 + b0 * a1,
        cp=a0 * b2 + b0 * a2,
        cxx=a1 * b1,
        cpp=a2 * b2,
        cxp=a1 * b2 + a2 * b1,
    )


def commutator(a: PhaseSpacePolynomial, b: PhaseSpacePolynomial, hbar) -> PhaseSpacePolynomial:
    return multiply(a, b, hbar) - multiply(b, a, hbar)


def _heisenberg(params: OscillatorParams, t: float, fs: float, fc: float):
    m, w = params.m, params.omega
    s, c = np.sin(w * t), np.cos(w * t)
    x_t = PhaseSpacePolynomial(c1=fs / (m * w), cx=c, cp=-s / (m * w))
    p_t = PhaseSpacePolynomial(c1=-fc, cx=m * w * s, cp=c)
    return x_t, p_t


def heisenberg_xt_pt(pulse: Pulse, params: OscillatorParams, t: float):
    """x_t = U x U^-1 and p_t = U p U^-1 for the driven oscillator."""
    if t == 0:
        return X, P
    fs, fc = fourier_weights(pulse, params, t)
    return _heisenberg(params, t, fs, fc)


def sho_hamiltonian(params: OscillatorParams) -> PhaseSpacePolynomial:
    return PhaseSpacePolynomial(cpp=1 / (2 * params.m), cxx=params.m * params.omega**2 / 2)


def build_hamiltonian(pulse: Pulse, params: OscillatorParams, t: float) -> PhaseSpacePolynomial:
    return sho_hamiltonian(params) + PhaseSpacePolynomial(cx=-float(pulse.force(t)))


def _h_tilde_from(x_t, p_t, params: OscillatorParams, hbar):
    m, w = params.m, params.omega
    return multiply(p_t, p_t, hbar) / (2 * m) + multiply(x_t, x_t, hbar) * (m * w**2 / 2)


def build_h_tilde(pulse: Pulse, params: OscillatorParams, t: float) -> PhaseSpacePolynomial:
    """State-preserving operator p_t^2/2m + m w^2 x_t^2 / 2, by squaring x_t and p_t."""
    x_t, p_t = heisenberg_xt_pt(pulse, params, t)
    return _h_tilde_from(x_t, p_t, params, params.hbar)


def h_tilde_closed_form(pulse: Pulse, params: OscillatorParams, t: float) -> PhaseSpacePolynomial:
    """p^2/2m + m w^2 x^2/2 - d_dot p + (m d_ddot - F) x + (fc^2 + fs^2)/2m."""
    fs, fc = fourier_weights(pulse, params, t)
    _, d_dot, d_ddot = kinematics_from_weights(pulse, params, t, fs, fc)
    m, force = params.m, float(pulse.force(t))
    return sho_hamiltonian(params) + PhaseSpacePolynomial(
        c1=(fc**2 + fs**2) / (2 * m), cx=m * d_ddot - force, cp=-d_dot
    )


def h_c_closed_form(pulse: Pulse, params: OscillatorParams, t: float) -> PhaseSpacePolynomial:
    """d_dot p - m d_ddot x - (fc^2 + fs^2)/2m."""
    fs, fc = fourier_weights(pulse, params, t)
    _, d_dot, d_ddot = kinematics_from_weights(pulse, params, t, fs, fc)
    m = params.m
    return PhaseSpacePolynomial(c1=-(fc**2 + fs**2) / (2 * m), cx=-m * d_ddot, cp=d_dot)


@lru_cache(maxsize=1)
def _symbolic_state_changing():
    """H - H_tilde derived once with symbolic coefficients.

    The rotation enters only through s = sin(wt), c = cos(wt); reducing modulo
    s^2 + c^2 = 1 makes the quadratic cancellation structural rather than
    numerical. Returns one callable (or exact 0) per coefficient.
    """
    import sympy as sp

    m, w, hb, s, c, fs, fc, F = sp.symbols("m omega hbar s c fs fc F", real=True)
    x_t = PhaseSpacePolynomial(c1=fs / (m * w), cx=c, cp=-s / (m * w))
    p_t = PhaseSpacePolynomial(c1=-fc, cx=m * w * s, cp=c)
    h = PhaseSpacePolynomial(cpp=1 / (2 * m), cxx=m * w**2 / 2, cx=-F)
    h_tilde = multiply(p_t, p_t, hb) / (2 * m) + multiply(x_t, x_t, hb) * (m * w**2 / 2)
    out = []
    for coeff in (h - h_tilde).coefficients():
        reduced = sp.expand(sp.expand(coeff).subs(s**2, 1 - c**2))
        reduced = sp.simplify(reduced)
        if reduced == 0:
            out.append(0.0)
        else:
            out.append(sp.lambdify((m, w, hb, s, c, fs, fc, F), reduced, "numpy"))
    return tuple(out)


def decompose(pulse: Pulse, params: OscillatorParams, t: float):
    """Split H(t) into (H_tilde, H_c); H_c's quadratic coefficients are exact zeros."""
    fs, fc = fourier_weights(pulse, params, t) if t != 0 else (0.0, 0.0)
    return decompose_from_weights(pulse, params, t, fs, fc)


def decompose_from_weights(pulse: Pulse, params: OscillatorParams, t: float, fs: float, fc: float):
    """``decompose`` with precomputed overlap integrals fs(t), fc(t)."""
    x_t, p_t = (X, P) if t == 0 else _heisenberg(params, t, fs, fc)
    h_tilde = _h_tilde_from(x_t, p_t, params, params.hbar)
    w = params.omega
    args = (params.m, w, params.hbar, np.sin(w * t), np.cos(w * t), fs, fc, float(pulse.force(t)))
    coeffs = [c if isinstance(c, float) else complex(c(*args)) for c in _symbolic_state_changing()]
    return h_tilde, PhaseSpacePolynomial(*coeffs)


def apply_operator(a: PhaseSpacePolynomial, psi: WaveFunction, params: OscillatorParams) -> WaveFunction:
    """Act with ``a`` on a grid state; x pointwise, p spectrally."""
    if psi.edge_amplitude() >= EDGE_TOL:
        raise ValueError(f"edge amplitude {psi.edge_amplitude():.2e} too large for spectral operators")
    grid, hbar = psi.grid, params.hbar
    x = grid.x
    u = psi.amps
    pu = momentum_action(u, grid, hbar)
    out = a.c1 * u + a.cx * x * u + a.cp * pu + a.cxx * x**2 * u
    if a.cpp != 0:
        out = out + a.cpp * momentum_action(u, grid, hbar, power=2)
    if a.cxp != 0:
        out = out + a.cxp * 0.5 * (x * pu + momentum_action(x * u, grid, hbar))
    return WaveFunction(grid, out)


@dataclass(frozen=True)
class OracleResult:
    x_t: PhaseSpacePolynomial
    p_t: PhaseSpacePolynomial
    residual: float


def grid_matrices(grid: Grid, params: OscillatorParams):
    """Dense position, momentum and free SHO Hamiltonian matrices on ``grid``."""
    n = grid.n_points
    x = grid.x
    hk = params.hbar * grid.k
    fourier = np.fft.fft(np.eye(n), axis=0)
    inverse = np.fft.ifft(np.eye(n), axis=0)
    p_mat = inverse @ np.diag(hk) @ fourier
    kinetic = inverse @ np.diag(hk**2 / (2 * params.m)) @ fourier
    h0 = kinetic + np.diag(0.5 * params.m * params.omega**2 * x**2)
    p_mat = 0.5 * (p_mat + p_mat.conj().T)
    h0 = 0.5 * (h0 + h0.conj().T)
    return np.diag(x).astype(complex), p_mat, h0


def _step_exponential(h: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    evals, evecs = linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * dt / hbar)) @ evecs.conj().T


def evolution_operator(pulse: Pulse, params: OscillatorParams, grid: Grid, t: float, n_steps: int) -> np.ndarray:
    """Time-ordered product of per-slice exponentials, latest slice leftmost.

    Slice i uses H at its midpoint (i + 1/2) dt.
    """
    xm, _, h0 = grid_matrices(grid, params)
    dt = t / n_steps
    u = np.eye(grid.n_points, dtype=complex)
    cached = None
    for i in range(n_steps):
        force = float(pulse.force((i + 0.5) * dt))
        if force == 0.0:
            if cached is None:
                cached = _step_exponential(h0, dt, params.hbar)
            step = cached
        else:
            step = _step_exponential(h0 - force * xm, dt, params.hbar)
        u = step @ u
    return u


def _fit_linear(target, basis, rows):
    """Least-squares coefficients of ``target`` in ``basis`` restricted to ``rows``."""
    design = np.stack([b[rows].ravel() for b in basis], axis=1)
    rhs = target[rows].ravel()
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    resid = np.linalg.norm(design @ coef - rhs) / np.linalg.norm(rhs)
    return coef, float(resid)


def matrix_oracle_heisenberg(
    pulse: Pulse,
    params: OscillatorParams,
    grid: Grid,
    t: float,
    n_steps: int = 10_000,
    n_probe: int = 6,
    max_residual: float = 1e-3,
) -> OracleResult:
    """Independent estimate of x_t, p_t from dense matrices.

    Forms U by the slice product, then fits U x U^dag and U p U^dag in the basis
    {1, x, p}. The fit uses the action on the ``n_probe`` lowest oscillator
    states, sampled on the central half of the grid, where the periodic grid
    represents x and p faithfully.
    """
    if grid.n_points > 128:
        raise ValueError("matrix oracle is limited to grids of at most 128 points")
    if t == 0:
        return OracleResult(X, P, 0.0)
    if n_steps < 1000:
        raise ValueError("matrix oracle needs at least 1000 time slices")
    u = evolution_operator(pulse, params, grid, t, n_steps)
    xm, pm, _ = grid_matrices(grid, params)
    probes = hermite_functions(n_probe - 1, grid.x, params).T.astype(complex)
    n = grid.n_points
    rows = slice(n // 4, 3 * n // 4)
    basis = [probes, xm @ probes, pm @ probes]
    results = []
    worst = 0.0
    for op in (xm, pm):
        target = u @ op @ u.conj().T @ probes
        (c1, cx, cp), resid = _fit_linear(target, basis, rows)
        worst = max(worst, resid)
        results.append(PhaseSpacePolynomial(c1=c1, cx=cx, cp=cp))
    if worst > max_residual:
        raise ArithmeticError(f"oracle fit residual {worst:.2e} exceeds {max_residual:.0e}")
    return OracleResult(results[0], results[1], worst)

