"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line.

Tolerances are the contract values; the detail string records the measured
figure so the terminal summary doubles as a report.
"""
import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LOG, CYCLE, SNAPSHOT_CYCLES
from nswp.algebra import PhaseSpacePolynomial, build_hamiltonian, decompose, heisenberg_xt_pt, matrix_oracle_heisenberg
from nswp.exact import (
    ExactState,
    PhaseMode,
    eigen_residual,
    exact_psi,
    exact_series,
    occupation_distribution,
    schrodinger_residual,
)
from nswp.oscillator import build_grid, eigenstate, l2_distance, observables
from nswp.propagate import PropagationConfig, propagate
from nswp.pulse import (
    ZeroPulse,
    d_closed_nonresonant,
    d_closed_resonant,
    kinematics_quadrature,
    kinematics_series,
    post_pulse_oscillation,
)

SEED = 20261019


def check(name, passed, detail):
    ACCEPTANCE_LOG.append((name, bool(passed), detail))
    assert passed, f"{name}: {detail}"


def test_c01_heisenberg_oracle(params, fig1_pulse):
    t = CYCLE
    oracle = matrix_oracle_heisenberg(fig1_pulse, params, build_grid(-10, 10, 64), t, n_steps=10_000)
    x_t, p_t = heisenberg_xt_pt(fig1_pulse, params, t)
    err = max(oracle.x_t.max_abs_diff(x_t), oracle.p_t.max_abs_diff(p_t))
    check(
        "1 Heisenberg-map oracle",
        err < 1e-3 and oracle.residual < 1e-3,
        f"max coeff error {err:.2e} (tol 1e-3), fit residual {oracle.residual:.2e} (tol 1e-3)",
    )


def test_c02_decomposition_exact(params, fig1_pulse, fig2_pulse):
    rng = np.random.default_rng(SEED)
    worst, quadratic_nonzero = 0.0, 0
    for pulse in (fig1_pulse, fig2_pulse):
        for t in rng.uniform(0, 12 * CYCLE, 50):
            h_tilde, h_c = decompose(pulse, params, t)
            rest = build_hamiltonian(pulse, params, t) - h_tilde - h_c
            worst = max(worst, rest.max_abs_diff(PhaseSpacePolynomial()))
            quadratic_nonzero += sum(c != 0 for c in (h_c.cxx, h_c.cpp, h_c.cxp))
    check(
        "2 decomposition exactness",
        worst <= 1e-12 and quadratic_nonzero == 0,
        f"max |H - Ht - Hc| {worst:.2e} (tol 1e-12), nonzero quadratic coefficients {quadratic_nonzero}",
    )


def test_c03_eigen_persistence(params, grid, wide_grid, fig1_pulse, fig2_pulse):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for pulse, g in ((fig1_pulse, grid), (fig2_pulse, wide_grid)):
        for n in (0, 2):
            state = ExactState(n, pulse, params)
            for t in np.sort(rng.uniform(0, 12 * CYCLE, 10)):
                worst = max(worst, eigen_residual(state, t, g))
    check("3 eigenvalue persistence", worst < 1e-5, f"max residual {worst:.2e} (tol 1e-5)")


@pytest.mark.parametrize("name,tol", [("fig1", 1e-4), ("fig2", 1e-3)])
def test_c04_exact_vs_numeric(request, params, name, tol):
    run = request.getfixturevalue(f"{name}_run")
    state = ExactState(0, run.pulse, params)
    dists = {c: l2_distance(run.snapshots[c], exact_psi(state, c * CYCLE, run.grid)) for c in SNAPSHOT_CYCLES}
    text = ", ".join(f"{c} cycles {d:.2e}" for c, d in dists.items())
    check(f"4 exact vs numeric ({name})", max(dists.values()) < tol, f"L2 {text} (tol {tol:.0e})")


@pytest.mark.parametrize("name", ["fig1", "fig2"])
def test_c04_norm_drift(request, name):
    run = request.getfixturevalue(f"{name}_run")
    drift = float(np.max(np.abs(run.numeric["norm"] - 1.0)))
    check(f"4b split-operator norm drift ({name})", drift < 1e-8, f"max |norm - 1| {drift:.2e} (tol 1e-8)")


@pytest.mark.parametrize("name", ["fig1", "fig2"])
def test_c05_nonspreading_min_uncertainty(request, name):
    run = request.getfixturevalue(f"{name}_run")
    spread = float(np.ptp(run.exact["dx"]))
    product = float(np.max(np.abs(run.numeric["dxdp"] - 0.5)))
    check(
        f"5 nonspreading + min uncertainty ({name})",
        spread <= 1e-9 and product <= 5e-4,
        f"exact dx spread {spread:.2e} (tol 1e-9), numeric max |dxdp - 0.5| {product:.2e} (tol 5e-4)",
    )


@pytest.mark.parametrize("name", ["fig1", "fig2"])
def test_c06_trajectory(request, params, name):
    run = request.getfixturevalue(f"{name}_run")
    d = run.numeric["d_ref"]
    numeric = float(np.max(np.abs(run.numeric["mean_x"] - d)))
    exact = float(np.max(np.abs(run.exact["mean_x"] - d)))
    tol = 2 * run.grid.dx
    passed = numeric <= tol and exact <= 1e-8
    detail = f"numeric {numeric:.2e} (tol 2dx={tol:.3g}), exact {exact:.2e} (tol 1e-8)"
    if name == "fig2":
        A, B = post_pulse_oscillation(run.pulse, params)
        t = run.numeric["t"]
        after = t >= run.pulse.T
        free = A * np.cos(params.omega * t[after]) + B * np.sin(params.omega * t[after])
        post_num = float(np.max(np.abs(run.numeric["mean_x"][after] - free)))
        post_exact = float(np.max(np.abs(run.exact["mean_x"][after] - free)))
        excursion = float(np.max(np.abs(run.numeric["mean_x"])))
        passed = passed and post_num <= tol and post_exact <= 1e-8 and excursion > 1.0
        detail += (
            f"; post-pulse vs free oscillation numeric {post_num:.2e}, exact {post_exact:.2e};"
            f" max |<x>| {excursion:.2f} (> 1)"
        )
    check(f"6 trajectory ({name})", passed, detail)


def test_c07_closed_forms(params, fig1_pulse, fig2_pulse):
    T = fig1_pulse.T
    mesh = np.linspace(0, T, 200)
    quad1 = np.array([kinematics_quadrature(fig1_pulse, params, t).d for t in mesh])
    quad2 = np.array([kinematics_quadrature(fig2_pulse, params, t).d for t in mesh])
    err1 = float(np.max(np.abs(d_closed_nonresonant(1.0, 0.5, T, params, mesh) - quad1)))
    err2 = float(np.max(np.abs(d_closed_resonant(1.0, T, params, mesh) - quad2)))
    literal = float(np.max(np.abs(d_closed_resonant(1.0, T, params, mesh, literal=True) - quad2)))
    # late-time dominance of the secular term over the last cycle of the pulse
    late = np.linspace(T - CYCLE, T, 400)
    d_late = kinematics_series(fig2_pulse, params, late).d
    secular = -1.0 * late * np.cos(params.omega * late) / (4 * params.m * params.omega)
    ratio = float(np.linalg.norm(d_late - secular) / np.linalg.norm(secular))
    passed = err1 <= 1e-8 and err2 <= 1e-8 and ratio < 0.5
    check(
        "7 closed-form d(t)",
        passed,
        f"nonresonant {err1:.2e}, resonant (corrected sign) {err2:.2e} (tol 1e-8);"
        f" literal resonant form off by {literal:.2f}; last-cycle |d - t cos| / |t cos| = {ratio:.3f}",
    )


def test_c08_schroedinger_residual(params, grid, fig1_pulse):
    times = np.linspace(0.05, 12, 20) * CYCLE
    validated = ExactState(0, fig1_pulse, params)
    literal = ExactState(0, fig1_pulse, params, PhaseMode.PAPER_LITERAL)
    worst = max(schrodinger_residual(validated, t, grid) for t in times)
    lit = max(schrodinger_residual(literal, t, grid) for t in times)
    check(
        "8 Schroedinger residual",
        worst < 1e-5,
        f"validated max {worst:.2e} (tol 1e-5); literal phase max {lit:.2e} (reported)",
    )


def _second_derivative(y, h):
    """Five-point centered stencil on interior points."""
    return (-y[4:] + 16 * y[3:-1] - 30 * y[2:-2] + 16 * y[1:-3] - y[:-4]) / (12 * h**2)


def test_c09_ehrenfest_and_energy(params, grid, fig1_run, fig2_run):
    worst = 0.0
    for run in (fig1_run, fig2_run):
        t = run.numeric["t"]
        h = t[1] - t[0]
        accel_fd = params.m * _second_derivative(run.numeric["mean_x"], h)
        # skip stencils that straddle the kink in F'(t) at t = T
        keep = np.abs(t[2:-2] - run.pulse.T) > 2.5 * h
        worst = max(worst, float(np.max(np.abs(accel_fd - run.numeric["accel"][2:-2])[keep])))

    cfg = PropagationConfig(grid, dt=CYCLE / 2000, t_end=2 * CYCLE, record_stride=20)
    zero_drift = 0.0
    for n in (0, 2):
        series, _ = propagate(eigenstate(n, params, grid), ZeroPulse(), params, cfg)
        zero_drift = max(zero_drift, float(np.ptp(series["energy"])))

    t = fig2_run.numeric["t"]
    energy = fig2_run.numeric["energy"]
    after = t > fig2_run.pulse.T
    growth = float(energy[np.argmin(np.abs(t - fig2_run.pulse.T))] - energy[0])
    accel_after = fig2_run.numeric["accel"][after]
    sign_changes = int(np.sum(np.diff(np.sign(accel_after)) != 0))
    post_energy_spread = float(np.ptp(energy[after]))
    passed = worst <= 1e-3 and zero_drift <= 1e-9 and growth > 100 and sign_changes >= 3
    check(
        "9 Ehrenfest and energy",
        passed,
        f"max |m x'' - (F - m w^2 <x>)| {worst:.2e} (tol 1e-3); zero-pulse energy spread {zero_drift:.2e} (tol 1e-9);"
        f" fig2 energy gain {growth:.1f}; post-pulse acceleration sign changes {sign_changes};"
        f" post-pulse energy spread {post_energy_spread:.1e} (H is static once F = 0)",
    )


def test_c10_poisson_occupation(params, wide_grid, fig2_pulse, fig2_run):
    t = 11 * CYCLE
    k = kinematics_quadrature(fig2_pulse, params, t)
    lam = (params.m * params.omega * k.d**2 + params.m * k.d_dot**2 / params.omega) / (2 * params.hbar)
    n_max = int(lam + 12 * np.sqrt(lam) + 20)
    occ = occupation_distribution(exact_psi(ExactState(0, fig2_pulse, params), t, wide_grid), params, n_max)
    poisson = stats.poisson.pmf(np.arange(n_max + 1), lam)
    err = float(np.max(np.abs(occ.probabilities - poisson)))
    # the propagated state at the end of the run, for information
    t_end = fig2_run.numeric["t"][-1]
    k_end = kinematics_quadrature(fig2_pulse, params, t_end)
    lam_end = (params.m * params.omega * k_end.d**2 + params.m * k_end.d_dot**2 / params.omega) / (2 * params.hbar)
    occ_num = occupation_distribution(fig2_run.final, params, n_max)
    err_num = float(np.max(np.abs(occ_num.probabilities - stats.poisson.pmf(np.arange(n_max + 1), lam_end))))
    check(
        "10 Poisson occupation",
        err <= 1e-4,
        f"lambda {lam:.4f}, n_max {n_max}, max |P_n - Poisson| {err:.2e} (tol 1e-4);"
        f" propagated state at {t_end / CYCLE:.0f} cycles {err_num:.2e} (reported)",
    )
