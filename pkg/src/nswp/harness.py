"""Run orchestration, comparison reports and tabular exports."""
from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .algebra import build_hamiltonian, decompose_from_weights
from .config import ExperimentConfig
from .exact import ExactState, PhaseMode, exact_series
from .io import (
    WAVEFUNCTION_COLUMNS,
    read_table,
    write_table,
    write_timeseries,
    write_wavefunction,
)
from .oscillator import EDGE_TOL, OscillatorParams, eigenstate
from .propagate import TimeSeries, propagate, record_state
from .pulse import (
    QUAD_TOL,
    Pulse,
    SineSquaredPulse,
    d_closed_nonresonant,
    d_closed_resonant,
    kinematics_quadrature,
    kinematics_series,
)

D_REFERENCE_COLUMNS = ("t", "force", "fs", "fc", "d_quad", "d_dot", "d_ddot", "d_closed", "d_closed_literal")
DECOMPOSITION_COLUMNS = ("t", "c1", "cx", "cp", "cxx", "cpp", "cxp", "linear", "d_dot", "m_d_ddot")
PULSE_TABLE_COLUMNS = ("t", "force", "fs", "fc", "d")


@dataclass
class RunResult:
    out_dir: Path
    numeric: TimeSeries
    exact: TimeSeries
    files: dict = field(default_factory=dict)


def closed_form_d(pulse: Pulse, params: OscillatorParams, times, literal: bool = False) -> np.ndarray:
    """Closed-form d(t) inside a sine-squared pulse; NaN where no closed form applies."""
    times = np.asarray(times, dtype=float)
    out = np.full(times.shape, np.nan)
    if not isinstance(pulse, SineSquaredPulse):
        return out
    inside = (times >= 0) & (times <= pulse.T)
    resonant = np.isclose(pulse.Omega, params.omega, rtol=1e-12, atol=0.0)
    try:
        if resonant:
            out[inside] = d_closed_resonant(pulse.F_m, pulse.T, params, times[inside], literal=literal)
        else:
            out[inside] = d_closed_nonresonant(pulse.F_m, pulse.Omega, pulse.T, params, times[inside])
    except ZeroDivisionError:
        pass
    return out


def d_reference_rows(pulse: Pulse, params: OscillatorParams, times):
    ks = kinematics_series(pulse, params, times)
    closed = closed_form_d(pulse, params, times)
    literal = closed_form_d(pulse, params, times, literal=True)
    return zip(ks.t, ks.force, ks.fs, ks.fc, ks.d, ks.d_dot, ks.d_ddot, closed, literal)


def decomposition_rows(pulse: Pulse, params: OscillatorParams, times):
    ks = kinematics_series(pulse, params, times)
    for i, t in enumerate(ks.t):
        _, h_c = decompose_from_weights(pulse, params, t, ks.fs[i], ks.fc[i])
        c = [complex(v).real for v in h_c.coefficients()]
        linear = h_c.cxx == 0 and h_c.cpp == 0 and h_c.cxp == 0
        yield (t, *c, linear, ks.d_dot[i], params.m * ks.d_ddot[i])


def _exact_timeseries(state: ExactState, times, grid) -> tuple[TimeSeries, list]:
    series = TimeSeries()
    states = exact_series(state, times, grid)
    d = kinematics_series(state.pulse, state.params, times).d
    for t, psi, d_t in zip(times, states, d):
        record_state(series, psi, state.pulse, state.params, t, d_t)
    return series, states


def run_meta(config: ExperimentConfig, prop, pulse: Pulse) -> dict:
    return {
        "config": config.to_flat(),
        "resolved": {
            "dt": prop.step,
            "n_steps": prop.n_steps,
            "t_end": prop.t_end,
            "record_stride": prop.record_stride,
            "grid_dx": prop.grid.dx,
            "pulse": repr(pulse),
        },
        "tolerances": {
            "edge_amplitude": EDGE_TOL,
            "force_quadrature": QUAD_TOL,
            "adaptive_rtol": prop.rtol,
            "adaptive_atol": prop.atol,
        },
        "conventions": {
            "units": "m, omega, hbar as given in params (defaults 1); times in the same units",
            "cycle": "2 pi / omega",
            "phase_mode": PhaseMode.RESIDUAL_VALIDATED.value,
            "grid_settings": "chosen for reproducibility of the qualitative features, not taken from a source",
        },
        "versions": {
            "nswp": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }


def run_experiment(config: ExperimentConfig, out_dir=None) -> RunResult:
    """Propagate numerically, evaluate the exact solution on the same mesh, write all artifacts."""
    config.validate()
    params = config.params
    grid = config.grid.build()
    pulse = config.pulse.build(params)
    prop = config.prop.build(grid, params)
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    psi0 = eigenstate(config.n, params, grid)
    numeric, psi_num = propagate(psi0, pulse, params, prop)
    times = numeric["t"]
    exact, states = _exact_timeseries(ExactState(config.n, pulse, params), times, grid)

    files = {
        "timeseries_numeric": write_timeseries(numeric, out / "timeseries_numeric.csv"),
        "timeseries_exact": write_timeseries(exact, out / "timeseries_exact.csv"),
        "psi_final_numeric": write_wavefunction(psi_num, out / "psi_final_numeric.csv"),
        "psi_final_exact": write_wavefunction(states[-1], out / "psi_final_exact.csv"),
        "d_reference": write_table(out / "d_reference.csv", D_REFERENCE_COLUMNS, d_reference_rows(pulse, params, times)),
        "decomposition": write_table(
            out / "decomposition.csv", DECOMPOSITION_COLUMNS, decomposition_rows(pulse, params, times)
        ),
    }
    meta_path = out / "run_meta.json"
    meta_path.write_text(json.dumps(run_meta(config, prop, pulse), indent=2, sort_keys=True) + "\n")
    files["run_meta"] = meta_path
    return RunResult(out, numeric, exact, files)


def decompose_report(config: ExperimentConfig, times) -> list[dict]:
    """Coefficients of H, H_tilde and H_c at each time, with kinematic cross-checks."""
    params = config.params
    pulse = config.pulse.build(params)
    times = np.sort(np.asarray(times, dtype=float))
    ks = kinematics_series(pulse, params, times)
    rows = []
    names = ("c1", "cx", "cp", "cxx", "cpp", "cxp")
    for i, t in enumerate(times):
        h = build_hamiltonian(pulse, params, t)
        h_tilde, h_c = decompose_from_weights(pulse, params, t, ks.fs[i], ks.fc[i])
        quad = kinematics_quadrature(pulse, params, t)
        row = {"t": t}
        for label, poly in (("H", h), ("Ht", h_tilde), ("Hc", h_c)):
            row.update({f"{label}_{n}": complex(v).real for n, v in zip(names, poly.coefficients())})
        row["linear"] = h_c.cxx == 0 and h_c.cpp == 0 and h_c.cxp == 0
        row["d_dot_quad"] = quad.d_dot
        row["m_d_ddot_quad"] = params.m * quad.d_ddot
        rows.append(row)
    return rows


def pulse_table(config: ExperimentConfig, times):
    params = config.params
    pulse = config.pulse.build(params)
    ks = kinematics_series(pulse, params, times)
    return zip(ks.t, ks.force, ks.fs, ks.fc, ks.d)


class CompareError(ValueError):
    """Inputs cannot be compared (schema or mesh mismatch)."""


@dataclass
class FileComparison:
    name: str
    columns: dict
    passed: bool


@dataclass
class CompareReport:
    files: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "files": [{"name": f.name, "passed": f.passed, "columns": f.columns} for f in self.files],
        }

    def summary(self) -> str:
        lines = []
        for f in self.files:
            lines.append(f"{'PASS' if f.passed else 'FAIL'}  {f.name}")
            for col, stats in f.columns.items():
                mark = "ok " if stats["passed"] else "BAD"
                lines.append(
                    f"  {mark} {col:<10} max_abs={stats['max_abs']:.3e} rms={stats['rms']:.3e} tol={stats['tol']:.1e}"
                )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _tolerance(tolerances: dict, column: str, default: float) -> float:
    return float(tolerances.get(column, default))


def compare_files(path_a, path_b, default_tol: float = 1e-6, tolerances: dict | None = None) -> FileComparison:
    tolerances = tolerances or {}
    header_a, a = read_table(path_a)
    header_b, b = read_table(path_b)
    if header_a != header_b:
        raise CompareError(f"schema mismatch: {header_a} vs {header_b}")
    mesh = header_a[0]
    if len(a[mesh]) != len(b[mesh]) or not np.allclose(a[mesh], b[mesh], rtol=0, atol=1e-9):
        raise CompareError(f"{mesh} mesh mismatch between {path_a} and {path_b}")
    columns = {}
    if tuple(header_a) == WAVEFUNCTION_COLUMNS:
        diff = (a["re"] - b["re"]) + 1j * (a["im"] - b["im"])
        dx = float(a["x"][1] - a["x"][0])
        l2 = float(np.sqrt(np.sum(np.abs(diff) ** 2) * dx))
        tol = _tolerance(tolerances, "l2", default_tol)
        columns["l2"] = {"max_abs": float(np.max(np.abs(diff))), "rms": l2, "tol": tol, "passed": l2 <= tol}
    else:
        for col in header_a[1:]:
            diff = a[col] - b[col]
            both_nan = np.isnan(a[col]) & np.isnan(b[col])
            diff = np.where(both_nan, 0.0, diff)
            max_abs = float(np.max(np.abs(diff))) if diff.size else 0.0
            rms = float(np.sqrt(np.mean(diff**2))) if diff.size else 0.0
            tol = _tolerance(tolerances, col, default_tol)
            columns[col] = {"max_abs": max_abs, "rms": rms, "tol": tol, "passed": bool(max_abs <= tol)}
    return FileComparison(str(path_b), columns, all(c["passed"] for c in columns.values()))


def compare(run_a, run_b, default_tol: float = 1e-6, tolerances: dict | None = None) -> CompareReport:
    """Compare two CSV files, or every same-named CSV in two run directories.

    Passing is judged per column on the max-abs difference (for wave functions,
    on the L2 distance) against ``tolerances[column]`` or ``default_tol``.
    """
    run_a, run_b = Path(run_a), Path(run_b)
    if run_a.is_dir() != run_b.is_dir():
        raise CompareError("compare two files or two run directories, not a mix")
    if run_a.is_dir():
        names = sorted({p.name for p in run_a.glob("*.csv")} & {p.name for p in run_b.glob("*.csv")})
        if not names:
            raise CompareError("no common CSV files to compare")
        pairs = [(run_a / n, run_b / n) for n in names]
    else:
        pairs = [(run_a, run_b)]
    results = [compare_files(a, b, default_tol, tolerances) for a, b in pairs]
    return CompareReport(results, all(r.passed for r in results))

