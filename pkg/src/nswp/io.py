"""CSV readers and writers for time series, wave functions and tables.

Every float is written with 12 significant digits so identical runs give
byte-identical files.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .oscillator import WaveFunction
from .propagate import TIMESERIES_COLUMNS, TimeSeries

WAVEFUNCTION_COLUMNS = ("x", "re", "im")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    value = float(value)
    if value == 0.0:
        return "0"
    return f"{value:.12g}"


def write_table(path, columns, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_table(path) -> tuple[list[str], dict[str, np.ndarray]]:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    if any(len(r) != len(header) for r in rows):
        raise ValueError(f"{path}: ragged rows")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, {name: data[:, i] for i, name in enumerate(header)}


def write_timeseries(series: TimeSeries, path) -> Path:
    cols = [series[name] for name in TIMESERIES_COLUMNS]
    return write_table(path, TIMESERIES_COLUMNS, zip(*cols))


def read_timeseries(path) -> TimeSeries:
    header, data = read_table(path)
    if tuple(header) != TIMESERIES_COLUMNS:
        raise ValueError(f"{path}: not a time-series file (header {header})")
    return TimeSeries.from_columns(data)


def write_wavefunction(psi: WaveFunction, path) -> Path:
    return write_table(path, WAVEFUNCTION_COLUMNS, zip(psi.x, psi.amps.real, psi.amps.imag))


def read_wavefunction_samples(path) -> tuple[np.ndarray, np.ndarray]:
    """(x, complex amplitudes) from an ``x,re,im`` file."""
    header, data = read_table(path)
    if tuple(header) != WAVEFUNCTION_COLUMNS:
        raise ValueError(f"{path}: not a wave-function file (header {header})")
    return data["x"], data["re"] + 1j * data["im"]
