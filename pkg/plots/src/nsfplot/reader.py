"""Readers for the simulator's output files.

This package is a read-only consumer: it never recomputes physics, it only
parses the versioned diagnostics CSV and the run summary JSON files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["SCHEMA_VERSION", "CSV_COLUMNS", "SchemaError", "SeriesBundle",
           "read_diagnostics", "read_weakstrong_points", "read_convergence"]

SCHEMA_VERSION = 1

# the versioned column contract of the diagnostics CSV
CSV_COLUMNS = ("schema_version", "t", "mass", "kinetic", "internal",
               "radiation", "total_entropy", "ballistic",
               "entropy_production", "energy_residual", "ballistic_residual",
               "weak_strong_residual", "rel_energy_base", "r1", "r2", "r3",
               "dissipation_margin", "conduction_margin",
               "interpolation_margin", "entropy_bound_constant",
               "theta_tilde_min", "theta_tilde_max", "min_rho", "min_theta",
               "boundary_heat_flux")


class SchemaError(ValueError):
    """The input file does not match the versioned schema."""


@dataclass(frozen=True)
class SeriesBundle:
    """Diagnostics time series: the time axis plus named columns."""

    t: np.ndarray
    columns: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def read_diagnostics(path) -> SeriesBundle:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != CSV_COLUMNS:
            for got, want in zip(header, CSV_COLUMNS):
                if got != want:
                    raise SchemaError(
                        f"{path}: column {got!r} where {want!r} expected")
            raise SchemaError(
                f"{path}: {len(header)} columns, {len(CSV_COLUMNS)} expected")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no rows")
    data = np.array([[float(v) for v in row] for row in rows])
    versions = data[:, 0]
    if not np.all(versions == SCHEMA_VERSION):
        raise SchemaError(
            f"{path}: schema_version {versions[np.argmax(versions != SCHEMA_VERSION)]:g}"
            f" where {SCHEMA_VERSION} expected")
    t = data[:, 1]
    if np.any(np.diff(t) <= 0):
        raise SchemaError(f"{path}: time axis not strictly increasing")
    columns = {name: data[:, k] for k, name in enumerate(CSV_COLUMNS)}
    return SeriesBundle(t=t, columns=columns)


def read_weakstrong_points(paths) -> tuple[np.ndarray, np.ndarray]:
    """Collect (amplitude, final relative energy) pairs from weak-strong
    summaries; accepts per-run summaries and the combined one."""
    amps: list[float] = []
    finals: list[float] = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        kind = payload.get("kind")
        if kind == "weakstrong-run":
            amps.append(float(payload["perturbation_amplitude"]))
            finals.append(float(payload["final_relative_energy"]))
        elif kind == "weakstrong":
            amps.extend(float(a) for a in payload["amplitudes"])
            finals.extend(float(e) for e in payload["final_relative_energy"])
        else:
            raise SchemaError(f"{path}: kind {kind!r} is not a weak-strong "
                              f"summary")
    if len(amps) < 2:
        raise SchemaError("need at least two (amplitude, energy) points")
    order = np.argsort(amps)
    return np.asarray(amps)[order], np.asarray(finals)[order]


def read_convergence(paths) -> list[dict]:
    """Convergence summaries as a list of row dicts for the order table."""
    rows = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("kind") != "convergence":
            raise SchemaError(f"{path}: kind {payload.get('kind')!r} is not "
                              f"a convergence summary")
        for field, order in payload["dt_ladder"]["orders"].items():
            rows.append({"case": payload["case"], "field": field,
                         "ladder": "dt", "order": order})
        for field, order in payload["h_ladder"]["orders"].items():
            rows.append({"case": payload["case"], "field": field,
                         "ladder": "h", "order": order})
    if not rows:
        raise SchemaError("no convergence rows found")
    return rows
