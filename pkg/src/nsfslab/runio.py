"""Output writers: the diagnostics CSV (fixed, versioned column order),
flat binary snapshots with a JSON sidecar, and the per-run summary JSON.

Floats are written with ``repr`` (shortest round-trip form), so identical
runs produce bit-identical files.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsReport

__all__ = ["CSV_SCHEMA_VERSION", "CSV_COLUMNS", "DiagnosticsWriter",
           "SnapshotWriter", "write_summary"]

CSV_SCHEMA_VERSION = 1

# fixed, versioned column order; the first column carries the version
CSV_COLUMNS = ("schema_version", "t", "mass", "kinetic", "internal",
               "radiation", "total_entropy", "ballistic",
               "entropy_production", "energy_residual", "ballistic_residual",
               "weak_strong_residual", "rel_energy_base", "r1", "r2", "r3",
               "dissipation_margin", "conduction_margin",
               "interpolation_margin", "entropy_bound_constant",
               "theta_tilde_min", "theta_tilde_max", "min_rho", "min_theta",
               "boundary_heat_flux")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


class DiagnosticsWriter:
    """Streams DiagnosticsReport rows to the diagnostics CSV."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        self._fh.write(",".join(CSV_COLUMNS) + "\n")

    def write(self, report: DiagnosticsReport) -> None:
        row = dataclasses.asdict(report)
        cells = [str(CSV_SCHEMA_VERSION)]
        cells += [_fmt(row[name]) for name in CSV_COLUMNS[1:]]
        self._fh.write(",".join(cells) + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SnapshotWriter:
    """Raw float64 arrays on disk plus one JSON sidecar describing them."""

    def __init__(self, out_dir, grid):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.grid_meta = {"n_cells": grid.n_cells, "length": grid.L,
                          "n_nodes": grid.n_nodes}
        self.entries = []

    def write(self, state, tag: str) -> None:
        for name in ("rho", "theta", "u"):
            arr = np.ascontiguousarray(getattr(state, name), dtype=np.float64)
            fname = f"snapshot_{tag}_{name}.bin"
            arr.tofile(self.dir / fname)
            self.entries.append({"file": fname, "field": name, "t": state.t,
                                 "shape": list(arr.shape),
                                 "dtype": "float64"})

    def finalize(self) -> None:
        sidecar = {"grid": self.grid_meta, "snapshots": self.entries}
        with open(self.dir / "snapshots.json", "w", encoding="utf-8") as f:
            json.dump(sidecar, f, indent=2, sort_keys=True)
            f.write("\n")


def write_summary(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot serialize {type(obj)}")
