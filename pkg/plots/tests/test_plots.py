"""Plot-suite tests against the shipped reference outputs."""

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from nsfplot.cli import main
from nsfplot.figures import (fit_loglog_slope, plot_convergence,
                             plot_energies, plot_weakstrong_ladder)
from nsfplot.reader import (CSV_COLUMNS, SchemaError, read_diagnostics,
                            read_weakstrong_points)

DATA = Path(__file__).resolve().parent / "data"
REFERENCE_CSV = DATA / "reference_diagnostics.csv"
WS_SUMMARIES = [DATA / f"weakstrong_amp{k}.json" for k in range(3)]


class TestReader:
    def test_reference_csv(self):
        bundle = read_diagnostics(REFERENCE_CSV)
        assert np.all(np.diff(bundle.t) > 0)
        assert set(CSV_COLUMNS) == set(bundle.columns)
        assert np.all(bundle["entropy_production"] >= 0.0)

    def test_header_only_is_no_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(",".join(CSV_COLUMNS) + "\n")
        with pytest.raises(SchemaError, match="no rows"):
            read_diagnostics(path)

    def test_schema_mismatch_names_column(self, tmp_path):
        lines = REFERENCE_CSV.read_text().splitlines()
        header = lines[0].replace("ballistic_residual", "ballistic_res")
        path = tmp_path / "bad.csv"
        path.write_text("\n".join([header] + lines[1:]) + "\n")
        with pytest.raises(SchemaError, match="ballistic_res"):
            read_diagnostics(path)

    def test_wrong_schema_version(self, tmp_path):
        lines = REFERENCE_CSV.read_text().splitlines()
        rows = [r.replace("1,", "2,", 1) for r in lines[1:]]
        path = tmp_path / "v2.csv"
        path.write_text("\n".join([lines[0]] + rows) + "\n")
        with pytest.raises(SchemaError, match="schema_version"):
            read_diagnostics(path)

    def test_weakstrong_points_both_kinds(self):
        amps, finals = read_weakstrong_points(WS_SUMMARIES)
        assert len(amps) == 3
        amps2, finals2 = read_weakstrong_points(
            [DATA / "weakstrong_summary.json"])
        np.testing.assert_allclose(sorted(amps), sorted(amps2))
        np.testing.assert_allclose(sorted(finals), sorted(finals2))


class TestFigures:
    def test_energies_figure(self, tmp_path):
        out = plot_energies(REFERENCE_CSV, tmp_path / "energies.png")
        assert out.exists() and out.stat().st_size > 5000

    def test_energies_has_labeled_series(self, tmp_path):
        # schema-driven: at least 4 labeled series on the axes
        import matplotlib
        matplotlib.use("Agg")
        from nsfplot.figures import ENERGY_SERIES
        assert len(ENERGY_SERIES) >= 4

    def test_weakstrong_slope_matches_independent_refit(self, tmp_path):
        out, slope = plot_weakstrong_ladder(WS_SUMMARIES,
                                            tmp_path / "ladder.png")
        assert out.exists()
        amps, finals = read_weakstrong_points(WS_SUMMARIES)
        refit = float(np.polyfit(np.log(amps), np.log(finals), 1)[0])
        assert abs(slope - refit) < 1e-6
        assert 1.8 < slope < 2.2  # quadratic decay of the Bregman distance

    def test_convergence_table(self, tmp_path):
        out = plot_convergence([DATA / "convergence_summary.json"],
                               tmp_path / "orders.png")
        assert out.exists() and out.stat().st_size > 5000

    def test_bit_stable_rendering(self, tmp_path):
        a = plot_energies(REFERENCE_CSV, tmp_path / "a.png")
        b = plot_energies(REFERENCE_CSV, tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()
        la, _ = plot_weakstrong_ladder(WS_SUMMARIES, tmp_path / "la.png")
        lb, _ = plot_weakstrong_ladder(WS_SUMMARIES, tmp_path / "lb.png")
        assert la.read_bytes() == lb.read_bytes()

    def test_fit_helper(self):
        amps = np.array([1e-2, 1e-3, 1e-4])
        finals = 3.0 * amps**2
        slope, _ = fit_loglog_slope(amps, finals)
        assert slope == pytest.approx(2.0, abs=1e-12)


class TestCli:
    def test_energies_command(self, tmp_path):
        out = tmp_path / "fig.png"
        assert main(["energies", "--in", str(REFERENCE_CSV),
                     "--out", str(out)]) == 0
        assert out.exists()

    def test_weakstrong_command(self, tmp_path, capsys):
        out = tmp_path / "ladder.png"
        rc = main(["weakstrong", "--in"] + [str(p) for p in WS_SUMMARIES]
                  + ["--out", str(out)])
        assert rc == 0
        assert "fitted slope" in capsys.readouterr().out

    def test_convergence_command(self, tmp_path):
        out = tmp_path / "orders.png"
        assert main(["convergence", "--in",
                     str(DATA / "convergence_summary.json"),
                     "--out", str(out)]) == 0

    def test_schema_error_is_reported(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["energies", "--in", str(bad),
                     "--out", str(tmp_path / "x.png")]) == 1
        assert "error" in capsys.readouterr().err

    def test_wrong_kind_of_summary_rejected(self, tmp_path, capsys):
        assert main(["weakstrong", "--in",
                     str(DATA / "convergence_summary.json"),
                     "--out", str(tmp_path / "x.png")]) == 1
        assert "weak-strong" in capsys.readouterr().err


class TestSecondaryAcceptance:
    """Acceptance: every figure kind regenerates from the shipped reference
    outputs, and the annotated slope matches an independent refit."""

    def test_regenerate_all_kinds(self, tmp_path):
        outs = [
            plot_energies(REFERENCE_CSV, tmp_path / "energies.png"),
            plot_weakstrong_ladder(WS_SUMMARIES, tmp_path / "ladder.png")[0],
            plot_convergence([DATA / "convergence_summary.json"],
                             tmp_path / "orders.png"),
        ]
        ok = all(p.exists() and p.stat().st_size > 0 for p in outs)
        print(f"[ACCEPTANCE] plots-regenerate-all-kinds: "
              f"{'PASS' if ok else 'FAIL'} ({len(outs)} figures)")
        assert ok

    def test_slope_annotation_refit(self, tmp_path):
        _, slope = plot_weakstrong_ladder(WS_SUMMARIES, tmp_path / "l.png")
        amps, finals = read_weakstrong_points(WS_SUMMARIES)
        refit = float(np.polyfit(np.log(amps), np.log(finals), 1)[0])
        ok = abs(slope - refit) < 1e-6
        print(f"[ACCEPTANCE] plots-slope-refit: {'PASS' if ok else 'FAIL'} "
              f"(annotated {slope:.8f} vs refit {refit:.8f})")
        assert ok
