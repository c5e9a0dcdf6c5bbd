"""Rendering tests: the four plot kinds, overlay discipline, error contract."""

import json
import math
import shutil

import numpy as np
import pytest

from mdreport.artifacts import (
    ArtifactSchemaError,
    EmptyArtifactError,
    MissingArtifactError,
    load_diagnostic,
)
from mdreport.figures import FigureSpec, RenderResult, predicted_overlay, render


def _spec(neutral_run, tmp_path, stem, kind, **kwargs):
    return FigureSpec(
        kind=kind,
        data=(neutral_run / "curves" / f"{stem}.csv",),
        diagnostic=neutral_run / "diagnostics" / f"{stem}.json",
        out=tmp_path / f"{stem}.png",
        **kwargs,
    )


def test_log_linear_decay_renders_with_caption(neutral_run, tmp_path):
    result = render(_spec(neutral_run, tmp_path, "comparison-bound", "log-linear-decay"))
    assert result.path.is_file() and result.path.stat().st_size > 1000
    assert "comparison-bound" in result.caption
    assert "[theorem-3]" in result.caption
    assert "pass" in result.caption


def test_shell_diagnostic_renders_limit_formula_and_multipole(neutral_run, tmp_path):
    for stem in ("limit-formula", "multipole"):
        result = render(_spec(neutral_run, tmp_path, stem, "shell-diagnostic"))
        assert result.path.is_file()
    assert "q0" in result.caption  # multipole caption carries the charge


def test_log_log_power_renders_staticity(neutral_run, tmp_path):
    result = render(_spec(neutral_run, tmp_path, "staticity", "log-log-power"))
    assert result.path.is_file()
    # the gapped golden run cannot test the threshold claim
    assert "not applicable" in result.caption or "not-applicable" in result.caption


def test_repeated_render_is_byte_identical(neutral_run, tmp_path):
    for fmt in ("png", "svg"):
        pair = []
        for tag in ("a", "b"):
            spec = FigureSpec(
                kind="log-linear-decay",
                data=(neutral_run / "curves" / "decay-envelope.csv",),
                diagnostic=neutral_run / "diagnostics" / "decay-envelope.json",
                out=tmp_path / f"{tag}.{fmt}",
            )
            pair.append(render(spec).path.read_bytes())
        assert pair[0] == pair[1], f"{fmt} output is not deterministic"


def test_empty_data_errors_without_writing(tmp_path):
    csv = tmp_path / "hollow.csv"
    csv.write_text("# schema: mdlab-curve/1\nr,value,model_value\n")
    out = tmp_path / "hollow.png"
    with pytest.raises(EmptyArtifactError, match="hollow.csv"):
        render(FigureSpec(kind="log-linear-decay", data=(csv,), out=out))
    assert not out.exists()


def test_schema_mismatch_errors_without_writing(tmp_path):
    csv = tmp_path / "short.csv"
    csv.write_text("# schema: mdlab-curve/1\nr,value\n1.0,2.0\n")
    out = tmp_path / "short.png"
    with pytest.raises(ArtifactSchemaError, match="model_value"):
        render(FigureSpec(kind="log-linear-decay", data=(csv,), out=out))
    assert not out.exists()


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown plot kind"):
        FigureSpec(kind="pie", data=(tmp_path / "x.csv",), out=tmp_path / "x.png")


def test_overlay_prefers_predicted_over_fitted(neutral_run):
    # the envelope parameters all sit in the predicted block: the overlay must
    # follow them, not the fitted ones
    diag = load_diagnostic(neutral_run / "diagnostics" / "comparison-bound.json")
    r = np.array([30.0, 60.0, 120.0])
    label, values = predicted_overlay(diag, r)
    c0 = diag.predicted["coefficient"]
    rate = diag.predicted["rate"]
    expected = c0 * np.exp(-rate * r) / r
    assert np.allclose(values, expected, rtol=1e-12)
    assert "predicted" in label


def test_overlay_handles_stretched_threshold_payload(tmp_path):
    # a threshold-shaped diagnostic, written by hand against the documented
    # schema: predicted rate/power claim the envelope, fitted anchors amplitude
    b = 2.0 * math.sqrt(2.0)
    doc = {
        "schema": "mdlab-diagnostic/1",
        "diagnostic": "decay-envelope",
        "claim": "theorem-5",
        "inputs": {},
        "fitted": {"model": "stretched", "coefficient": 3.0, "rate": b, "power": 1.5},
        "predicted": {"rate": b, "power": 1.5},
        "tolerance": {"relative": 0.01},
        "verdict": "pass",
        "manifest_hash": "0" * 64,
    }
    p = tmp_path / "stretched.json"
    p.write_text(json.dumps(doc))
    r = np.geomspace(1.0, 400.0, 5)
    label, values = predicted_overlay(load_diagnostic(p), r)
    assert np.allclose(values, 3.0 * np.exp(-b * np.sqrt(r)) / r**1.5, rtol=1e-12)
    assert "stretched" in label

    csv = tmp_path / "stretched.csv"
    rows = "\n".join(
        f"%.17g,%.17g,%.17g" % (ri, 3.0 * math.exp(-b * math.sqrt(ri)) / ri**1.5,
                                3.0 * math.exp(-b * math.sqrt(ri)) / ri**1.5)
        for ri in np.geomspace(1.0, 400.0, 200)
    )
    csv.write_text(f"# schema: mdlab-curve/1\n# diagnostic: decay-envelope\nr,value,model_value\n{rows}\n")
    result = render(
        FigureSpec(kind="log-linear-decay", data=(csv,), diagnostic=p, out=tmp_path / "s.png")
    )
    assert result.path.is_file()
    assert "stretched" in result.caption


def test_overlay_absent_when_nothing_predicted(neutral_run):
    diag = load_diagnostic(neutral_run / "diagnostics" / "decay-envelope.json")
    assert diag.verdict == "informational"
    assert predicted_overlay(diag, np.array([10.0, 20.0])) is None


def test_heatmap_renders_three_rows(sweep_runs, tmp_path):
    out = tmp_path / "grid.png"
    result = render(
        FigureSpec(kind="sweep-heatmap", data=[d / "sweep.csv" for d in sweep_runs], out=out)
    )
    assert out.is_file()
    assert "3 sweep(s) of 5 cells" in result.caption
    assert "0 unconverged" in result.caption


def test_heatmap_masks_unconverged_cells(sweep_runs, tmp_path):
    rows = []
    for src in sweep_runs:
        dst = tmp_path / src.name
        shutil.copytree(src, dst)
        rows.append(dst / "sweep.csv")
    # knock one cell over: converged=0, results NaN, as the solver writes them
    lines = rows[1].read_text().splitlines()
    cells = lines[4].split(",")
    cells[1], cells[2], cells[3], cells[5] = "0", "nan", "nan", "nan"
    lines[4] = ",".join(cells)
    rows[1].write_text("\n".join(lines) + "\n")
    result = render(FigureSpec(kind="sweep-heatmap", data=rows, out=tmp_path / "grid.png"))
    assert "1 unconverged cell(s) masked" in result.caption


def test_heatmap_requires_row_manifest(sweep_runs, tmp_path):
    lone = tmp_path / "sweep.csv"
    shutil.copy(sweep_runs[0] / "sweep.csv", lone)
    with pytest.raises(MissingArtifactError, match="manifest.json"):
        render(FigureSpec(kind="sweep-heatmap", data=(lone,), out=tmp_path / "x.png"))
    assert not (tmp_path / "x.png").exists()


def test_heatmap_rejects_unknown_row_key(sweep_runs, tmp_path):
    with pytest.raises(ArtifactSchemaError, match="physics.flux"):
        render(
            FigureSpec(
                kind="sweep-heatmap",
                data=(sweep_runs[0] / "sweep.csv",),
                out=tmp_path / "x.png",
                row_key="flux",
            )
        )


def test_heatmap_rejects_duplicate_rows(sweep_runs, tmp_path):
    with pytest.raises(ArtifactSchemaError, match="distinct"):
        render(
            FigureSpec(
                kind="sweep-heatmap",
                data=(sweep_runs[0] / "sweep.csv", sweep_runs[0] / "sweep.csv"),
                out=tmp_path / "x.png",
            )
        )


def test_single_series_kinds_take_one_table(neutral_run, tmp_path):
    with pytest.raises(ValueError, match="exactly one"):
        render(
            FigureSpec(
                kind="log-linear-decay",
                data=(
                    neutral_run / "curves" / "decay-envelope.csv",
                    neutral_run / "curves" / "comparison-bound.csv",
                ),
                out=tmp_path / "x.png",
            )
        )
