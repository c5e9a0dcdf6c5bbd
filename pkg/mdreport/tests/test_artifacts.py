"""Reader tests against the committed golden artifacts and crafted damage."""

import numpy as np
import pytest

from mdreport.artifacts import (
    ArtifactParseError,
    ArtifactSchemaError,
    EmptyArtifactError,
    MissingArtifactError,
    format_scalars,
    iter_diagnostics,
    load_curve,
    load_diagnostic,
    load_manifest,
    load_sweep,
    manifest_physics,
    read_json_artifact,
    read_table,
)


def test_state_table_reads_with_metadata(neutral_run):
    table = read_table(neutral_run / "state.csv", schema="mdlab-state/1")
    assert table.meta["schema"] == "mdlab-state/1"
    assert len(table.meta["manifest"]) == 64
    r = table["r"]
    assert r.shape == (3000,)
    assert np.all(np.diff(r) > 0)
    for name in ("G", "F", "a0_total", "a0_regular", "density_h"):
        assert table[name].shape == r.shape


def test_curve_table_has_canonical_columns(neutral_run):
    table = load_curve(neutral_run / "curves" / "limit-formula.csv")
    table.require_rows()
    assert set(table.columns) == {"r", "value", "model_value"}


def test_sweep_table_names_swept_parameter(sweep_runs):
    table = load_sweep(sweep_runs[0] / "sweep.csv")
    assert table.meta["parameter"] == "e"
    assert table.n_rows == 5
    assert np.all(table["converged"] == 1.0)


def test_golden_diagnostics_validate_and_share_one_manifest(neutral_run):
    diags = list(iter_diagnostics(neutral_run / "diagnostics"))
    assert len(diags) == 7
    assert len({d.manifest_hash for d in diags}) == 1
    by_name = {d.name: d for d in diags}
    tail = by_name["charge-tail-scale"]
    assert tail.claim == "theorem-5"
    assert tail.verdict == "not-applicable"
    assert "q0 = 0" in tail.reason


def test_missing_file_is_its_own_error(tmp_path):
    with pytest.raises(MissingArtifactError, match="no-such"):
        read_table(tmp_path / "no-such.csv")
    with pytest.raises(MissingArtifactError, match="no-such"):
        read_json_artifact(tmp_path / "no-such.json")


def test_corrupted_json_names_the_file(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text('{"schema": "mdlab-diagnostic/1", "verdict": ')
    with pytest.raises(ArtifactParseError, match="broken.json"):
        load_diagnostic(bad)


def test_wrong_schema_tag_names_both_schemas(neutral_run):
    with pytest.raises(ArtifactSchemaError, match="mdlab-scf/1.*mdlab-manifest/1"):
        read_json_artifact(neutral_run / "scf.json", schema="mdlab-manifest/1")


@pytest.mark.parametrize("missing", ["verdict", "fitted", "diagnostic", "manifest_hash"])
def test_diagnostic_missing_field_is_named(tmp_path, neutral_run, missing):
    import json

    doc = json.loads((neutral_run / "diagnostics" / "limit-formula.json").read_text())
    del doc[missing]
    p = tmp_path / "maimed.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ArtifactSchemaError, match=missing):
        load_diagnostic(p)


def test_unknown_verdict_rejected(tmp_path, neutral_run):
    import json

    doc = json.loads((neutral_run / "diagnostics" / "limit-formula.json").read_text())
    doc["verdict"] = "maybe"
    p = tmp_path / "maybe.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ArtifactSchemaError, match="'maybe'"):
        load_diagnostic(p)


def test_csv_parse_errors_carry_file_and_line(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("# schema: mdlab-curve/1\nr,value,model_value\n1.0,2.0\n")
    with pytest.raises(ArtifactParseError, match="ragged.csv: line 3"):
        read_table(ragged)

    alpha = tmp_path / "alpha.csv"
    alpha.write_text("r,value\n1.0,banana\n")
    with pytest.raises(ArtifactParseError, match="alpha.csv: line 2"):
        read_table(alpha)

    headerless = tmp_path / "empty.csv"
    headerless.write_text("# schema: mdlab-curve/1\n")
    with pytest.raises(ArtifactParseError, match="no header"):
        read_table(headerless)


def test_missing_column_is_named(tmp_path):
    p = tmp_path / "short.csv"
    p.write_text("# schema: mdlab-curve/1\nr,value\n1.0,2.0\n")
    with pytest.raises(ArtifactSchemaError, match="model_value"):
        load_curve(p)


def test_empty_table_flagged_only_on_demand(tmp_path):
    p = tmp_path / "hollow.csv"
    p.write_text("# schema: mdlab-curve/1\nr,value,model_value\n")
    table = load_curve(p)
    assert table.n_rows == 0
    with pytest.raises(EmptyArtifactError, match="hollow.csv"):
        table.require_rows()


def test_manifest_physics_lookup(neutral_run):
    manifest = load_manifest(neutral_run / "manifest.json")
    q = manifest_physics(manifest, "q_interior", neutral_run / "manifest.json")
    assert q == 0.54
    with pytest.raises(ArtifactSchemaError, match="physics.flux_capacitor"):
        manifest_physics(manifest, "flux_capacitor", neutral_run / "manifest.json")


def test_format_scalars_is_sorted_and_skips_structures():
    text = format_scalars(
        {"b": 2.0, "a": 1.25, "flag": True, "window": [1, 2], "name": "exp", "reason": "x"}
    )
    assert text == "a=1.25, b=2, flag=true, name=exp"
