"""End-to-end tests of the ``mdreport`` command against the golden runs."""

import json
import re

import pytest

from mdreport.cli import main


def test_summarize_golden_run_exit_0_full_report(neutral_run, tmp_path, capsys):
    out = tmp_path / "report"
    code = main(["summarize", str(neutral_run), "--out", str(out), "--timestamp", "none"])
    assert code == 0
    page = (out / "report.html").read_text()
    assert re.search(
        r'<td>Theorem 5</td>\s*<td class="verdict">not applicable</td>', page
    )
    assert "<time>" not in page  # --timestamp none drops the stamp
    figures = sorted(p.name for p in (out / "figures").iterdir())
    assert figures == [
        "comparison-bound.png",
        "decay-envelope.png",
        "limit-formula.png",
        "multipole.png",
        "staticity.png",
    ]
    # every figure is linked with a caption
    assert page.count("<figure>") == 5
    assert str(out / "report.html") in capsys.readouterr().out


def test_summarize_rerun_is_identical(neutral_run, tmp_path):
    pages = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(
            ["summarize", str(neutral_run), "--out", str(out), "--timestamp", "fixed"]
        ) == 0
        pages.append((out / "report.html").read_bytes())
        figure_bytes = {
            p.name: p.read_bytes() for p in sorted((out / "figures").iterdir())
        }
        pages.append(sorted(figure_bytes))
    assert pages[0] == pages[2]
    assert pages[1] == pages[3]


def test_summarize_leaves_run_dir_untouched(neutral_run, tmp_path, tree_digest):
    before = tree_digest(neutral_run)
    main(["summarize", str(neutral_run), "--out", str(tmp_path / "r")])
    assert tree_digest(neutral_run) == before


def test_summarize_failing_claim_exits_2_but_reports(neutral_copy, tmp_path, capsys):
    victim = neutral_copy / "diagnostics" / "comparison-bound.json"
    doc = json.loads(victim.read_text())
    doc["verdict"] = "fail"
    victim.write_text(json.dumps(doc))
    out = tmp_path / "report"
    code = main(["summarize", str(neutral_copy), "--out", str(out), "--no-figures"])
    assert code == 2
    assert "Theorem 3" in capsys.readouterr().err
    assert ">FAIL<" in (out / "report.html").read_text()


def test_summarize_missing_manifest_exits_1(neutral_copy, tmp_path, capsys):
    (neutral_copy / "manifest.json").unlink()
    code = main(["summarize", str(neutral_copy), "--out", str(tmp_path / "r")])
    assert code == 1
    assert "manifest.json" in capsys.readouterr().err
    assert not (tmp_path / "r" / "report.html").exists()


def test_summarize_sweep_run_shows_table_and_heatmap(sweep_runs, tmp_path):
    out = tmp_path / "report"
    assert main(["summarize", str(sweep_runs[1]), "--out", str(out)]) == 0
    page = (out / "report.html").read_text()
    assert "Parameter sweep" in page
    assert (out / "figures" / "sweep.png").is_file()


def test_figure_subcommand_prints_caption(sweep_runs, tmp_path, capsys):
    out = tmp_path / "grid.svg"
    code = main(
        ["figure", "sweep-heatmap", *[str(d / "sweep.csv") for d in sweep_runs],
         "--out", str(out), "--row-key", "q_interior"]
    )
    assert code == 0
    assert out.is_file()
    assert "3 sweep(s)" in capsys.readouterr().out


def test_figure_empty_table_exits_1_no_image(tmp_path, capsys):
    csv = tmp_path / "hollow.csv"
    csv.write_text("# schema: mdlab-curve/1\nr,value,model_value\n")
    out = tmp_path / "hollow.png"
    code = main(["figure", "log-linear-decay", str(csv), "--out", str(out)])
    assert code == 1
    assert "hollow.csv" in capsys.readouterr().err
    assert not out.exists()


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["figure", "pie-chart", "x.csv", "--out", "x.png"])
    assert exc.value.code == 1
    assert "invalid choice" in capsys.readouterr().err
