"""Run-directory summaries: collate verdict JSONs into one HTML page.

``summarize`` walks a run directory (manifest required, everything else
optional), groups the diagnostics by the claim they test, and aggregates a
three-state verdict per claim: *fail* if any member diagnostic failed,
else *pass* if any passed, else *not applicable*.  The conditional claims
(threshold-only decay laws, charge-sign relations) legitimately come back
not-applicable on most runs, which is exactly why the display distinguishes
that state from failure.

``to_html`` renders the summary deterministically: rerunning on the same
directory reproduces the page byte for byte except for the single
``<time>`` element (pass ``timestamp=None`` to drop even that).  Input
artifacts are only ever read.
"""

from __future__ import annotations

import html
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from mdreport.artifacts import (
    ArtifactSchemaError,
    CERTIFICATE_SCHEMA,
    Diagnostic,
    SCF_SCHEMA,
    Table,
    format_scalars,
    iter_diagnostics,
    load_manifest,
    load_sweep,
    read_json_artifact,
)

#: display text per verdict; the hyphenated JSON token becomes plain words
VERDICT_TEXT = {
    "pass": "pass",
    "fail": "FAIL",
    "not-applicable": "not applicable",
    "informational": "informational",
}

_AGGREGATE_ORDER = ("fail", "pass", "not-applicable", "informational")


def claim_title(claim: str) -> str:
    """Display name of a claim label: ``theorem-5`` becomes ``Theorem 5``."""
    stem, sep, num = claim.rpartition("-")
    if sep and num.isdigit():
        return f"{stem.capitalize()} {num}"
    return claim.capitalize()


def _claim_sort_key(claim: str) -> tuple[int, int, str]:
    stem, sep, num = claim.rpartition("-")
    if sep and num.isdigit():
        rank = {"theorem": 0, "lemma": 1}.get(stem, 2)
        return (rank, int(num), stem)
    return (3, 0, claim)


@dataclass(frozen=True)
class ClaimRow:
    """One verdict-table row: a claim and the diagnostics that tested it."""

    claim: str
    title: str
    verdict: str
    diagnostics: tuple[Diagnostic, ...]


@dataclass(frozen=True)
class RunSummary:
    """Everything ``to_html`` needs, already validated and ordered."""

    run_dir: Path
    manifest: Mapping[str, Any]
    manifest_hash: str | None
    scf: Mapping[str, Any] | None
    certificate: Mapping[str, Any] | None
    sweep: Table | None
    claim_rows: tuple[ClaimRow, ...]
    informational: tuple[Diagnostic, ...] = field(default=())

    @property
    def n_failed(self) -> int:
        return sum(1 for row in self.claim_rows if row.verdict == "fail")


def _aggregate(verdicts: Sequence[str]) -> str:
    for verdict in _AGGREGATE_ORDER:
        if verdict in verdicts:
            return verdict
    return "informational"


def summarize(run_dir: str | Path) -> RunSummary:
    """Collate one run directory; raises ArtifactError subclasses on damage."""
    run = Path(run_dir)
    manifest = load_manifest(run / "manifest.json")

    diagnostics = list(iter_diagnostics(run / "diagnostics"))
    hashes = sorted({d.manifest_hash for d in diagnostics})
    if len(hashes) > 1:
        raise ArtifactSchemaError(
            f"{run}: diagnostics reference {len(hashes)} different manifests "
            f"({', '.join(h[:12] for h in hashes)}...); refusing to summarize a mixed directory"
        )
    manifest_hash = hashes[0] if hashes else None

    scf = None
    if (run / "scf.json").is_file():
        scf = read_json_artifact(run / "scf.json", schema=SCF_SCHEMA)
        if manifest_hash is None:
            manifest_hash = scf.get("manifest_hash")
        elif scf.get("manifest_hash") not in (None, manifest_hash):
            raise ArtifactSchemaError(
                f"{run / 'scf.json'}: manifest_hash disagrees with the diagnostics; "
                f"refusing to summarize a mixed directory"
            )
    certificate = None
    if (run / "certificate.json").is_file():
        certificate = read_json_artifact(run / "certificate.json", schema=CERTIFICATE_SCHEMA)
    sweep = None
    if (run / "sweep.csv").is_file():
        sweep = load_sweep(run / "sweep.csv")

    by_claim: dict[str, list[Diagnostic]] = {}
    informational: list[Diagnostic] = []
    for diag in diagnostics:
        if diag.claim is None:
            informational.append(diag)
        else:
            by_claim.setdefault(diag.claim, []).append(diag)
    rows = tuple(
        ClaimRow(
            claim=claim,
            title=claim_title(claim),
            verdict=_aggregate([d.verdict for d in members]),
            diagnostics=tuple(members),
        )
        for claim, members in sorted(by_claim.items(), key=lambda kv: _claim_sort_key(kv[0]))
    )
    return RunSummary(
        run_dir=run,
        manifest=manifest,
        manifest_hash=manifest_hash,
        scf=scf,
        certificate=certificate,
        sweep=sweep,
        claim_rows=rows,
        informational=tuple(informational),
    )


# -------------------------------------------------------------------- HTML

_STYLE = """
body { font-family: sans-serif; margin: 2em auto; max-width: 60em; color: #222; }
h1 { font-size: 1.4em; } h2 { font-size: 1.15em; margin-top: 1.6em; }
table { border-collapse: collapse; width: 100%; }
th, td { border: 1px solid #ccc; padding: 0.4em 0.6em; text-align: left;
         vertical-align: top; font-size: 0.92em; }
th { background: #f2f2f2; }
tr.pass td.verdict { background: #e4f3e4; color: #1a6b1a; font-weight: bold; }
tr.fail td.verdict { background: #f8dcdc; color: #a01818; font-weight: bold; }
tr.not-applicable td.verdict { background: #eeeeee; color: #555; }
tr.informational td.verdict { background: #e8eef8; color: #2a4a80; }
p.stamp, p.legend { color: #666; font-size: 0.85em; }
code { background: #f5f5f5; padding: 0 0.2em; }
figure { margin: 1.2em 0; }
figure img { max-width: 100%; border: 1px solid #ddd; }
figcaption { color: #555; font-size: 0.85em; margin-top: 0.3em; }
"""


def _esc(value: Any) -> str:
    return html.escape(str(value), quote=True)


def _fact_rows(summary: RunSummary) -> list[tuple[str, str]]:
    facts: list[tuple[str, str]] = []
    if summary.manifest_hash:
        facts.append(("manifest", summary.manifest_hash))
    versions = summary.manifest.get("versions")
    if isinstance(versions, dict) and "mdlab" in versions:
        facts.append(("solver version", str(versions["mdlab"])))
    scf = summary.scf
    if scf is not None:
        facts.append(("converged", "yes" if scf.get("converged") else "NO"))
        if scf.get("converged"):
            facts.append(("E/m", f"{float(scf['e_over_m']):.9g}"))
            facts.append(("charge q0", f"{float(scf['q0_bookkeeping']):.6g}"))
            facts.append(("SCF iterations", str(scf.get("iterations", "?"))))
    cert = summary.certificate
    if cert is not None:
        gates = cert.get("gates", {})
        worst = max(
            (float(v.get("max", "nan")) for v in gates.values() if isinstance(v, dict)),
            default=float("nan"),
        )
        verdict = "passed" if cert.get("passed") else "FAILED"
        facts.append(
            ("embedding certificate", f"{verdict} (worst gated residual {worst:.3g})")
        )
    return facts


def _claim_detail(diag: Diagnostic) -> str:
    label = f"<code>{_esc(diag.name)}</code>: {_esc(VERDICT_TEXT[diag.verdict])}"
    if diag.verdict == "not-applicable" and diag.reason:
        return f"{label} — {_esc(diag.reason)}"
    bits = []
    fitted = format_scalars(diag.fitted)
    predicted = format_scalars(diag.predicted)
    if fitted:
        bits.append(f"fitted {fitted}")
    if predicted:
        bits.append(f"predicted {predicted}")
    return f"{label} — {_esc('; '.join(bits))}" if bits else label


def _sweep_section(sweep: Table) -> list[str]:
    parameter = sweep.meta.get("parameter", "value")
    out = [
        "<h2>Parameter sweep</h2>",
        "<table><tr>"
        + "".join(
            f"<th>{_esc(h)}</th>"
            for h in (parameter, "converged", "E/m", "q0", "iterations")
        )
        + "</tr>",
    ]
    for i in range(sweep.n_rows):
        converged = sweep["converged"][i] == 1.0
        cells = [f"{sweep['value'][i]:.6g}", "yes" if converged else "NO"]
        if converged:
            cells += [f"{sweep['e_over_m'][i]:.9g}", f"{sweep['q0'][i]:.6g}"]
        else:
            cells += ["—", "—"]
        cells.append(f"{int(sweep['iterations'][i])}")
        cls = "pass" if converged else "fail"
        out.append(
            f'<tr class="{cls}"><td>{cells[0]}</td><td class="verdict">{cells[1]}</td>'
            + "".join(f"<td>{_esc(c)}</td>" for c in cells[2:])
            + "</tr>"
        )
    out.append("</table>")
    return out


def to_html(
    summary: RunSummary,
    figures: Sequence[tuple[str, str]] = (),
    timestamp: str | None = None,
) -> str:
    """Render the summary page; ``figures`` holds (relative path, caption)."""
    name = summary.run_dir.name
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>run summary: {_esc(name)}</title>",
        f"<style>{_STYLE}</style></head><body>",
        f"<h1>Maxwell–Dirac run summary — <code>{_esc(name)}</code></h1>",
    ]
    if timestamp is not None:
        parts.append(f'<p class="stamp">generated <time>{_esc(timestamp)}</time></p>')

    facts = _fact_rows(summary)
    if facts:
        parts.append("<table>")
        parts.extend(
            f"<tr><th>{_esc(k)}</th><td><code>{_esc(v)}</code></td></tr>" for k, v in facts
        )
        parts.append("</table>")

    parts.append("<h2>Claim verdicts</h2>")
    if summary.claim_rows:
        parts.append(
            '<p class="legend">verdicts are three-state: pass / fail / not applicable '
            "(a claim whose hypotheses this run does not meet is not a failure)</p>"
        )
        parts.append("<table><tr><th>Claim</th><th>Verdict</th><th>Evidence</th></tr>")
        for row in summary.claim_rows:
            detail = "<br>".join(_claim_detail(d) for d in row.diagnostics)
            parts.append(
                f'<tr class="{_esc(row.verdict)}"><td>{_esc(row.title)}</td>'
                f'<td class="verdict">{_esc(VERDICT_TEXT[row.verdict])}</td>'
                f"<td>{detail}</td></tr>"
            )
        parts.append("</table>")
    else:
        parts.append("<p>This run carries no claim diagnostics.</p>")

    if summary.informational:
        parts.append("<h2>Other diagnostics</h2>")
        parts.append("<table><tr><th>Diagnostic</th><th>Verdict</th><th>Detail</th></tr>")
        for diag in summary.informational:
            parts.append(
                f'<tr class="{_esc(diag.verdict)}"><td><code>{_esc(diag.name)}</code></td>'
                f'<td class="verdict">{_esc(VERDICT_TEXT[diag.verdict])}</td>'
                f"<td>{_claim_detail(diag)}</td></tr>"
            )
        parts.append("</table>")

    if summary.sweep is not None:
        parts.extend(_sweep_section(summary.sweep))

    if figures:
        parts.append("<h2>Figures</h2>")
        for rel_path, caption in figures:
            parts.append(
                f'<figure><img src="{_esc(rel_path)}" alt="{_esc(caption)}">'
                f"<figcaption>{_esc(caption)}</figcaption></figure>"
            )

    parts.append("</body></html>")
    return "\n".join(parts) + "\n"
