"""The ``mdreport`` command: figures and HTML summaries from run directories.

Subcommands::

    mdreport summarize RUN_DIR [--out DIR] [--image-format {png,svg}]
                               [--no-figures] [--timestamp TEXT|none]
    mdreport figure KIND DATA... --out IMAGE [--diagnostic JSON]
                                 [--title TEXT] [--row-key KEY]

``summarize`` writes ``report.html`` (plus a ``figures/`` directory unless
``--no-figures``) into ``--out``, which defaults to ``<RUN_DIR>-report`` so
the run directory itself is never touched.  One figure is drawn for every
diagnostic that shipped a curve table, plus a heatmap when the directory
holds a sweep table.

Exit codes mirror the solver CLI: 0 when the report was written and no
claim failed, 2 when the report was written but at least one claim verdict
is "fail", 1 for usage errors and broken artifacts.  A failing claim still
produces a full report -- that page is exactly what one wants to look at.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from mdreport.artifacts import ArtifactError
from mdreport.figures import KINDS, FigureSpec, render
from mdreport.summary import RunSummary, summarize, to_html

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED_CLAIM = 2

#: which plot kind fits which diagnostic (keyed by the payload name)
KIND_BY_DIAGNOSTIC = {
    "decay-envelope": "log-linear-decay",
    "comparison-bound": "log-linear-decay",
    "staticity-rate": "log-log-power",
    "phase-expansion": "log-log-power",
    "limit-formula": "shell-diagnostic",
    "multipole": "shell-diagnostic",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mdreport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sum = sub.add_parser("summarize", help="render one run directory to HTML")
    p_sum.add_argument("run_dir", type=Path)
    p_sum.add_argument("--out", type=Path, default=None, help="report directory")
    p_sum.add_argument("--image-format", choices=("png", "svg"), default="png")
    p_sum.add_argument("--no-figures", action="store_true")
    p_sum.add_argument(
        "--timestamp",
        default=None,
        help="text for the 'generated' stamp; 'none' omits it (default: current UTC)",
    )

    p_fig = sub.add_parser("figure", help="render one figure")
    p_fig.add_argument("kind", choices=KINDS)
    p_fig.add_argument("data", nargs="+", type=Path)
    p_fig.add_argument("--out", type=Path, required=True)
    p_fig.add_argument("--diagnostic", type=Path, default=None)
    p_fig.add_argument("--title", default=None)
    p_fig.add_argument("--row-key", default="q_interior")
    return parser


def default_figures(
    summary: RunSummary, out_dir: Path, image_format: str
) -> list[tuple[str, str]]:
    """Render the standard figure set for a run; returns (relpath, caption)."""
    run = summary.run_dir
    figures: list[tuple[str, str]] = []
    all_diags = [d for row in summary.claim_rows for d in row.diagnostics]
    all_diags += list(summary.informational)
    for diag in all_diags:
        curve = run / "curves" / f"{diag.path.stem}.csv"
        kind = KIND_BY_DIAGNOSTIC.get(diag.name)
        if kind is None or not curve.is_file():
            continue
        out = out_dir / "figures" / f"{diag.path.stem}.{image_format}"
        result = render(
            FigureSpec(kind=kind, data=(curve,), out=out, diagnostic=diag.path)
        )
        figures.append((f"figures/{out.name}", result.caption))
    if summary.sweep is not None:
        out = out_dir / "figures" / f"sweep.{image_format}"
        result = render(
            FigureSpec(kind="sweep-heatmap", data=(run / "sweep.csv",), out=out)
        )
        figures.append((f"figures/{out.name}", result.caption))
    return figures


def _run_summarize(args: argparse.Namespace) -> int:
    out_dir: Path = args.out if args.out is not None else args.run_dir.with_name(
        args.run_dir.name + "-report"
    )
    if args.timestamp is None:
        timestamp: str | None = datetime.now(timezone.utc).isoformat(timespec="seconds")
    elif args.timestamp == "none":
        timestamp = None
    else:
        timestamp = args.timestamp

    summary = summarize(args.run_dir)
    figures: list[tuple[str, str]] = []
    if not args.no_figures:
        figures = default_figures(summary, out_dir, args.image_format)
    page = to_html(summary, figures=figures, timestamp=timestamp)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.html").write_text(page, encoding="utf-8")
    print(out_dir / "report.html")
    if summary.n_failed:
        failed = ", ".join(r.title for r in summary.claim_rows if r.verdict == "fail")
        print(f"summarize: failed claims: {failed}", file=sys.stderr)
        return EXIT_FAILED_CLAIM
    return EXIT_OK


def _run_figure(args: argparse.Namespace) -> int:
    result = render(
        FigureSpec(
            kind=args.kind,
            data=tuple(args.data),
            out=args.out,
            diagnostic=args.diagnostic,
            title=args.title,
            row_key=args.row_key,
        )
    )
    print(f"{result.path}: {result.caption}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "summarize":
            return _run_summarize(args)
        return _run_figure(args)
    except ArtifactError as exc:
        print(f"mdreport: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"mdreport: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
