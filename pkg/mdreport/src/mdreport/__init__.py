"""Report generation for mdlab run directories.

The solver package writes schema-tagged CSV and JSON artifacts; this package
turns a directory of them into figures and a single-page HTML summary with a
three-state verdict table (pass / fail / not applicable).  It communicates
with the solver exclusively through those files -- nothing here imports
mdlab, so the two packages can be installed, versioned, and tested apart.

Module map:

* :mod:`mdreport.artifacts` -- readers and validators for the on-disk formats.
* :mod:`mdreport.figures`   -- ``FigureSpec`` + ``render`` (four plot kinds).
* :mod:`mdreport.summary`   -- ``summarize`` a run directory, emit HTML.
* :mod:`mdreport.cli`       -- the ``mdreport`` command.
"""

from mdreport.artifacts import (
    ArtifactError,
    ArtifactParseError,
    ArtifactSchemaError,
    Diagnostic,
    EmptyArtifactError,
    MissingArtifactError,
    Table,
    load_curve,
    load_diagnostic,
    load_manifest,
    load_sweep,
    read_json_artifact,
    read_table,
)
from mdreport.figures import KINDS, FigureSpec, RenderResult, predicted_overlay, render
from mdreport.summary import RunSummary, summarize, to_html

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "ArtifactParseError",
    "ArtifactSchemaError",
    "Diagnostic",
    "EmptyArtifactError",
    "FigureSpec",
    "KINDS",
    "MissingArtifactError",
    "RenderResult",
    "RunSummary",
    "Table",
    "load_curve",
    "load_diagnostic",
    "load_manifest",
    "load_sweep",
    "predicted_overlay",
    "read_json_artifact",
    "read_table",
    "render",
    "summarize",
    "to_html",
]
