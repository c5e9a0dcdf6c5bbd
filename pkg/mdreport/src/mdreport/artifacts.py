"""Readers and validators for the solver's on-disk artifact formats.

The file formats are the whole interface between the solver and this
package, so they are re-read here from scratch rather than through the
solver's own I/O code.  Two formats exist:

* CSV: optional ``# key: value`` metadata lines, one header row naming the
  columns, then float rows (written as ``%.17g``, read with ``float``).
* JSON: plain documents carrying a ``schema`` tag such as
  ``mdlab-diagnostic/1`` and, for per-run artifacts, a ``manifest_hash``
  back-reference to the run manifest.

Error taxonomy (all subclasses of :class:`ArtifactError`):

* :class:`MissingArtifactError` -- a required file does not exist.
* :class:`ArtifactParseError`   -- the file exists but is not even
  syntactically the claimed format; the message names the file (and line,
  for CSV).
* :class:`ArtifactSchemaError`  -- the file parses but lacks a required
  field or column, or carries the wrong ``schema`` tag; the message names
  file and field.
* :class:`EmptyArtifactError`   -- a table parsed fine but holds zero data
  rows, which downstream consumers (figures) must reject before acting.

Unknown keys are passed through untouched: the solver may grow its payloads
without breaking older report generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping

import numpy as np

DIAGNOSTIC_SCHEMA = "mdlab-diagnostic/1"
CURVE_SCHEMA = "mdlab-curve/1"
SWEEP_SCHEMA = "mdlab-sweep/1"
STATE_SCHEMA = "mdlab-state/1"
MANIFEST_SCHEMA = "mdlab-manifest/1"
SCF_SCHEMA = "mdlab-scf/1"
CERTIFICATE_SCHEMA = "mdlab-certificate/1"

#: the verdict vocabulary of diagnostic JSONs; "informational" marks
#: fit results that carry no claim and therefore cannot pass or fail
VERDICTS = ("pass", "fail", "not-applicable", "informational")

CURVE_COLUMNS = ("r", "value", "model_value")
SWEEP_COLUMNS = ("value", "converged", "e_over_m", "q0", "iterations", "defect")


class ArtifactError(Exception):
    """Base class for everything that can go wrong reading an artifact."""


class MissingArtifactError(ArtifactError):
    pass


class ArtifactParseError(ArtifactError):
    pass


class ArtifactSchemaError(ArtifactError):
    pass


class EmptyArtifactError(ArtifactError):
    pass


def _require(path: str | Path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise MissingArtifactError(f"required artifact does not exist: {p}")
    return p


# ------------------------------------------------------------------- JSON


def read_json_artifact(path: str | Path, schema: str | None = None) -> dict[str, Any]:
    """Read one JSON artifact, optionally demanding a particular schema tag."""
    p = _require(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ArtifactParseError(f"{p}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArtifactSchemaError(f"{p}: expected a JSON object at top level")
    if schema is not None:
        found = doc.get("schema")
        if found != schema:
            raise ArtifactSchemaError(f"{p}: schema is {found!r}, expected {schema!r}")
    return doc


@dataclass(frozen=True)
class Diagnostic:
    """One verdict document from a run's ``diagnostics/`` directory."""

    path: Path
    name: str
    claim: str | None
    verdict: str
    inputs: Mapping[str, Any]
    fitted: Mapping[str, Any]
    predicted: Mapping[str, Any]
    tolerance: Mapping[str, Any]
    manifest_hash: str

    @property
    def reason(self) -> str | None:
        """Why a not-applicable diagnostic does not apply (free text)."""
        value = self.inputs.get("reason")
        return None if value is None else str(value)


def load_diagnostic(path: str | Path) -> Diagnostic:
    doc = read_json_artifact(path, schema=DIAGNOSTIC_SCHEMA)
    p = Path(path)
    for key in ("diagnostic", "verdict", "inputs", "fitted", "predicted", "tolerance"):
        if key not in doc:
            raise ArtifactSchemaError(f"{p}: missing field {key!r}")
    for key in ("inputs", "fitted", "predicted", "tolerance"):
        if not isinstance(doc[key], dict):
            raise ArtifactSchemaError(f"{p}: field {key!r} must be an object")
    verdict = doc["verdict"]
    if verdict not in VERDICTS:
        raise ArtifactSchemaError(
            f"{p}: verdict {verdict!r} is not one of {', '.join(VERDICTS)}"
        )
    manifest_hash = doc.get("manifest_hash")
    if not isinstance(manifest_hash, str) or not manifest_hash:
        raise ArtifactSchemaError(f"{p}: missing field 'manifest_hash'")
    return Diagnostic(
        path=p,
        name=str(doc["diagnostic"]),
        claim=doc.get("claim"),
        verdict=verdict,
        inputs=doc["inputs"],
        fitted=doc["fitted"],
        predicted=doc["predicted"],
        tolerance=doc["tolerance"],
        manifest_hash=manifest_hash,
    )


def iter_diagnostics(diag_dir: str | Path) -> Iterator[Diagnostic]:
    """Yield every diagnostic in a directory, sorted by file name.

    A missing directory yields nothing (a solve-only run has no
    diagnostics); broken files raise as in :func:`load_diagnostic`.
    """
    d = Path(diag_dir)
    if not d.is_dir():
        return
    for p in sorted(d.glob("*.json")):
        yield load_diagnostic(p)


def load_manifest(path: str | Path) -> dict[str, Any]:
    doc = read_json_artifact(path, schema=MANIFEST_SCHEMA)
    p = Path(path)
    for key in ("config", "config_hash"):
        if key not in doc:
            raise ArtifactSchemaError(f"{p}: missing field {key!r}")
    if not isinstance(doc["config"], dict):
        raise ArtifactSchemaError(f"{p}: field 'config' must be an object")
    return doc


def manifest_physics(manifest: Mapping[str, Any], key: str, path: Path) -> float:
    """Fetch one physics parameter from a manifest's config echo."""
    physics = manifest.get("config", {}).get("physics")
    if not isinstance(physics, dict):
        raise ArtifactSchemaError(f"{path}: manifest config has no 'physics' section")
    if key not in physics:
        raise ArtifactSchemaError(f"{path}: no field 'physics.{key}' in manifest config")
    return float(physics[key])


# -------------------------------------------------------------------- CSV


@dataclass(frozen=True)
class Table:
    """A parsed CSV artifact: metadata lines plus named float columns."""

    path: Path
    meta: Mapping[str, str]
    columns: Mapping[str, np.ndarray] = field(repr=False)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise ArtifactSchemaError(f"{self.path}: no column {name!r}") from None

    @property
    def n_rows(self) -> int:
        return next(iter(self.columns.values())).shape[0] if self.columns else 0

    def require_columns(self, names: tuple[str, ...]) -> None:
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise ArtifactSchemaError(
                f"{self.path}: missing column(s) {', '.join(repr(n) for n in missing)}"
            )

    def require_rows(self) -> None:
        if self.n_rows == 0:
            raise EmptyArtifactError(f"{self.path}: table holds no data rows")


def read_table(path: str | Path, schema: str | None = None) -> Table:
    """Parse one CSV artifact; see the module docstring for the format."""
    p = _require(path)
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ArtifactParseError(f"{p}: not UTF-8 text: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        cells = line.split(",")
        if header is None:
            header = [c.strip() for c in cells]
            if any(not c for c in header):
                raise ArtifactParseError(f"{p}: line {lineno}: empty column name in header")
            continue
        if len(cells) != len(header):
            raise ArtifactParseError(
                f"{p}: line {lineno}: {len(cells)} cells for {len(header)} columns"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ArtifactParseError(f"{p}: line {lineno}: {exc}") from exc
    if header is None:
        raise ArtifactParseError(f"{p}: no header row found")
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    table = Table(
        path=p,
        meta=meta,
        columns={name: data[:, i] for i, name in enumerate(header)},
    )
    if schema is not None:
        found = table.meta.get("schema")
        if found != schema:
            raise ArtifactSchemaError(f"{p}: schema is {found!r}, expected {schema!r}")
    return table


def load_curve(path: str | Path) -> Table:
    """A fit-curve table: radius, data value, and the fitted model value."""
    table = read_table(path, schema=CURVE_SCHEMA)
    table.require_columns(CURVE_COLUMNS)
    return table


def load_sweep(path: str | Path) -> Table:
    """A parameter-sweep table; metadata names the swept parameter."""
    table = read_table(path, schema=SWEEP_SCHEMA)
    table.require_columns(SWEEP_COLUMNS)
    if "parameter" not in table.meta:
        raise ArtifactSchemaError(f"{table.path}: missing metadata key 'parameter'")
    return table


# ------------------------------------------------------------- formatting


def format_scalars(mapping: Mapping[str, Any]) -> str:
    """Compact ``key=value`` listing of the scalar entries of a payload block.

    Lists and nested objects (fit windows, dipole vectors) are skipped: the
    captions and table cells this feeds want headline numbers, and the full
    payload is always one click away in the JSON itself.
    """
    parts: list[str] = []
    for key in sorted(mapping):
        value = mapping[key]
        if isinstance(value, bool):
            parts.append(f"{key}={'true' if value else 'false'}")
        elif isinstance(value, (int, float)):
            parts.append(f"{key}={value:.6g}")
        elif isinstance(value, str) and key != "reason":
            parts.append(f"{key}={value}")
    return ", ".join(parts)
