"""Deterministic on-disk artifacts: canonical JSON, annotated CSV, manifest.

Everything here is built around one promise: two runs with the same
configuration and seed produce byte-identical data files.  That requires
owning the float formatting instead of delegating it, so this module emits
JSON with its own small writer (sorted keys, ``%.17g`` floats -- 17
significant digits round-trips any double exactly) rather than json.dumps,
whose C encoder hard-wires ``repr`` formatting.

Layout conventions:

* JSON documents carry a ``schema`` tag and a ``manifest_hash`` back-reference.
* CSV files start with ``#``-prefixed metadata lines (schema, manifest hash,
  free-form annotations), then one header row, then ``%.17g`` data rows.
* ``manifest.json`` echoes the full effective config (defaults applied and
  recorded separately), library versions, and the wall time.  Wall time is
  the single intentionally non-reproducible field; comparisons of a run
  directory should drop it (see ``manifest_fingerprint``).
* writes are atomic (temp file + rename), so a crashed run never leaves a
  half-written artifact that parses.
"""

from __future__ import annotations

import hashlib
import os
import platform
import tempfile
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .config import ParsedConfig, config_sections

__all__ = [
    "MANIFEST_SCHEMA",
    "CsvDocument",
    "canonical_json",
    "config_hash",
    "build_manifest",
    "manifest_fingerprint",
    "read_csv",
    "read_json",
    "write_bytes_atomic",
    "write_csv",
    "write_json",
]

MANIFEST_SCHEMA = "mdlab-manifest/1"


# ------------------------------------------------------------ canonical JSON


def _fmt_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x == float("inf"):
        return '"inf"'
    if x == float("-inf"):
        return '"-inf"'
    text = "%.17g" % x
    # keep the JSON value a number, not an int, when it came from a float
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _emit(obj: Any, indent: int, parts: list[str]) -> None:
    pad = "  " * indent
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(_escape(obj))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt_float(float(obj)))
    elif isinstance(obj, Mapping):
        keys = list(obj.keys())
        if any(not isinstance(k, str) for k in keys):
            raise TypeError("JSON object keys must be strings")
        if not keys:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, k in enumerate(sorted(keys)):
            parts.append(f'{pad}  {_escape(k)}: ')
            _emit(obj[k], indent + 1, parts)
            parts.append(",\n" if i + 1 < len(keys) else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, item in enumerate(seq):
            parts.append(pad + "  ")
            _emit(item, indent + 1, parts)
            parts.append(",\n" if i + 1 < len(seq) else "\n")
        parts.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to canonical JSON")


def canonical_json(obj: Any) -> str:
    """Render *obj* as deterministic JSON text (sorted keys, %.17g floats)."""
    parts: list[str] = []
    _emit(obj, 0, parts)
    parts.append("\n")
    return "".join(parts)


def read_json(path: str | Path) -> Any:
    import json

    return json.loads(Path(path).read_text(encoding="utf-8"))


# ------------------------------------------------------------- atomic writes


def write_bytes_atomic(path: str | Path, data: bytes) -> None:
    """Write *data* to *path* via a temp file + rename in the same directory."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=p.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, p)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path: str | Path, obj: Any) -> None:
    write_bytes_atomic(path, canonical_json(obj).encode("utf-8"))


# ----------------------------------------------------------------------- CSV


class CsvDocument:
    """A parsed annotated CSV: metadata comments plus named float columns."""

    def __init__(self, meta: dict[str, str], columns: dict[str, np.ndarray]):
        self.meta = meta
        self.columns = columns

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def write_csv(
    path: str | Path,
    columns: Mapping[str, Sequence[float] | np.ndarray],
    meta: Mapping[str, str] | None = None,
) -> None:
    """Write named columns with ``#`` metadata lines, all floats as %.17g."""
    names = list(columns.keys())
    if not names:
        raise ValueError("write_csv needs at least one column")
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    n = arrays[0].shape[0]
    for name, arr in zip(names, arrays):
        if arr.ndim != 1 or arr.shape[0] != n:
            raise ValueError(f"column {name!r} is not a length-{n} 1-d array")
    lines: list[str] = []
    for key, value in (meta or {}).items():
        if "\n" in str(value):
            raise ValueError(f"metadata value for {key!r} contains a newline")
        lines.append(f"# {key}: {value}")
    lines.append(",".join(names))
    for i in range(n):
        lines.append(",".join("%.17g" % arr[i] for arr in arrays))
    write_bytes_atomic(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_csv(path: str | Path) -> CsvDocument:
    """Read a CSV written by :func:`write_csv` (metadata + float columns)."""
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            continue
        rows.append([float(c) for c in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row found")
    data = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return CsvDocument(meta, {name: data[:, j].copy() for j, name in enumerate(header)})


# ------------------------------------------------------------------ manifest


def _hashable_config(sections: Mapping[str, Any]) -> dict[str, Any]:
    """Config echo with location-only fields removed.

    Where a run writes its artifacts must not change what is in them, so
    ``run.out_dir`` is excluded from the hashes that data files reference.
    """
    out = {sec: dict(keys) for sec, keys in sections.items()}
    out.get("run", {}).pop("out_dir", None)
    return out


def config_hash(parsed: ParsedConfig) -> str:
    """sha256 of the canonical full-config JSON (defaults applied)."""
    text = canonical_json(_hashable_config(config_sections(parsed.config)))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _versions() -> dict[str, str]:
    import scipy

    from . import __version__

    versions = {
        "mdlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }
    try:
        import numba

        versions["numba"] = numba.__version__
    except ImportError:
        versions["numba"] = "absent"
    return versions


def build_manifest(parsed: ParsedConfig, wall_time_s: float) -> dict[str, Any]:
    """Assemble the run manifest: config echo, defaults, versions, timing."""
    return {
        "schema": MANIFEST_SCHEMA,
        "config": config_sections(parsed.config),
        "config_hash": config_hash(parsed),
        "defaulted": {k: v for k, v in sorted(parsed.defaulted.items())},
        "config_origin": parsed.origin,
        "versions": _versions(),
        "wall_time_s": wall_time_s,
    }


def manifest_fingerprint(manifest: Mapping[str, Any]) -> str:
    """Hash of a manifest with its non-reproducible fields removed.

    Dropped: ``wall_time_s`` (timing), ``config_origin`` (where the config
    file happened to live), and the echoed ``run.out_dir``.  Two runs of the
    same configuration and seed agree on this fingerprint, and it is the
    value every data file records in its ``manifest``/``manifest_hash``
    back-reference.
    """
    stripped = {
        k: v for k, v in manifest.items() if k not in ("wall_time_s", "config_origin")
    }
    if "config" in stripped:
        stripped["config"] = _hashable_config(stripped["config"])
    if "defaulted" in stripped:
        stripped["defaulted"] = {
            k: v for k, v in stripped["defaulted"].items() if k != "run.out_dir"
        }
    return hashlib.sha256(canonical_json(stripped).encode("utf-8")).hexdigest()
