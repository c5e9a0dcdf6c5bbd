"""Figure rendering: four plot kinds over the solver's curve and sweep tables.

Overlay discipline: the dashed "predicted" curve in any figure is evaluated
from the parameter values found in the diagnostic JSON's ``predicted`` block,
with the ``fitted`` block supplying only whatever the prediction leaves free
(typically the overall amplitude).  Nothing is re-derived from physics here;
if the JSON does not predict a curve, none is drawn.

Plot kinds (:data:`KINDS`):

* ``log-linear-decay``  -- tail amplitude vs radius, log y: exponential and
  stretched-exponential envelopes appear as straight / bowed lines.
* ``log-log-power``     -- |value| vs radius, log-log: power laws appear as
  straight lines (staticity rate, phase-remainder terms).
* ``shell-diagnostic``  -- per-shell extractions vs shell radius with the
  predicted constant (energy ratio, monopole charge) as a horizontal line.
* ``sweep-heatmap``     -- E/m over (swept parameter, one row label per
  input sweep table); unconverged cells are masked out.

Rendering never writes a file when the inputs are broken or empty: all
loading and validation happens before a figure is even created.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from mdreport.artifacts import (
    ArtifactSchemaError,
    Diagnostic,
    MissingArtifactError,
    Table,
    format_scalars,
    load_curve,
    load_diagnostic,
    load_manifest,
    load_sweep,
    manifest_physics,
)

KINDS = ("log-linear-decay", "log-log-power", "shell-diagnostic", "sweep-heatmap")

#: rcParams pinned during rendering so repeated runs emit identical bytes
_DETERMINISTIC_RC = {"svg.hashsalt": "mdreport"}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input table(s), plot kind, overlay source, output path.

    ``data`` holds one curve table for the single-series kinds and one sweep
    table per heatmap row for ``sweep-heatmap`` (each row's label is read
    from the ``manifest.json`` next to its table, under ``physics.row_key``).
    ``diagnostic`` points at the JSON whose ``predicted`` block drives the
    overlay; without it only the data and its fitted model are drawn.
    """

    kind: str
    data: tuple[Path, ...]
    out: Path
    diagnostic: Path | None = None
    title: str | None = None
    row_key: str = "q_interior"
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; expected one of {KINDS}")
        paths = tuple(Path(p) for p in self.data)
        if not paths:
            raise ValueError("FigureSpec needs at least one input table")
        object.__setattr__(self, "data", paths)
        object.__setattr__(self, "out", Path(self.out))
        if self.diagnostic is not None:
            object.__setattr__(self, "diagnostic", Path(self.diagnostic))


@dataclass(frozen=True)
class RenderResult:
    path: Path
    caption: str


# ------------------------------------------------------------ overlay model


def _merged_param(diag: Diagnostic, key: str) -> float:
    """A model parameter: the predicted value if claimed, else the fitted one."""
    merged = {**diag.fitted, **diag.predicted}
    if key not in merged:
        raise ArtifactSchemaError(
            f"{diag.path}: neither 'predicted' nor 'fitted' defines {key!r}, "
            f"needed to evaluate the overlay"
        )
    return float(merged[key])


def predicted_overlay(diag: Diagnostic, r: np.ndarray) -> tuple[str, np.ndarray] | None:
    """Evaluate the curve a diagnostic's ``predicted`` block describes.

    Returns ``None`` when the block predicts no curve (empty, or a pure
    scalar relation like a sign condition).  The label states which
    parameters came from the prediction.
    """
    predicted = diag.predicted
    if not predicted:
        return None
    merged = {**diag.fitted, **diag.predicted}
    r = np.asarray(r, dtype=float)

    if "model" in merged and any(k in predicted for k in ("model", "rate", "power", "coefficient")):
        model = str(merged["model"])
        coefficient = _merged_param(diag, "coefficient")
        rate = _merged_param(diag, "rate")
        power = _merged_param(diag, "power")
        if model in ("exponential", "envelope"):
            values = coefficient * np.exp(-rate * r) / r**power
        elif model == "stretched":
            values = coefficient * np.exp(-rate * np.sqrt(r)) / r**power
        elif model == "power":
            values = coefficient * r**-power
        else:
            raise ArtifactSchemaError(f"{diag.path}: unknown overlay model {model!r}")
        claimed = ", ".join(f"{k}={float(predicted[k]):.6g}" for k in sorted(predicted) if k != "model")
        return f"predicted {model} ({claimed})", values

    if all(k in predicted for k in ("c1", "c2", "c3")):
        c1, c2, c3 = (float(predicted[k]) for k in ("c1", "c2", "c3"))
        values = c1 * r**-0.5 + c2 / r + c3 * r**-1.5
        return f"predicted expansion (c1={c1:.6g}, c2={c2:.6g}, c3={c3:.6g})", values

    if "kappa" in predicted:
        coefficient = _merged_param(diag, "coefficient")
        kappa = float(predicted["kappa"])
        return f"predicted power law (kappa={kappa:.6g})", coefficient * r**-kappa

    for key, label in (("e_over_m", "E/m"), ("q0", "q0")):
        if key in predicted:
            value = float(predicted[key])
            return f"predicted {label} = {value:.9g}", np.full_like(r, value)

    return None


def _caption(diag: Diagnostic | None, tail: str) -> str:
    if diag is None:
        return tail
    claim = f" [{diag.claim}]" if diag.claim else ""
    parts = [f"{diag.name}{claim}: {diag.verdict}"]
    if diag.verdict == "not-applicable" and diag.reason:
        parts.append(diag.reason)
    else:
        fitted = format_scalars(diag.fitted)
        predicted = format_scalars(diag.predicted)
        if fitted:
            parts.append(f"fitted {fitted}")
        if predicted:
            parts.append(f"predicted {predicted}")
    if tail:
        parts.append(tail)
    return "; ".join(parts)


# ----------------------------------------------------------------- drawing


def _positive(r: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = v > 0.0
    return r[mask], v[mask]


def _draw_series(ax: plt.Axes, kind: str, table: Table, diag: Diagnostic | None) -> None:
    r = table["r"]
    value = table["value"]
    model = table["model_value"]
    if kind == "log-linear-decay":
        ax.semilogy(*_positive(r, value), ".", ms=4, label="data")
        ax.semilogy(*_positive(r, model), "-", lw=1.2, label="fitted model")
    elif kind == "log-log-power":
        ax.loglog(*_positive(r, np.abs(value)), ".", ms=4, label="|data|")
        ax.loglog(*_positive(r, np.abs(model)), "-", lw=1.2, label="fitted model")
    else:  # shell-diagnostic
        ax.semilogx(r, value, "o", ms=5, label="per-shell extraction")
        ax.semilogx(r, model, "-", lw=1.2, label="fitted value")
    if diag is not None:
        overlay = predicted_overlay(diag, r)
        if overlay is not None:
            label, values = overlay
            if kind == "log-log-power":
                values = np.abs(values)
            if kind in ("log-linear-decay", "log-log-power"):
                ro, vo = _positive(r, values)
            else:
                ro, vo = r, values
            ax.plot(ro, vo, "--", lw=1.4, label=label)
    ax.set_xlabel("r")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)


def _edges(centers: np.ndarray) -> np.ndarray:
    """Cell edges around (strictly increasing) cell centers for pcolormesh."""
    c = np.asarray(centers, dtype=float)
    if c.size == 1:
        half = max(0.5, 0.05 * abs(c[0]))
        return np.array([c[0] - half, c[0] + half])
    mids = 0.5 * (c[:-1] + c[1:])
    return np.concatenate(([2.0 * c[0] - mids[0]], mids, [2.0 * c[-1] - mids[-1]]))


def _load_heatmap(spec: FigureSpec) -> tuple[np.ndarray, np.ndarray, np.ma.MaskedArray, str]:
    rows: list[tuple[float, Table]] = []
    parameter: str | None = None
    for path in spec.data:
        table = load_sweep(path)
        table.require_rows()
        if parameter is None:
            parameter = table.meta["parameter"]
        elif table.meta["parameter"] != parameter:
            raise ArtifactSchemaError(
                f"{path}: sweeps over {table.meta['parameter']!r} cannot share a heatmap "
                f"with sweeps over {parameter!r}"
            )
        manifest_path = path.parent / "manifest.json"
        if not manifest_path.is_file():
            raise MissingArtifactError(
                f"sweep heatmap needs {manifest_path} to label its row "
                f"(physics.{spec.row_key})"
            )
        label = manifest_physics(load_manifest(manifest_path), spec.row_key, manifest_path)
        rows.append((label, table))
    assert parameter is not None
    rows.sort(key=lambda item: item[0])
    labels = np.array([label for label, _ in rows])
    if np.any(np.diff(labels) <= 0.0):
        raise ArtifactSchemaError(
            f"heatmap rows need distinct physics.{spec.row_key} values, got "
            + ", ".join(f"{v:g}" for v in labels)
        )
    values = rows[0][1]["value"]
    for _, table in rows[1:]:
        if not np.array_equal(table["value"], values):
            raise ArtifactSchemaError(
                f"{table.path}: swept values differ from {rows[0][1].path}; "
                f"heatmap rows must share one grid"
            )
    order = np.argsort(values)
    z = np.vstack([table["e_over_m"][order] for _, table in rows])
    converged = np.vstack([table["converged"][order] for _, table in rows])
    z = np.ma.masked_where(~np.isfinite(z) | (converged == 0.0), z)
    return values[order], labels, z, parameter


def render(spec: FigureSpec) -> RenderResult:
    """Draw one figure; returns the image path and a deterministic caption."""
    diag = load_diagnostic(spec.diagnostic) if spec.diagnostic is not None else None

    if spec.kind == "sweep-heatmap":
        values, labels, z, parameter = _load_heatmap(spec)
        n_masked = int(np.ma.count_masked(z))
        caption = _caption(
            diag,
            f"E/m over ({parameter}, {spec.row_key}) from {z.shape[0]} sweep(s) of "
            f"{z.shape[1]} cells; {n_masked} unconverged cell(s) masked",
        )
        title = spec.title or f"E/m over ({parameter}, {spec.row_key})"
        with matplotlib.rc_context(_DETERMINISTIC_RC):
            fig, ax = plt.subplots(figsize=(6.4, 4.2))
            try:
                cmap = matplotlib.colormaps["viridis"].copy()
                cmap.set_bad("0.85")
                mesh = ax.pcolormesh(_edges(values), _edges(labels), z, cmap=cmap)
                fig.colorbar(mesh, ax=ax, label="E/m")
                ax.set_xlabel(parameter)
                ax.set_ylabel(spec.row_key)
                ax.set_title(title, fontsize=10)
                _save(fig, spec)
            finally:
                plt.close(fig)
        return RenderResult(spec.out, caption)

    if len(spec.data) != 1:
        raise ValueError(f"plot kind {spec.kind!r} takes exactly one input table")
    table = load_curve(spec.data[0])
    table.require_rows()
    name = diag.name if diag is not None else table.meta.get("diagnostic", spec.data[0].stem)
    caption = _caption(diag, f"{table.n_rows} samples")
    title = spec.title or name
    with matplotlib.rc_context(_DETERMINISTIC_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        try:
            _draw_series(ax, spec.kind, table, diag)
            ax.set_title(title, fontsize=10)
            _save(fig, spec)
        finally:
            plt.close(fig)
    return RenderResult(spec.out, caption)


def _save(fig: plt.Figure, spec: FigureSpec) -> None:
    spec.out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # the SVG backend stamps the current date unless told not to; PNG has no
    # timestamp, so both formats come out byte-identical across reruns
    metadata = {"Date": None} if spec.out.suffix.lower() == ".svg" else None
    fig.savefig(spec.out, dpi=spec.dpi, metadata=metadata)
