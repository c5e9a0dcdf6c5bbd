"""Run configuration: a strict INI dialect with line-accurate errors.

The on-disk format is deliberately small: UTF-8 text, ``[section]`` headers,
``key = value`` entries, full-line comments starting with ``#`` or ``;``.
There is no interpolation, no line continuation, and no inline comment
stripping -- a stray ``# ...`` after a value is a type error, on purpose,
so that a config file never silently means something else.

Parsing is strict in both directions:

* every key the file mentions must exist in the schema (typo protection), and
* every value the run uses that the file does *not* mention is recorded as a
  default, so the output manifest can echo the complete effective
  configuration rather than just the overrides.

All diagnostics carry line numbers; a duplicate key reports both lines.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

__all__ = [
    "MODES",
    "SWEEP_PARAMETERS",
    "ConfigError",
    "FieldSpec",
    "ParsedConfig",
    "RunConfig",
    "SCHEMA",
    "apply_overrides",
    "config_sections",
    "parse_config",
    "parse_config_text",
]

MODES = ("solve", "sweep", "verify", "fit", "report-data")

# Scalar knobs a sweep may vary; each maps onto one self-consistent-field input.
SWEEP_PARAMETERS = ("e", "q_interior", "q_psi", "mix", "self_source")


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


# --------------------------------------------------------------------- schema


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean (true/false), got {raw!r}")


def _parse_float(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("expected a finite number")
    return value


def _parse_float_list(raw: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",")]
    if not all(parts):
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(_parse_float(p) for p in parts)


_PARSERS: dict[str, Callable[[str], Any]] = {
    "str": str,
    "int": int,
    "float": _parse_float,
    "bool": _parse_bool,
    "floats": _parse_float_list,
}


@dataclass(frozen=True)
class FieldSpec:
    """One schema entry: attribute name, value type, and default."""

    attr: str
    type: str
    default: Any
    required_modes: tuple[str, ...] = ()


# section -> key -> spec.  Attribute names are flat on RunConfig; keys reused
# across sections get a section prefix there.
SCHEMA: dict[str, dict[str, FieldSpec]] = {
    "run": {
        "mode": FieldSpec("mode", "str", None, required_modes=MODES),
        "seed": FieldSpec("seed", "int", 0),
        "threads": FieldSpec("threads", "int", 1),
        "out_dir": FieldSpec("out_dir", "str", "run-out"),
    },
    "physics": {
        "m": FieldSpec("m", "float", 1.0),
        "e": FieldSpec("e", "float", 0.8),
        "q_interior": FieldSpec("q_interior", "float", 0.7),
        "q_psi": FieldSpec("q_psi", "float", 0.45),
        "kappa": FieldSpec("kappa", "int", -1),
        "self_source": FieldSpec("self_source", "float", 1.0),
    },
    "grid": {
        "r_min": FieldSpec("r_min", "float", 1e-4),
        "r_max": FieldSpec("r_max", "float", 300.0),
        "n_r": FieldSpec("n_r", "int", 4000),
    },
    "scf": {
        "mix": FieldSpec("mix", "float", 0.6),
        "max_iter": FieldSpec("max_iter", "int", 80),
        "tol": FieldSpec("tol", "float", 1e-12),
        "defect_tol": FieldSpec("defect_tol", "float", 1e-10),
        "bracket_lo": FieldSpec("bracket_lo", "float", -0.95),
        "bracket_hi": FieldSpec("bracket_hi", "float", 0.999),
        "n_scan": FieldSpec("n_scan", "int", 61),
        "target_nodes": FieldSpec("target_nodes", "int", 0),
        "embed": FieldSpec("embed", "bool", True),
        "embed_n": FieldSpec("embed_n", "int", 64),
    },
    "sweep": {
        "parameter": FieldSpec("sweep_parameter", "str", "", required_modes=("sweep",)),
        "values": FieldSpec("sweep_values", "floats", (), required_modes=("sweep",)),
    },
    "fit": {
        "run_dir": FieldSpec("fit_run_dir", "str", "", required_modes=("fit",)),
        "k_fraction": FieldSpec("k_fraction", "float", 0.9),
        "decades": FieldSpec("fit_decades", "float", 1.0),
        "window_lo": FieldSpec("window_lo", "float", 0.0),
        "window_hi": FieldSpec("window_hi", "float", 0.0),
    },
    "verify": {
        "n_dyads": FieldSpec("verify_n_dyads", "int", 200),
        "n_fields": FieldSpec("verify_n_fields", "int", 5),
        "grid_n": FieldSpec("verify_grid_n", "int", 24),
    },
}


@dataclass
class RunConfig:
    """Effective configuration of one CLI run, defaults applied."""

    mode: str
    seed: int = 0
    threads: int = 1
    out_dir: str = "run-out"

    m: float = 1.0
    e: float = 0.8
    q_interior: float = 0.7
    q_psi: float = 0.45
    kappa: int = -1
    self_source: float = 1.0

    r_min: float = 1e-4
    r_max: float = 300.0
    n_r: int = 4000

    mix: float = 0.6
    max_iter: int = 80
    tol: float = 1e-12
    defect_tol: float = 1e-10
    bracket_lo: float = -0.95
    bracket_hi: float = 0.999
    n_scan: int = 61
    target_nodes: int = 0
    embed: bool = True
    embed_n: int = 64

    sweep_parameter: str = ""
    sweep_values: tuple[float, ...] = ()

    fit_run_dir: str = ""
    k_fraction: float = 0.9
    fit_decades: float = 1.0
    window_lo: float = 0.0
    window_hi: float = 0.0

    verify_n_dyads: int = 200
    verify_n_fields: int = 5
    verify_grid_n: int = 24


@dataclass
class ParsedConfig:
    """Parse result: the config plus provenance needed by the manifest."""

    config: RunConfig
    #: fully-qualified "section.key" -> value for every key the file omitted
    defaulted: dict[str, Any]
    #: fully-qualified "section.key" -> line number for every key the file set
    source_lines: dict[str, int]
    origin: str


def config_sections(cfg: RunConfig) -> dict[str, dict[str, Any]]:
    """Nest a flat RunConfig back into its schema sections (manifest echo)."""
    out: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        out[section] = {key: getattr(cfg, spec.attr) for key, spec in keys.items()}
    return out


# --------------------------------------------------------------------- parser


def _scan(text: str, origin: str) -> dict[tuple[str, str], tuple[str, int]]:
    """Tokenize INI text into {(section, key): (raw value, line number)}."""
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section_lines: dict[str, int] = {}
    section: str | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{origin}: line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in SCHEMA:
                known = ", ".join(sorted(SCHEMA))
                raise ConfigError(
                    f"{origin}: line {lineno}: unknown section [{section}] (known: {known})"
                )
            if section in section_lines:
                raise ConfigError(
                    f"{origin}: line {lineno}: duplicate section [{section}] "
                    f"(first opened on line {section_lines[section]})"
                )
            section_lines[section] = lineno
            continue
        if "=" not in line:
            raise ConfigError(
                f"{origin}: line {lineno}: expected 'key = value' or a section header, got {line!r}"
            )
        if section is None:
            raise ConfigError(f"{origin}: line {lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{origin}: line {lineno}: empty key")
        if key not in SCHEMA[section]:
            known = ", ".join(sorted(SCHEMA[section]))
            raise ConfigError(
                f"{origin}: line {lineno}: unknown key '{key}' in [{section}] (known: {known})"
            )
        if (section, key) in entries:
            first = entries[(section, key)][1]
            raise ConfigError(
                f"{origin}: line {lineno}: duplicate key '{section}.{key}' "
                f"(already set on line {first})"
            )
        entries[(section, key)] = (value, lineno)
    return entries


def _validate(cfg: RunConfig, lines: dict[str, int], origin: str) -> None:
    def where(name: str) -> str:
        line = lines.get(name)
        return f"{origin}: line {line}: " if line is not None else f"{origin}: "

    def demand(ok: bool, name: str, msg: str) -> None:
        if not ok:
            raise ConfigError(f"{where(name)}'{name}' {msg}")

    demand(cfg.mode in MODES, "run.mode", f"must be one of {', '.join(MODES)}; got {cfg.mode!r}")
    demand(cfg.seed >= 0, "run.seed", "must be non-negative")
    demand(cfg.threads >= 1, "run.threads", "must be at least 1")

    demand(cfg.m > 0, "physics.m", "must be positive")
    demand(cfg.kappa != 0, "physics.kappa", "must be a nonzero integer")
    demand(0.0 <= cfg.self_source <= 1.0, "physics.self_source", "must lie in [0, 1]")

    demand(cfg.r_min > 0, "grid.r_min", "must be positive")
    demand(cfg.r_max > cfg.r_min, "grid.r_max", "must exceed grid.r_min")
    demand(cfg.n_r >= 16, "grid.n_r", "must be at least 16")

    demand(0.0 < cfg.mix <= 1.0, "scf.mix", "must lie in (0, 1]")
    demand(cfg.max_iter >= 1, "scf.max_iter", "must be at least 1")
    demand(cfg.tol > 0, "scf.tol", "is a tolerance and must be positive")
    demand(cfg.defect_tol > 0, "scf.defect_tol", "is a tolerance and must be positive")
    demand(cfg.bracket_lo < cfg.bracket_hi, "scf.bracket_hi", "must exceed scf.bracket_lo")
    demand(cfg.n_scan >= 3, "scf.n_scan", "must be at least 3")
    demand(cfg.target_nodes >= 0, "scf.target_nodes", "must be non-negative")
    demand(cfg.embed_n >= 8, "scf.embed_n", "must be at least 8")

    demand(0.0 < cfg.k_fraction < 1.0, "fit.k_fraction", "must lie strictly in (0, 1)")
    demand(cfg.fit_decades > 0, "fit.decades", "must be positive")
    demand(cfg.window_lo >= 0, "fit.window_lo", "must be non-negative (0 = automatic)")
    demand(
        cfg.window_hi == 0.0 or cfg.window_hi > cfg.window_lo,
        "fit.window_hi",
        "must exceed fit.window_lo (or be 0 for automatic)",
    )

    demand(cfg.verify_n_dyads >= 1, "verify.n_dyads", "must be at least 1")
    demand(cfg.verify_n_fields >= 1, "verify.n_fields", "must be at least 1")
    demand(cfg.verify_grid_n >= 8, "verify.grid_n", "must be at least 8")

    if cfg.mode == "sweep":
        demand(
            cfg.sweep_parameter in SWEEP_PARAMETERS,
            "sweep.parameter",
            f"must be one of {', '.join(SWEEP_PARAMETERS)}; got {cfg.sweep_parameter!r}",
        )
        demand(len(cfg.sweep_values) >= 1, "sweep.values", "must list at least one value")


def parse_config_text(text: str, origin: str = "<config>") -> ParsedConfig:
    """Parse and validate configuration text.  Raises ConfigError."""
    entries = _scan(text, origin)

    values: dict[str, Any] = {}
    defaulted: dict[str, Any] = {}
    source_lines: dict[str, int] = {}
    for section, keys in SCHEMA.items():
        for key, spec in keys.items():
            name = f"{section}.{key}"
            if (section, key) in entries:
                raw, lineno = entries[(section, key)]
                source_lines[name] = lineno
                try:
                    values[spec.attr] = _PARSERS[spec.type](raw)
                except ValueError as exc:
                    raise ConfigError(
                        f"{origin}: line {lineno}: bad value for '{name}': {exc}"
                    ) from None
            else:
                values[spec.attr] = spec.default
                defaulted[name] = spec.default

    if values["mode"] is None:
        raise ConfigError(f"{origin}: missing required key 'run.mode' (no [run] section entry)")
    mode = values["mode"]
    for section, keys in SCHEMA.items():
        for key, spec in keys.items():
            name = f"{section}.{key}"
            if mode in spec.required_modes and name in defaulted and spec.default in (None, "", ()):
                raise ConfigError(
                    f"{origin}: missing required key '{name}' for mode '{mode}'"
                )

    defaulted.pop("run.mode", None)  # required, so never truly defaulted
    cfg = RunConfig(**values)
    _validate(cfg, source_lines, origin)
    return ParsedConfig(config=cfg, defaulted=defaulted, source_lines=source_lines, origin=origin)


def parse_config(path: str | Path) -> ParsedConfig:
    """Read and parse a configuration file (UTF-8)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{p}: not valid UTF-8: {exc}") from None
    return parse_config_text(text, origin=str(p))


def apply_overrides(
    parsed: ParsedConfig,
    *,
    out_dir: str | None = None,
    seed: int | None = None,
    threads: int | None = None,
) -> ParsedConfig:
    """Fold command-line overrides into a parsed config (new object).

    Overridden keys are removed from the defaulted record: the manifest
    echoes what the run actually used, and these values came from flags,
    not from schema defaults.
    """
    cfg = dataclasses.replace(parsed.config)
    defaulted = dict(parsed.defaulted)
    for name, attr, value in (
        ("run.out_dir", "out_dir", out_dir),
        ("run.seed", "seed", seed),
        ("run.threads", "threads", threads),
    ):
        if value is not None:
            setattr(cfg, attr, value)
            defaulted.pop(name, None)
    _validate(cfg, parsed.source_lines, parsed.origin)
    return ParsedConfig(cfg, defaulted, dict(parsed.source_lines), parsed.origin)
