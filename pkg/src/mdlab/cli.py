"""Command-line driver: config in, reproducible artifact directory out.

One entry point, five modes selected by ``run.mode`` in the config file:

* ``solve``        -- one self-consistent bound state; writes ``scf.json``,
                      ``state.csv``, and (by default) an embedding
                      certificate ``certificate.json``.
* ``sweep``        -- a family of solves over one varied parameter; each cell
                      is persisted as soon as it finishes (``cells/*.json``),
                      then summarized in ``sweep.csv``.
* ``verify``       -- the seeded algebraic identity suite (dyad/tetrad
                      relations, sign conventions, dual first-order
                      assemblies on random smooth fields); ``verify.json``.
* ``fit``          -- tail diagnostics of a finished solve directory:
                      decay envelopes, comparison bound, shell diagnostic,
                      staticity rate, multipole extraction, threshold
                      scale checks; ``diagnostics/*.json`` + ``curves/*.csv``.
* ``report-data``  -- ``solve`` followed by ``fit`` into one directory: the
                      complete data product consumed by report tooling.

Exit codes: 0 success, 1 usage/configuration error, 2 a solver failed to
converge or a verification gate failed (partial artifacts are still written).

Determinism: all artifacts are byte-identical across repeated runs with the
same config and seed, except ``manifest.json``, whose single ``wall_time_s``
field is timing.  Every data file carries the manifest fingerprint (the
manifest hash with that field removed), so artifacts and manifest can be
matched up after the fact.

The JSON diagnostics carry ``claim`` keys naming the headline statements
they test ("theorem-1", "theorem-3", "theorem-4", "theorem-5", "lemma-6");
these are row labels for the downstream summary table, fixed here so that
every producer and consumer agrees on the spelling.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .asymptotics import (
    DIAGNOSTIC_SCHEMA,
    charge_and_dipole,
    charge_tail_scale,
    comparison_bound_radial,
    fit_decay,
    limit_formula_radial,
    phase_expansion_fit,
    staticity_check,
    staticity_radial,
    tail_window,
)
from .config import ConfigError, ParsedConfig, RunConfig, apply_overrides, parse_config
from .radial import RadialProblem, RadialSolution, SeedError, embed_check
from .scf import ScfConfig, ScfResult, scf_solve
from .serialize import (
    build_manifest,
    manifest_fingerprint,
    read_csv,
    read_json,
    write_csv,
    write_json,
)

__all__ = ["main", "EXIT_OK", "EXIT_USAGE", "EXIT_NOT_CONVERGED"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

# claim labels used as row keys in downstream summaries
CLAIM_LIMIT = "theorem-1"
CLAIM_BOUND = "theorem-3"
CLAIM_STATIC = "theorem-4"
CLAIM_TAIL = "theorem-5"
CLAIM_PHASE = "lemma-6"

_THRESHOLD_RTOL = 1e-9  # |E| this close to m counts as on-threshold


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the documented usage code."""

    def error(self, message: str) -> "NoReturn":  # type: ignore[name-defined]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _scf_config(cfg: RunConfig) -> ScfConfig:
    return ScfConfig(
        m=cfg.m,
        e=cfg.e,
        q_interior=cfg.q_interior,
        q_psi=cfg.q_psi,
        r_min=cfg.r_min,
        r_max=cfg.r_max,
        n_r=cfg.n_r,
        kappa=cfg.kappa,
        bracket=(cfg.bracket_lo, cfg.bracket_hi),
        n_scan=cfg.n_scan,
        target_nodes=cfg.target_nodes,
        mix=cfg.mix,
        max_iter=cfg.max_iter,
        tol=cfg.tol,
        defect_tol=cfg.defect_tol,
        self_source=cfg.self_source,
    )


def _csv_meta(schema: str, fingerprint: str, **extra: str) -> dict[str, str]:
    meta = {"schema": schema, "manifest": fingerprint}
    meta.update(extra)
    return meta


def _trace_rows(res: ScfResult) -> list[dict[str, Any]]:
    return [
        {"iteration": s.iteration, "E": s.E, "delta_a0": s.delta_a0, "defect": s.defect}
        for s in res.trace
    ]


def _scf_json(res: ScfResult, fingerprint: str) -> dict[str, Any]:
    cfg = res.config
    doc: dict[str, Any] = {
        "schema": "mdlab-scf/1",
        "manifest_hash": fingerprint,
        "converged": res.converged,
        "message": res.message,
        "iterations": res.iterations,
        "m": cfg.m,
        "e": cfg.e,
        "q_interior": cfg.q_interior,
        "q_psi": cfg.q_psi,
        "kappa": cfg.kappa,
        "self_source": cfg.self_source,
        "trace": _trace_rows(res),
    }
    if res.converged:
        assert res.E is not None and res.solution is not None
        doc.update(
            {
                "E": res.E,
                "e_over_m": res.E / cfg.m,
                "n_nodes": res.solution.n_nodes,
                "q0_bookkeeping": res.q0_bookkeeping,
                "q0_tail": res.q0_tail,
                "charge_consistency": res.charge_consistency(),
                "defect": res.defect,
            }
        )
    return doc


def _failed_result(cfg: ScfConfig, exc: Exception) -> ScfResult:
    return ScfResult(
        converged=False,
        message=f"{type(exc).__name__}: {exc}",
        config=cfg,
        iterations=0,
    )


def _run_solve(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    scf_cfg = _scf_config(cfg)
    try:
        res = scf_solve(scf_cfg)
    except (SeedError, RuntimeError, ValueError) as exc:
        res = _failed_result(scf_cfg, exc)
    write_json(out / "scf.json", _scf_json(res, fingerprint))
    if not res.converged:
        print(f"solve: not converged: {res.message}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    sol, prob = res.solution, res.problem
    assert sol is not None and prob is not None and res.a0 is not None
    reg = prob.a0_regular if prob.a0_regular is not None else np.zeros_like(sol.r)
    write_csv(
        out / "state.csv",
        {
            "r": sol.r,
            "G": sol.G,
            "F": sol.F,
            "a0_total": res.a0,
            "a0_regular": reg,
            "density_h": sol.density_h(),
        },
        _csv_meta("mdlab-state/1", fingerprint),
    )

    code = EXIT_OK
    if cfg.embed:
        # an external (non-self-consistent) background cannot satisfy the
        # sourced time-component equation, so that gate is demoted to a report
        report = embed_check(sol, n=cfg.embed_n, gate_poisson=cfg.self_source > 0.0)
        write_json(
            out / "certificate.json",
            {
                "schema": "mdlab-certificate/1",
                "manifest_hash": fingerprint,
                "gates": report.gates,
                "maxwell_spatial": report.maxwell_spatial,
                "passed": report.passed,
                "grid_shape": list(report.grid_shape),
                "tol": report.tol,
                "ungated": list(report.ungated),
            },
        )
        if not report.passed:
            print("solve: embedding certificate failed", file=sys.stderr)
            code = EXIT_NOT_CONVERGED
    return code


def _run_sweep(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    base = _scf_config(cfg)
    cells_dir = out / "cells"
    rows: dict[str, list[float]] = {
        "value": [],
        "converged": [],
        "e_over_m": [],
        "q0": [],
        "iterations": [],
        "defect": [],
    }
    n_failed = 0
    for i, value in enumerate(cfg.sweep_values):
        try:
            res = scf_solve(replace(base, **{cfg.sweep_parameter: value}))
        except (SeedError, RuntimeError, ValueError) as exc:
            res = _failed_result(base, exc)
        cell = {
            "schema": "mdlab-sweep-cell/1",
            "manifest_hash": fingerprint,
            "parameter": cfg.sweep_parameter,
            "value": value,
            "converged": res.converged,
            "message": res.message,
            "iterations": res.iterations,
            "E": res.E,
            "e_over_m": None if res.E is None else res.E / cfg.m,
            "q0_bookkeeping": res.q0_bookkeeping,
            "defect": res.defect,
        }
        # persisted immediately: a later failure cannot lose this cell
        write_json(cells_dir / f"cell_{i:03d}.json", cell)
        rows["value"].append(value)
        rows["converged"].append(1.0 if res.converged else 0.0)
        rows["e_over_m"].append(res.E / cfg.m if res.E is not None else float("nan"))
        rows["q0"].append(
            res.q0_bookkeeping if res.q0_bookkeeping is not None else float("nan")
        )
        rows["iterations"].append(float(res.iterations))
        rows["defect"].append(res.defect if res.defect is not None else float("nan"))
        if not res.converged:
            n_failed += 1
            print(f"sweep: cell {i} ({cfg.sweep_parameter}={value:g}) failed", file=sys.stderr)

    write_csv(
        out / "sweep.csv",
        rows,
        _csv_meta("mdlab-sweep/1", fingerprint, parameter=cfg.sweep_parameter),
    )
    return EXIT_NOT_CONVERGED if n_failed else EXIT_OK


# ------------------------------------------------------------------- verify


def _smooth_complex(rng: np.random.Generator, meshes, n_modes: int = 4) -> np.ndarray:
    x, y, z = meshes
    acc = np.zeros(x.shape, complex)
    for _ in range(n_modes):
        k = rng.uniform(-1.5, 1.5, 3)
        c = complex(rng.standard_normal(), rng.standard_normal())
        acc += c * np.exp(1j * (k[0] * x + k[1] * y + k[2] * z))
    return acc


def _run_verify(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    from .fields import PotentialField, SpinorFields, UniformGrid, dirac_residual
    from .spinor import (
        random_dyad,
        sigma_identity_residuals,
        tetrad_from_dyad,
        tetrad_relation_residuals,
    )

    rng = np.random.default_rng(cfg.seed)
    checks: dict[str, dict[str, Any]] = {}

    def gate(name: str, residual: float, tol: float) -> None:
        checks[name] = {"max_residual": residual, "tolerance": tol, "pass": residual <= tol}

    tet = tetrad_from_dyad(random_dyad(rng, (cfg.verify_n_dyads,)))
    gate("tetrad_relations", tetrad_relation_residuals(tet), 1e-12)

    s1, s2 = sigma_identity_residuals()
    gate("sigma_identities", max(s1, s2), 1e-12)

    s0 = tet.l[0] + tet.n[0]
    sj = tet.l[1:] + tet.n[1:]
    norm_id = float(np.max(np.abs(s0 * s0 - np.sum(sj * sj, axis=0) - 2.0)))
    gate("timelike_normalization", norm_id, 1e-12)

    grid = UniformGrid.cube((0.1, -0.2, 0.15), 1.0, cfg.verify_grid_n)
    meshes = grid.meshes()
    worst = 0.0
    for _ in range(cfg.verify_n_fields):
        psi = SpinorFields(
            grid,
            np.stack([_smooth_complex(rng, meshes), _smooth_complex(rng, meshes)]),
            np.stack([_smooth_complex(rng, meshes), _smooth_complex(rng, meshes)]),
            E=float(rng.uniform(0.3, 0.9)),
            m=1.3,
            e=0.8,
        )
        pot = PotentialField(grid, np.stack([_smooth_complex(rng, meshes).real for _ in range(4)]))
        diff = dirac_residual(psi, pot, route="sigma") - dirac_residual(psi, pot, route="explicit")
        worst = max(worst, float(np.max(np.abs(diff))))
    gate("dual_assembly", worst, 1e-10)

    all_pass = all(c["pass"] for c in checks.values())
    write_json(
        out / "verify.json",
        {
            "schema": "mdlab-verify/1",
            "manifest_hash": fingerprint,
            "seed": cfg.seed,
            "n_dyads": cfg.verify_n_dyads,
            "n_fields": cfg.verify_n_fields,
            "checks": checks,
            "all_pass": all_pass,
        },
    )
    if not all_pass:
        failed = ", ".join(n for n, c in checks.items() if not c["pass"])
        print(f"verify: failed checks: {failed}", file=sys.stderr)
    return EXIT_OK if all_pass else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------------- fit


def _na_payload(
    diagnostic: str, claim: str, reason: str, inputs: Mapping[str, Any], fingerprint: str
) -> dict[str, Any]:
    """A schema-complete diagnostic whose hypothesis does not hold here."""
    return {
        "schema": DIAGNOSTIC_SCHEMA,
        "diagnostic": diagnostic,
        "claim": claim,
        "inputs": {**dict(inputs), "reason": reason},
        "fitted": {},
        "predicted": {},
        "tolerance": {},
        "verdict": "not-applicable",
        "manifest_hash": fingerprint,
    }


def _load_solution(src: Path) -> tuple[RadialSolution, dict[str, Any]]:
    scf = read_json(src / "scf.json")
    doc = read_csv(src / "state.csv")
    prob = RadialProblem(
        kappa=int(scf["kappa"]),
        m=float(scf["m"]),
        e=float(scf["e"]),
        q_interior=float(scf["q_interior"]),
        r=doc["r"],
        a0_regular=doc["a0_regular"],
    )
    sol = RadialSolution(
        problem=prob,
        E=float(scf["E"]),
        G=doc["G"],
        F=doc["F"],
        n_nodes=int(scf["n_nodes"]),
    )
    return sol, scf


def _run_fit(cfg: RunConfig, out: Path, fingerprint: str, input_fingerprint: str | None = None) -> int:
    src = Path(cfg.fit_run_dir)
    for required in ("scf.json", "state.csv"):
        if not (src / required).exists():
            print(f"fit: missing input artifact {src / required}", file=sys.stderr)
            return EXIT_USAGE
    scf_doc = read_json(src / "scf.json")
    if not scf_doc.get("converged", False):
        print(f"fit: input run did not converge: {scf_doc.get('message')}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    sol, scf = _load_solution(src)
    m, e, E = sol.problem.m, sol.problem.e, sol.E
    q0 = float(scf["q0_bookkeeping"])
    # provenance by fingerprint, never by path: paths differ between
    # otherwise-identical runs and would break byte-level reproducibility
    base_inputs: dict[str, Any] = {"e_over_m": E / m, "q0": q0}
    if input_fingerprint is None and (src / "manifest.json").exists():
        input_fingerprint = manifest_fingerprint(read_json(src / "manifest.json"))
    if input_fingerprint is not None:
        base_inputs["input_manifest"] = input_fingerprint

    if cfg.window_hi > 0.0:
        window = (cfg.window_lo, cfg.window_hi)
    else:
        mask = tail_window(sol.r, decades=cfg.fit_decades)
        window = (float(sol.r[mask][0]), float(sol.r[mask][-1]))
    base_inputs["window"] = list(window)

    diag_dir = out / "diagnostics"
    curve_dir = out / "curves"
    payloads: list[dict[str, Any]] = []

    def emit(name: str, payload: dict[str, Any], curves: Mapping[str, np.ndarray] | None) -> None:
        payload["manifest_hash"] = fingerprint
        write_json(diag_dir / f"{name}.json", payload)
        payloads.append(payload)
        if curves is not None:
            write_csv(
                curve_dir / f"{name}.csv",
                curves,
                _csv_meta("mdlab-curve/1", fingerprint, diagnostic=payload["diagnostic"]),
            )

    lf = limit_formula_radial(sol, window=window)
    emit("limit-formula", lf.diagnostic_dict(claim=CLAIM_LIMIT, inputs=base_inputs), lf.curve_columns())

    on_threshold = abs(abs(E) - m) <= _THRESHOLD_RTOL * m
    if not on_threshold:
        bound = comparison_bound_radial(sol, k_fraction=cfg.k_fraction, window=window)
        emit(
            "comparison-bound",
            bound.diagnostic_dict(claim=CLAIM_BOUND, inputs=base_inputs),
            bound.curve_columns(),
        )
        decay = fit_decay(sol.r, 2.0 * sol.density_h(), model="exponential", window=window)
        emit("decay-envelope", decay.diagnostic_dict(inputs=base_inputs), decay.curve_columns())
    else:
        emit(
            "comparison-bound",
            _na_payload(
                "comparison-bound",
                CLAIM_BOUND,
                "exponential comparison bound needs a spectral gap (|E| < m)",
                base_inputs,
                fingerprint,
            ),
            None,
        )

    r_s, s_mag = staticity_radial(sol)
    st = staticity_check(r_s, s_mag, window=window)
    if on_threshold:
        st_payload = st.diagnostic_dict(expected=0.5, rtol=0.05, claim=CLAIM_STATIC, inputs=base_inputs)
    else:
        st_payload = _na_payload(
            "staticity-rate",
            CLAIM_STATIC,
            f"threshold decay rate applies at |E| = m only; here E/m = {E / m:.6g}",
            {**base_inputs, "fitted_kappa": st.kappa},
            fingerprint,
        )
    emit("staticity", st_payload, st.curve_columns())

    na_reasons = []
    if not on_threshold:
        na_reasons.append(f"|E| = m required; here E/m = {E / m:.6g}")
    if q0 == 0.0:
        na_reasons.append("q0 = 0 (neutral far field)")
    if not na_reasons:
        scale = charge_tail_scale(E, m, e, q0)
        emit("charge-tail-scale", scale.diagnostic_dict(claim=CLAIM_TAIL, inputs=base_inputs), None)
        if scale.applicable:
            h = 2.0 * sol.density_h()
            stretched = fit_decay(sol.r, h, model="stretched", window=window)
            emit(
                "decay-envelope",
                stretched.diagnostic_dict(
                    predicted={"rate": 4.0 * np.sqrt(2.0) * m * scale.lam, "power": 1.5},
                    claim=CLAIM_TAIL,
                    inputs=base_inputs,
                ),
                stretched.curve_columns(),
            )
        emit(
            "phase-expansion",
            _na_payload(
                "phase-expansion",
                CLAIM_PHASE,
                "phase data is not extracted from on-disk runs yet",
                base_inputs,
                fingerprint,
            ),
            None,
        )
    else:
        reason = "; ".join(na_reasons)
        emit(
            "charge-tail-scale",
            _na_payload("charge-tail-scale", CLAIM_TAIL, reason, base_inputs, fingerprint),
            None,
        )
        emit(
            "phase-expansion",
            _na_payload("phase-expansion", CLAIM_PHASE, reason, base_inputs, fingerprint),
            None,
        )

    radii = [0.55 * sol.r[-1], 0.68 * sol.r[-1], 0.84 * sol.r[-1]]
    prob = sol.problem

    def a0_of(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        return np.asarray(prob.a0_total(np.sqrt(x * x + y * y + z * z)))

    multi = charge_and_dipole(a0_of, radii)
    emit(
        "multipole",
        multi.diagnostic_dict(
            predicted_q0=q0, predicted_dipole_mag=0.0, rtol=1e-6, atol=1e-10, inputs=base_inputs
        ),
        multi.curve_columns(),
    )

    failed = [p["diagnostic"] for p in payloads if p["verdict"] == "fail"]
    if failed:
        print(f"fit: failing diagnostics: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _run_report_data(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    code = _run_solve(cfg, out, fingerprint)
    if code != EXIT_OK:
        return code
    fit_cfg = dataclasses.replace(cfg, fit_run_dir=str(out))
    # the input is this very run: pass its fingerprint rather than reading a
    # manifest file that is only written when the run finishes (a stale one
    # from an earlier run in the same directory must not leak in)
    return _run_fit(fit_cfg, out, fingerprint, input_fingerprint=fingerprint)


# --------------------------------------------------------------------- main


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(
        prog="mdlab",
        description="solver and diagnostics driver; the mode comes from run.mode in the config",
    )
    parser.add_argument("--config", required=True, help="path to the INI run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides run.out_dir)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides run.seed)")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker threads (overrides run.threads)"
    )
    args = parser.parse_args(argv)

    try:
        parsed = parse_config(args.config)
        parsed = apply_overrides(parsed, out_dir=args.out, seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"mdlab: {exc}", file=sys.stderr)
        return EXIT_USAGE

    cfg = parsed.config
    if cfg.threads > 1:
        try:
            import numba

            numba.set_num_threads(cfg.threads)
        except ImportError:
            pass

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fingerprint = manifest_fingerprint(build_manifest(parsed, wall_time_s=0.0))

    t0 = time.perf_counter()
    runners = {
        "solve": _run_solve,
        "sweep": _run_sweep,
        "verify": _run_verify,
        "fit": _run_fit,
        "report-data": _run_report_data,
    }
    code = runners[cfg.mode](cfg, out, fingerprint)
    write_json(out / "manifest.json", build_manifest(parsed, wall_time_s=time.perf_counter() - t0))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
