"""Self-consistent field loop coupling the radial eigenproblem to its potential.

One iteration: solve the bound state in the current electric background,
normalize its density to the configured total current charge, solve the
radial Poisson equation sourced by that density, and mix the new regular
part of A^0 into the background. The interior point charge q_interior/r is
held fixed; only the smooth self-field part is iterated.

Charge bookkeeping is exact by construction and is cross-checked against the
potential tail on every run: with the density normalized to Q_psi, the
asymptotic coefficient of A^0 is q0 = q_interior - e * Q_psi, whatever the
iteration does. Non-convergence (of the inner eigensolve or of the outer
fixed point) is returned as data with the iteration trace attached, never
raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .radial import (
    RadialProblem,
    RadialSolution,
    ShootResult,
    poisson_radial,
    shoot_eigenvalue,
)

__all__ = ["ScfConfig", "ScfResult", "ScfStep", "scf_solve", "sweep", "tune_charge_to_energy"]


@dataclass(frozen=True)
class ScfConfig:
    """Everything a self-consistent run needs; value semantics, no grids inside."""

    m: float
    e: float
    q_interior: float
    q_psi: float
    r_min: float
    r_max: float
    n_r: int = 4000
    kappa: int = -1
    bracket: tuple[float, float] = (-0.95, 0.999)
    n_scan: int = 61
    target_nodes: int = 0
    mix: float = 0.6
    max_iter: int = 80
    tol: float = 1e-12          # sup-norm change of the regular potential, relative
    defect_tol: float = 1e-10
    self_source: float = 1.0    # scales the density feeding Poisson; 0 = external only

    def __post_init__(self) -> None:
        if not 0.0 < self.mix <= 1.0:
            raise ValueError(f"mix must lie in (0, 1], got {self.mix}")
        if self.q_psi <= 0.0:
            raise ValueError("q_psi must be positive (density normalization)")
        lo, hi = self.bracket
        if not (-self.m < lo < hi < self.m):
            raise ValueError(f"bracket {self.bracket} must lie inside (-m, m)")


@dataclass
class ScfStep:
    """One outer-iteration record for the trace."""

    iteration: int
    E: float
    delta_a0: float
    defect: float


@dataclass
class ScfResult:
    converged: bool
    message: str
    config: ScfConfig
    iterations: int
    trace: list[ScfStep] = field(default_factory=list)
    E: float | None = None
    solution: RadialSolution | None = None
    problem: RadialProblem | None = None
    a0: np.ndarray | None = None            # total potential on the grid
    q0_bookkeeping: float | None = None     # q_interior - e * q_psi
    q0_tail: float | None = None            # r * A0 read off at r_max
    defect: float | None = None

    def charge_consistency(self) -> float:
        """Relative mismatch between the potential tail and the bookkeeping charge."""
        if self.q0_tail is None or self.q0_bookkeeping is None:
            return float("nan")
        scale = max(1.0, abs(self.q0_bookkeeping))
        return abs(self.q0_tail - self.q0_bookkeeping) / scale


def _shoot(
    cfg: ScfConfig,
    prob: RadialProblem,
    polish: bool,
    e_center: float | None = None,
) -> ShootResult:
    """Eigensolve, optionally in a narrow window around the previous energy.

    The narrow window (with a coarse scan) covers the common case of small
    per-iteration drift; any failure falls back to the configured bracket.
    """
    if e_center is not None:
        lo, hi = cfg.bracket
        w = max(0.02 * (hi - lo), 5e-3 * cfg.m)
        narrow = (max(lo, e_center - w), min(hi, e_center + w))
        if narrow[0] < narrow[1]:
            res = shoot_eigenvalue(
                prob, bracket=narrow, n_scan=15,
                target_nodes=cfg.target_nodes, defect_tol=cfg.defect_tol, polish=polish,
            )
            if res.converged:
                return res
    return shoot_eigenvalue(
        prob,
        bracket=cfg.bracket,
        n_scan=cfg.n_scan,
        target_nodes=cfg.target_nodes,
        defect_tol=cfg.defect_tol,
        polish=polish,
    )


def scf_solve(cfg: ScfConfig, a0_init: np.ndarray | None = None) -> ScfResult:
    """Damped fixed-point iteration on the regular part of A^0.

    The inner eigensolve runs unpolished during iteration (its bracketing
    defect is already near machine level) and once more with the adaptive
    polish on the converged background. With the density source switched off
    (self_source = 0) the background is external-only and the loop exits
    after one iteration with zero change. a0_init warm-starts the regular
    part of the potential (e.g. from a neighbouring converged run).
    """
    r = RadialProblem.log_grid(cfg.r_min, cfg.r_max, cfg.n_r)
    if a0_init is not None:
        if np.shape(a0_init) != r.shape:
            raise ValueError("a0_init must be sampled on the configured radial grid")
        a0_reg = np.asarray(a0_init, dtype=float).copy()
    else:
        a0_reg = np.zeros_like(r)
    trace: list[ScfStep] = []
    converged = False
    e_prev: float | None = None

    for it in range(1, cfg.max_iter + 1):
        prob = RadialProblem(
            kappa=cfg.kappa, m=cfg.m, e=cfg.e, q_interior=cfg.q_interior,
            r=r, a0_regular=a0_reg,
        )
        res = _shoot(cfg, prob, polish=False, e_center=e_prev)
        if not res.converged:
            return ScfResult(
                converged=False,
                message=f"eigenvalue search failed at iteration {it}: {res.message}",
                config=cfg, iterations=it, trace=trace,
            )
        e_prev = res.E
        sol = res.solution.normalized(cfg.q_psi)
        a0_total, _ = poisson_radial(r, cfg.self_source * sol.j0(), cfg.q_interior, cfg.e)
        candidate = a0_total - cfg.q_interior / r
        delta = float(np.max(np.abs(candidate - a0_reg)))
        scale = max(1.0, float(np.max(np.abs(candidate))))
        trace.append(ScfStep(iteration=it, E=res.E, delta_a0=delta / scale, defect=res.defect))
        a0_reg = (1.0 - cfg.mix) * a0_reg + cfg.mix * candidate
        if delta <= cfg.tol * scale:
            converged = True
            break

    if not converged:
        return ScfResult(
            converged=False,
            message=(
                f"potential not stationary after {cfg.max_iter} iterations "
                f"(last relative change {trace[-1].delta_a0:.3e}, tol {cfg.tol:g})"
            ),
            config=cfg, iterations=len(trace), trace=trace,
        )

    # final polished solve on the frozen background
    prob = RadialProblem(
        kappa=cfg.kappa, m=cfg.m, e=cfg.e, q_interior=cfg.q_interior,
        r=r, a0_regular=a0_reg,
    )
    res = _shoot(cfg, prob, polish=True, e_center=e_prev)
    if not res.converged:
        return ScfResult(
            converged=False,
            message=f"final polished solve failed: {res.message}",
            config=cfg, iterations=len(trace), trace=trace,
        )
    sol = res.solution.normalized(cfg.q_psi)
    a0_total, q0 = poisson_radial(r, cfg.self_source * sol.j0(), cfg.q_interior, cfg.e)
    q0_book = cfg.q_interior - cfg.e * cfg.self_source * cfg.q_psi
    q0_tail = float(r[-1] * a0_total[-1])
    return ScfResult(
        converged=True,
        message=f"stationary after {len(trace)} iterations",
        config=cfg,
        iterations=len(trace),
        trace=trace,
        E=res.E,
        solution=sol,
        problem=prob,
        a0=a0_total,
        q0_bookkeeping=q0_book,
        q0_tail=q0_tail,
        defect=res.defect,
    )


def sweep(base: ScfConfig, parameter: str, values) -> list[ScfResult]:
    """Run scf_solve over a family of configs differing in one field."""
    if parameter not in ScfConfig.__dataclass_fields__:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    return [scf_solve(replace(base, **{parameter: v})) for v in values]


def tune_charge_to_energy(
    base: ScfConfig,
    e_target: float,
    tol: float = 1e-8,
    max_iter: int = 30,
) -> ScfResult:
    """Adjust q_interior by a secant iteration until the SCF energy hits a target.

    Starts from the external-Coulomb closed form (self-field ignored) and the
    base config's q_interior as the two initial secant points. Returns the
    converged run at the final charge; raises if the iteration stalls or an
    intermediate run fails to converge.
    """
    m, e = base.m, base.e
    if not -m < e_target < m:
        raise ValueError("target energy must lie inside the gap")
    # closed-form initial guess: E/m = sqrt(1 - (e q)^2 / m^2) for kappa = -1
    q_guess = math.sqrt(m * m - e_target * e_target) / abs(e) * math.copysign(1.0, e)

    warm: np.ndarray | None = None

    def run(q: float) -> ScfResult:
        nonlocal warm
        out = scf_solve(replace(base, q_interior=q), a0_init=warm)
        if not out.converged:
            raise RuntimeError(f"SCF failed during tuning at q_interior={q:.9g}: {out.message}")
        warm = out.problem.a0_regular
        return out

    q0, q1 = q_guess, base.q_interior
    if math.isclose(q0, q1, rel_tol=1e-12):
        q1 = q0 * 1.02
    r0, r1 = run(q0), run(q1)
    f0, f1 = r0.E - e_target, r1.E - e_target
    best = r1
    for _ in range(max_iter):
        if abs(f1) <= tol:
            return best
        denom = f1 - f0
        if denom == 0.0:
            break
        q2 = q1 - f1 * (q1 - q0) / denom
        r2 = run(q2)
        q0, f0, q1, f1 = q1, f1, q2, r2.E - e_target
        best = r2
    if abs(f1) <= tol:
        return best
    raise RuntimeError(
        f"energy tuning stalled: |E - target| = {abs(f1):.3e} after {max_iter} secant steps"
    )
