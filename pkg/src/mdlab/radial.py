"""Spherically symmetric reduction: two-point eigenvalue solver on a log grid.

For total angular momentum quantum number kappa = -1 the stationary system
admits the separable form

    U_0 = G/r + i (F/r) cos(theta),   U_1    = i (F/r) sin(theta) e^{i phi},
    Vbar^0 = G/r - i (F/r) cos(theta),  Vbar^1 = -i (F/r) sin(theta) e^{i phi},

with a purely radial electric potential A^0(r) and no magnetic components.
The radial amplitudes solve the first-order pair

    G' = -(kappa/r) G + (E + W + m) F,
    F' = +(kappa/r) F - (E + W - m) G,          W(r) := e A^0(r),

which this module integrates in the log variable s = ln r. The reduction is
not assumed: :func:`embed_check` lifts a radial solution onto a 3-D grid and
runs the full field evaluators over it, which is the certificate that the
ansatz closes. The spatial current of the ansatz is azimuthal and nonzero, so
a radial electric potential alone cannot satisfy the spatial wave equation;
the certificate reports that magnitude separately (``maxwell_spatial``)
rather than gating on it — see the package README.

Eigenvalues are found by two-sided shooting: a series seed at r_min, a
decaying seed at r_max, a fixed-step RK4 sweep in s for bracketing (compiled
with numba when available), and an adaptive high-order polish. The matching
defect is scale-free, so exponential growth in the classically forbidden
region is harmless (states are renormalized projectively during integration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

__all__ = [
    "RadialProblem",
    "RadialSolution",
    "ShootResult",
    "EmbedReport",
    "SeedError",
    "radial_rhs",
    "frobenius_seed",
    "far_field_seed",
    "integrate_adaptive",
    "shoot_eigenvalue",
    "poisson_radial",
    "charge_of_density",
    "embed_solution",
    "embed_check",
]


class SeedError(ValueError):
    """Raised when a boundary seed does not exist (e.g. |E + W| >= m at r_max)."""


# ----------------------------------------------------------------- problem data


@dataclass
class RadialProblem:
    """A single radial eigenvalue problem in a fixed electric background.

    The background potential is A^0(r) = q_interior/r + regular part; the
    pure-Coulomb coefficient is kept separate because the series seed at r_min
    needs it exactly. a0_regular is sampled on the grid nodes (None = 0).
    """

    kappa: int
    m: float
    e: float
    q_interior: float
    r: np.ndarray                       # log-uniform nodes, ascending
    a0_regular: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.r = np.asarray(self.r, dtype=float)
        if self.r.ndim != 1 or self.r.size < 16:
            raise ValueError("need a 1-D radial grid with at least 16 nodes")
        s = np.log(self.r)
        step = np.diff(s)
        if not np.allclose(step, step[0], rtol=1e-8):
            raise ValueError("radial grid must be log-uniform")
        if self.a0_regular is not None:
            self.a0_regular = np.asarray(self.a0_regular, dtype=float)
            if self.a0_regular.shape != self.r.shape:
                raise ValueError("a0_regular must be sampled on the radial grid")
        self._reg_cache: CubicSpline | None = None

    @classmethod
    def log_grid(cls, r_min: float, r_max: float, n: int) -> np.ndarray:
        return np.exp(np.linspace(math.log(r_min), math.log(r_max), n))

    def _reg_spline(self) -> CubicSpline | None:
        if self.a0_regular is None:
            return None
        if self._reg_cache is None:
            self._reg_cache = CubicSpline(np.log(self.r), self.a0_regular)
        return self._reg_cache

    def a0_total(self, r: np.ndarray | float) -> np.ndarray | float:
        reg = self._reg_spline()
        base = self.q_interior / r
        return base if reg is None else base + reg(np.log(r))

    def w_of(self, r: np.ndarray | float) -> np.ndarray | float:
        """W(r) = e * A^0(r)."""
        return self.e * self.a0_total(r)


@dataclass
class RadialSolution:
    """A normalized bound state in its background."""

    problem: RadialProblem
    E: float
    G: np.ndarray
    F: np.ndarray
    n_nodes: int

    @property
    def r(self) -> np.ndarray:
        return self.problem.r

    def density_h(self) -> np.ndarray:
        """Scalar density h = (G^2 + F^2)/r^2; the time current is j^0 = 2h."""
        return (self.G**2 + self.F**2) / self.r**2

    def j0(self) -> np.ndarray:
        return 2.0 * self.density_h()

    def q_psi(self) -> float:
        """Total current charge integral(j^0 d^3x) = 8 pi integral((G^2+F^2) dr)."""
        s = np.log(self.r)
        integrand = (self.G**2 + self.F**2) * self.r    # f(r) dr = f r ds
        return float(8.0 * np.pi * CubicSpline(s, integrand).integrate(s[0], s[-1]))

    def normalized(self, q_target: float = 1.0) -> "RadialSolution":
        scale = math.sqrt(q_target / self.q_psi())
        return RadialSolution(self.problem, self.E, self.G * scale, self.F * scale, self.n_nodes)

    def splines(self) -> tuple[CubicSpline, CubicSpline]:
        s = np.log(self.r)
        return CubicSpline(s, self.G), CubicSpline(s, self.F)


@dataclass
class ShootResult:
    """Outcome of an eigenvalue search; non-convergence is a result, not a crash."""

    converged: bool
    message: str
    E: float | None = None
    defect: float | None = None
    defect_scan_engine: float | None = None
    solution: RadialSolution | None = None
    bracket: tuple[float, float] | None = None
    n_nodes: int | None = None
    scan_energies: np.ndarray | None = None
    scan_defects: np.ndarray | None = None


# ------------------------------------------------------------------------ seeds


def radial_rhs(r: float, y: np.ndarray, kappa: int, m: float, W: float, E: float) -> np.ndarray:
    """d/dr of (G, F) at radius r in background value W = e A^0(r)."""
    g, f = y
    return np.array(
        [
            -(kappa / r) * g + (E + W + m) * f,
            +(kappa / r) * f - (E + W - m) * g,
        ]
    )


def frobenius_seed(
    problem: RadialProblem, E: float, g_lead: float = 1.0
) -> tuple[np.ndarray, float]:
    """Series values (G, F) at r_min from the regular branch.

    With W = w/r + W0 + O(r), w = e*q_interior, the regular solution behaves
    as r^gamma (c0 + c1 r + ...), gamma = sqrt(kappa^2 - w^2):

        (gamma + kappa) c0_G = w c0_F        (first order)
        [[gamma+1+kappa, -w], [w, gamma+1-kappa]] (c1_G, c1_F)
            = ((E + W0 + m) c0_F, -(E + W0 - m) c0_G)

    Returns the seed vector at r_min and gamma. For w = 0 the branch with
    G ~ r^{|kappa|} is taken.
    """
    kappa, m = problem.kappa, problem.m
    w = problem.e * problem.q_interior
    gam2 = kappa * kappa - w * w
    if gam2 <= 0:
        raise SeedError(f"no regular series branch: kappa^2 - w^2 = {gam2:g} <= 0")
    gamma = math.sqrt(gam2)
    r0 = float(problem.r[0])
    W0 = float(problem.w_of(r0) - w / r0)   # regular part of W at r_min
    if w != 0.0:
        c0 = np.array([g_lead, g_lead * (gamma + kappa) / w])
    else:
        if kappa < 0:
            c0 = np.array([g_lead, 0.0])
        else:
            c0 = np.array([0.0, g_lead])
    mat = np.array(
        [[gamma + 1 + kappa, -w], [w, gamma + 1 - kappa]], dtype=float
    )
    rhs = np.array([(E + W0 + m) * c0[1], -(E + W0 - m) * c0[0]])
    c1 = np.linalg.solve(mat, rhs)
    y = (c0 + c1 * r0) * r0**gamma
    return y, gamma


def far_field_seed(problem: RadialProblem, E: float) -> np.ndarray:
    """Decaying-mode direction (G, F) at r_max.

    The local dispersion requires |E + W(r_max)| < m for a decaying seed; the
    ratio is F/G = -sqrt((m - E_eff)/(m + E_eff)). Contamination by the
    growing mode decays like exp(-2 k (r_max - r)) moving inward.
    """
    e_eff = E + float(problem.w_of(float(problem.r[-1])))
    if abs(e_eff) >= problem.m:
        raise SeedError(
            f"no decaying far-field seed: |E + W(r_max)| = {abs(e_eff):.6g} >= m = {problem.m:g}"
        )
    return np.array([1.0, -math.sqrt((problem.m - e_eff) / (problem.m + e_eff))])


# -------------------------------------------------------- fixed-step RK4 engine


def _rk4_sweep(kappa, aplus, aminus, h, n_nodes, forward, g0, f0):  # pragma: no cover
    """RK4 in s over a node range; tables at half-steps; projective renorm.

    Returns per-node (G, F, logscale) with true values G*exp(logscale), plus
    the number of sign changes of G. Compiled by numba when available.
    """
    G = np.empty(n_nodes)
    F = np.empty(n_nodes)
    L = np.empty(n_nodes)
    g = g0
    f = f0
    ls = 0.0
    G[0] = g
    F[0] = f
    L[0] = 0.0
    nodes = 0
    step = 1 if forward else -1
    hh = h if forward else -h
    for idx in range(1, n_nodes):
        j = 2 * (idx - 1) if forward else 2 * (n_nodes - idx)
        jm = j + step
        je = j + 2 * step
        k1g = -kappa * g + aplus[j] * f
        k1f = kappa * f - aminus[j] * g
        g2 = g + 0.5 * hh * k1g
        f2 = f + 0.5 * hh * k1f
        k2g = -kappa * g2 + aplus[jm] * f2
        k2f = kappa * f2 - aminus[jm] * g2
        g3 = g + 0.5 * hh * k2g
        f3 = f + 0.5 * hh * k2f
        k3g = -kappa * g3 + aplus[jm] * f3
        k3f = kappa * f3 - aminus[jm] * g3
        g4 = g + hh * k3g
        f4 = f + hh * k3f
        k4g = -kappa * g4 + aplus[je] * f4
        k4f = kappa * f4 - aminus[je] * g4
        gn = g + (hh / 6.0) * (k1g + 2 * k2g + 2 * k3g + k4g)
        fn = f + (hh / 6.0) * (k1f + 2 * k2f + 2 * k3f + k4f)
        if gn * g < 0:
            nodes += 1
        g = gn
        f = fn
        a = abs(g)
        if abs(f) > a:
            a = abs(f)
        if a > 1e120:
            g /= a
            f /= a
            ls += math.log(a)
        G[idx] = g
        F[idx] = f
        L[idx] = ls
    return G, F, L, nodes


try:  # the fixed-step engine is hot inside scans; JIT it when numba is present
    from numba import njit

    _rk4_sweep_fast = njit(cache=True)(_rk4_sweep)
except ImportError:  # pragma: no cover
    _rk4_sweep_fast = _rk4_sweep


class _Tables:
    """Half-step coefficient tables a± = r (E + W ± m) for the RK4 engine."""

    def __init__(self, problem: RadialProblem):
        s = np.log(problem.r)
        n = s.size
        self.h = float(s[1] - s[0])
        s_half = s[0] + 0.5 * self.h * np.arange(2 * n - 1)
        r_half = np.exp(s_half)
        self.r_half = r_half
        self.w_half = np.asarray(problem.w_of(r_half), dtype=float)
        self.rm = problem.m * r_half
        self.n = n

    def coeffs(self, E: float) -> tuple[np.ndarray, np.ndarray]:
        base = self.r_half * E + self.r_half * self.w_half
        return base + self.rm, base - self.rm


def _sweep_pair(
    problem: RadialProblem, tables: _Tables, E: float, i_match: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    """Outward seed -> i_match and inward seed -> i_match; returns both branches."""
    aplus, aminus = tables.coeffs(E)
    y0, _ = frobenius_seed(problem, E)
    n_out = i_match + 1
    Go, Fo, Lo, nodes = _rk4_sweep_fast(
        float(problem.kappa), aplus[: 2 * i_match + 1], aminus[: 2 * i_match + 1],
        tables.h, n_out, True, y0[0], y0[1],
    )
    y1 = far_field_seed(problem, E)
    n_in = tables.n - i_match
    Gi, Fi, Li, _ = _rk4_sweep_fast(
        float(problem.kappa), aplus[2 * i_match :], aminus[2 * i_match :],
        tables.h, n_in, False, y1[0], y1[1],
    )
    # the inward sweep stores states from r_max downward; index -1 is the match
    out = np.array([Go[-1], Fo[-1]])
    inn = np.array([Gi[-1], Fi[-1]])
    return out, inn, np.stack([Go, Fo, Lo]), np.stack([Gi, Fi, Li]), nodes


def _defect(out: np.ndarray, inn: np.ndarray) -> float:
    """Scale-free matching defect: zero iff the branches are parallel."""
    cross = out[0] * inn[1] - out[1] * inn[0]
    scale = abs(out[0] * inn[1]) + abs(out[1] * inn[0]) + 1e-300
    return float(cross / scale)


def _turning_index(problem: RadialProblem, E: float) -> int:
    """Outermost grid index where the local dispersion is oscillatory."""
    w = np.asarray(problem.w_of(problem.r), dtype=float)
    k2 = (E + w) ** 2 - problem.m**2
    idx = np.nonzero(k2 > 0)[0]
    n = problem.r.size
    if idx.size == 0:
        return n // 2
    return int(np.clip(idx[-1], 8, n - 9))


# ----------------------------------------------------------- adaptive reference


def integrate_adaptive(
    problem: RadialProblem,
    E: float,
    forward: bool,
    s_eval: np.ndarray | None = None,
    rtol: float = 1e-12,
    atol: float = 1e-300,
) -> tuple[np.ndarray, np.ndarray]:
    """High-order adaptive integration in s = ln r (reference engine).

    Integrates the seeded branch across the full grid (or to s_eval[-1]) and
    returns (ys, y) with y of shape (2, len(s_eval)). No renormalization is
    applied, so this is for polishing and diagnostics on moderate spans, not
    for deep forbidden-region sweeps.
    """
    s = np.log(problem.r)
    reg = problem._reg_spline()
    e_, q, kap, m = problem.e, problem.q_interior, problem.kappa, problem.m

    def fun(si: float, y: np.ndarray) -> list[float]:
        r = math.exp(si)
        w = e_ * (q / r + (reg(si) if reg is not None else 0.0))
        g, f = y
        return [
            (-kap * g + r * (E + w + m) * f),
            (kap * f - r * (E + w - m) * g),
        ]

    if forward:
        y0, _ = frobenius_seed(problem, E)
        span = (s[0], s[-1] if s_eval is None else s_eval[-1])
    else:
        y0 = far_field_seed(problem, E)
        span = (s[-1], s[0] if s_eval is None else s_eval[-1])
    out = solve_ivp(
        fun, span, y0, method="DOP853", rtol=rtol, atol=atol, t_eval=s_eval, dense_output=False
    )
    if not out.success:  # pragma: no cover
        raise RuntimeError(f"adaptive integration failed: {out.message}")
    return out.t, out.y


# -------------------------------------------------------------------- eigensolve


def shoot_eigenvalue(
    problem: RadialProblem,
    bracket: tuple[float, float],
    n_scan: int = 81,
    target_nodes: int | None = 0,
    defect_tol: float = 1e-10,
    polish: bool = True,
) -> ShootResult:
    """Locate a bound state by scanning the matching defect over [E_lo, E_hi].

    The fixed-step engine sweeps the bracket on n_scan points, sign changes of
    the scale-free defect are bisected to machine precision, and (optionally)
    the adaptive engine re-polishes the root. A scan without a usable sign
    change returns converged=False with the scan trace attached — callers
    treat that as data, not as an exception.
    """
    m = problem.m
    lo, hi = bracket
    if not (-m < lo < hi < m):
        raise ValueError(f"bracket must satisfy -m < lo < hi < m, got {bracket}")
    # the decaying seed needs |E + W(r_max)| < m, and the far tail must decay
    # by many e-folds inside the grid or the matching defect degenerates; clamp
    # the scan window to energies with at least ~25 decay lengths available
    w_lo, w_hi = _seed_window(problem)
    lo = max(lo, w_lo)
    hi = min(hi, w_hi)
    if not lo < hi:
        raise SeedError(
            f"bracket {bracket} lies outside the usable far-field window "
            f"({w_lo:.9g}, {w_hi:.9g}); enlarge r_max"
        )
    tables = _Tables(problem)

    # match at each energy's own outer turning radius: both sweeps stay in
    # their numerically stable regimes and the defect crossing stays broad
    def defect_of(E: float) -> tuple[float, int]:
        out, inn, _, _, nodes = _sweep_pair(problem, tables, E, _turning_index(problem, E))
        return _defect(out, inn), nodes

    def scan(e_lo: float, e_hi: float, n: int):
        energies = np.linspace(e_lo, e_hi, n)
        defects = np.empty(n)
        node_counts = np.empty(n, dtype=int)
        for i, E in enumerate(energies):
            defects[i], node_counts[i] = defect_of(E)
        cands = []
        for i in range(n - 1):
            if np.sign(defects[i]) * np.sign(defects[i + 1]) < 0:
                if (
                    target_nodes is None
                    or node_counts[i] == target_nodes
                    or node_counts[i + 1] == target_nodes
                ):
                    cands.append((energies[i], energies[i + 1]))
        return energies, defects, cands

    energies, defects, candidates = scan(lo, hi, n_scan)
    if not candidates:
        # zoom onto the most promising dip in |defect| before giving up; a
        # crossing pair narrower than the scan spacing is invisible otherwise
        i0 = int(np.argmin(np.abs(defects)))
        z_lo = energies[max(i0 - 1, 0)]
        z_hi = energies[min(i0 + 1, n_scan - 1)]
        for _ in range(3):
            z_en, z_de, candidates = scan(z_lo, z_hi, n_scan)
            if candidates:
                break
            i0 = int(np.argmin(np.abs(z_de)))
            z_lo = z_en[max(i0 - 1, 0)]
            z_hi = z_en[min(i0 + 1, n_scan - 1)]
    if not candidates:
        return ShootResult(
            converged=False,
            message=(
                "no matching-defect sign change in scan window "
                f"({lo:.9g}, {hi:.9g})"
                + ("" if target_nodes is None else f" with {target_nodes} nodes")
            ),
            bracket=bracket,
            scan_energies=energies,
            scan_defects=defects,
        )

    e_lo, e_hi = candidates[0]
    root = brentq(lambda E: defect_of(E)[0], e_lo, e_hi, xtol=1e-15, rtol=8.9e-16)
    defect_scan = abs(defect_of(root)[0])

    E_final = float(root)
    i_match = _turning_index(problem, root)
    if polish:
        # re-root on the adaptive engine's defect in a tight window
        def defect_adaptive(E: float) -> float:
            s = np.log(problem.r)
            sm = s[i_match]
            _, y_out = integrate_adaptive(problem, E, True, s_eval=np.array([s[0], sm]))
            _, y_in = integrate_adaptive(problem, E, False, s_eval=np.array([s[-1], sm]))
            return _defect(y_out[:, -1], y_in[:, -1])

        width = max(1e-9, 1e-6 * abs(root)) if root != 0 else 1e-9
        a, b = root - width, root + width
        fa, fb = defect_adaptive(a), defect_adaptive(b)
        grow = 0
        while np.sign(fa) * np.sign(fb) > 0 and grow < 20:
            width *= 4.0
            a, b = max(root - width, lo), min(root + width, hi)
            fa, fb = defect_adaptive(a), defect_adaptive(b)
            grow += 1
        if np.sign(fa) * np.sign(fb) < 0:
            E_final = float(brentq(defect_adaptive, a, b, xtol=1e-15, rtol=8.9e-16))
            defect_final = abs(defect_adaptive(E_final))
        else:  # pragma: no cover
            defect_final = abs(defect_adaptive(root))
    else:
        defect_final = defect_scan

    # assemble the matched trajectory at E_final via the fixed-step engine
    out, inn, traj_out, traj_in, _ = _sweep_pair(problem, tables, E_final, i_match)
    Go, Fo, Lo = traj_out
    Gi, Fi, Li = traj_in
    # rescale each branch to true values relative to its match endpoint, then
    # flip the inward branch (stored from r_max downward) to ascending radius
    Go = Go * np.exp(Lo - Lo[-1])
    Fo = Fo * np.exp(Lo - Lo[-1])
    Gi = (Gi * np.exp(Li - Li[-1]))[::-1]
    Fi = (Fi * np.exp(Li - Li[-1]))[::-1]
    ratio = (out[0] * inn[0] + out[1] * inn[1]) / (inn[0] ** 2 + inn[1] ** 2)
    G = np.concatenate([Go, Gi[1:] * ratio])
    F = np.concatenate([Fo, Fi[1:] * ratio])
    nodes_total = int(np.count_nonzero(np.sign(G[:-1]) * np.sign(G[1:]) < 0))
    sol = RadialSolution(problem, E_final, G, F, nodes_total).normalized()

    if defect_final > defect_tol:
        return ShootResult(
            converged=False,
            message=f"defect {defect_final:.3e} above tolerance {defect_tol:g} after polish",
            E=E_final,
            defect=defect_final,
            defect_scan_engine=defect_scan,
            solution=sol,
            bracket=(e_lo, e_hi),
            n_nodes=nodes_total,
            scan_energies=energies,
            scan_defects=defects,
        )
    return ShootResult(
        converged=True,
        message="matched",
        E=E_final,
        defect=defect_final,
        defect_scan_engine=defect_scan,
        solution=sol,
        bracket=(e_lo, e_hi),
        n_nodes=nodes_total,
        scan_energies=energies,
        scan_defects=defects,
    )


# ----------------------------------------------------------------- spectrum scan


@dataclass
class GapScan:
    """Spectral indicator over an energy interval straddling |E| = m.

    kind 1 ("defect"): the signed two-sided matching defect — a zero is a
    bound state. kind 0 ("amplitude"): the normalized far-tail amplitude of
    the outward-regular solution, in (0, 1]; an L2 (embedded) eigenvalue
    would force it toward zero, so values of order one certify its absence.
    The amplitude indicator is used wherever |E + W(r_max)| is too close to m
    for a decaying far-field seed to exist on the grid.
    """

    energies: np.ndarray
    values: np.ndarray
    kinds: np.ndarray       # int: 1 = matching defect, 0 = tail amplitude

    def defect_sign_change_energies(self) -> np.ndarray:
        mask = self.kinds == 1
        e, v = self.energies[mask], self.values[mask]
        flips = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
        return 0.5 * (e[flips] + e[flips + 1])

    def min_amplitude_outside_gap(self, m: float) -> float:
        mask = (self.kinds == 0) & (np.abs(self.energies) >= m)
        if not mask.any():
            return float("nan")
        return float(np.min(self.values[mask]))


def _seed_window(problem: RadialProblem) -> tuple[float, float]:
    """Energy window where the decaying far-field seed is usable on this grid."""
    m = problem.m
    r_max = float(problem.r[-1])
    w_far = float(problem.w_of(r_max))
    k_floor = 25.0 / r_max
    gap = math.sqrt(m * m - k_floor * k_floor) if k_floor < m else 0.0
    return -gap - w_far, gap - w_far


def _tail_amplitude(problem: RadialProblem, tables: _Tables, E: float) -> float:
    """Normalized magnitude of the outward solution over the last grid decade."""
    aplus, aminus = tables.coeffs(E)
    y0, _ = frobenius_seed(problem, E)
    n = tables.n
    G, F, L, _ = _rk4_sweep_fast(
        float(problem.kappa), aplus, aminus, tables.h, n, True, y0[0], y0[1]
    )
    t = 0.5 * np.log(G * G + F * F) + L
    tail = t[int(0.9 * n):]
    return float(np.exp(np.max(tail) - np.max(t)))


def gap_scan(problem: RadialProblem, e_lo: float, e_hi: float, n: int = 121) -> GapScan:
    """Scan the spectral indicator across [e_lo, e_hi] (may straddle |E| = m)."""
    tables = _Tables(problem)
    w_lo, w_hi = _seed_window(problem)
    energies = np.linspace(e_lo, e_hi, n)
    values = np.empty(n)
    kinds = np.empty(n, dtype=int)
    for i, E in enumerate(energies):
        if w_lo < E < w_hi:
            i_match = _turning_index(problem, E)
            out, inn, _, _, _ = _sweep_pair(problem, tables, E, i_match)
            values[i] = _defect(out, inn)
            kinds[i] = 1
        else:
            values[i] = _tail_amplitude(problem, tables, E)
            kinds[i] = 0
    return GapScan(energies=energies, values=values, kinds=kinds)


# ---------------------------------------------------------------------- Poisson


def charge_of_density(r: np.ndarray, j0: np.ndarray) -> float:
    """Q = integral(j^0 d^3x) = 4 pi integral(j0 r^2 dr) on a log grid."""
    s = np.log(r)
    return float(4.0 * np.pi * CubicSpline(s, j0 * r**3).integrate(s[0], s[-1]))


def poisson_radial(
    r: np.ndarray, j0: np.ndarray, q_interior: float, e: float
) -> tuple[np.ndarray, float]:
    """Solve Lap A^0 = 4 pi e j^0 radially with a point charge at the origin.

    A^0(r) = q_interior/r - 4 pi e [ (1/r) I1(r) + I2(r) ],
    I1 = integral_{r_min}^{r} j0 r'^2 dr',  I2 = integral_{r}^{r_max} j0 r' dr'.

    Returns the potential on the grid and the asymptotic charge
    q0 = q_interior - e * Q_psi read off the tail coefficient.
    """
    r = np.asarray(r, float)
    j0 = np.asarray(j0, float)
    s = np.log(r)
    anti1 = CubicSpline(s, j0 * r**3).antiderivative()   # d(I1)/ds = j0 r^3
    anti2 = CubicSpline(s, j0 * r**2).antiderivative()   # d(I2)/ds = j0 r^2
    i1 = anti1(s) - anti1(s[0])
    i2 = (anti2(s[-1]) - anti2(s))
    a0 = q_interior / r - 4.0 * np.pi * e * (i1 / r + i2)
    q_psi = 4.0 * np.pi * float(i1[-1])
    return a0, q_interior - e * q_psi


# -------------------------------------------------------------------- embedding


@dataclass
class EmbedReport:
    """Residual norms of a radial solution lifted to a 3-D patch."""

    gates: dict[str, dict[str, float]]
    maxwell_spatial: float
    passed: bool
    grid_shape: tuple[int, int, int]
    tol: float
    ungated: tuple[str, ...] = ()

    def summary_lines(self) -> list[str]:
        lines = []
        for name, g in self.gates.items():
            verdict = "PASS" if g["max"] <= self.tol else "FAIL"
            if name in self.ungated:
                verdict = "reported, not gated"
            lines.append(f"{name:>22s}: max {g['max']:.3e}  rms {g['rms']:.3e}  {verdict}")
        lines.append(f"{'maxwell_spatial':>22s}: max {self.maxwell_spatial:.3e}  (reported, not gated)")
        return lines


def embed_solution(sol: RadialSolution, grid) -> tuple["SpinorFields", "PotentialField"]:
    """Lift (G, F, A^0) onto a Cartesian grid through the kappa = -1 ansatz."""
    from .fields import PotentialField, SpinorFields  # local import to avoid cycle

    if sol.problem.kappa != -1:
        raise ValueError("embedding implemented for the kappa = -1 ansatz only")
    gs, fs = sol.splines()
    x, y, z = grid.meshes()
    r = np.sqrt(x * x + y * y + z * z)
    if r.min() < sol.r[0] or r.max() > sol.r[-1]:
        raise ValueError(
            f"3-D patch radii [{r.min():.3g}, {r.max():.3g}] leave the radial grid "
            f"[{sol.r[0]:.3g}, {sol.r[-1]:.3g}]"
        )
    srl = np.log(r)
    G = gs(srl)
    F = fs(srl)
    gr = G / r
    fr = F / (r * r)          # F/r * 1/r, combined with x,y,z factors below
    u0 = gr + 1j * fr * z
    u1 = 1j * fr * (x + 1j * y)
    vb0 = gr - 1j * fr * z
    vb1 = -1j * fr * (x + 1j * y)
    psi = SpinorFields(
        grid, np.stack([u0, u1]), np.stack([vb0, vb1]), E=sol.E, m=sol.problem.m, e=sol.problem.e
    )
    A = np.zeros((4, *grid.shape))
    A[0] = sol.problem.a0_total(r)
    return psi, PotentialField(grid, A)


def embed_check(
    sol: RadialSolution,
    n: int = 64,
    center: tuple[float, float, float] | None = None,
    half_width: float | None = None,
    tol: float = 1e-5,
    corrupt_factor: float | None = None,
    gate_poisson: bool = True,
) -> EmbedReport:
    """Certificate that the radial reduction closes: lift and re-evaluate.

    Gated residuals (max over the interior, tolerance ``tol``): both
    first-order assemblies, the three reality conditions, the time component
    of the sourced wave equation, and the Lorenz divergence. The azimuthal
    spatial current magnitude is reported but not gated (the electric-only
    background cannot source it; see module docstring). With corrupt_factor
    the G amplitude is scaled before lifting — used to prove the certificate
    actually bites. gate_poisson=False demotes the time-component source
    equation to reported-only, for eigenstates of a fixed external potential
    that is not meant to be self-consistent.
    """
    from .fields import (
        UniformGrid,
        dirac_residual,
        interior_norms,
        lorenz_residual,
        maxwell_residual,
        reality_residual,
    )

    if center is None or half_width is None:
        # a patch on the outer flank of the density peak: close enough that the
        # fields are still a sizable fraction of their maximum, far enough out
        # that the fourth-order stencil error of Lap(1/r) (which grows like the
        # inverse cube of the patch distance) stays well inside the gate for
        # compact states
        r_peak = float(sol.r[np.argmax(sol.density_h() * sol.r**2)])
        c = max(1.5 * sol.r[0] * 50, 1.9 * r_peak)
        center = (c, 0.35 * c, -0.3 * c)
        half_width = 0.45 * c
    grid = UniformGrid.cube(center, half_width, n)

    work = sol
    if corrupt_factor is not None:
        work = RadialSolution(sol.problem, sol.E, sol.G * corrupt_factor, sol.F, sol.n_nodes)
    psi, pot = embed_solution(work, grid)

    gates: dict[str, dict[str, float]] = {}

    def add(name: str, arr) -> None:
        mx, rms = interior_norms(arr, grid)
        gates[name] = {"max": mx, "rms": rms}

    add("first_order_sigma", dirac_residual(psi, pot, route="sigma"))
    add("first_order_explicit", dirac_residual(psi, pot, route="explicit"))
    rr = reality_residual(psi)
    add("reality_u", rr.r_u)
    add("reality_v", rr.r_v)
    add("reality_cross", rr.r_cross)
    mres = maxwell_residual(psi, pot)
    add("poisson_time", mres[0])
    add("lorenz", lorenz_residual(pot))
    # A^k = 0, so the spatial residual is exactly the (azimuthal) source term
    maxwell_spatial = float(np.max(np.abs(mres[1:][:, grid.interior()])))
    ungated = () if gate_poisson else ("poisson_time",)
    passed = all(g["max"] <= tol for name, g in gates.items() if name not in ungated)
    return EmbedReport(
        gates=gates,
        maxwell_spatial=maxwell_spatial,
        passed=passed,
        grid_shape=grid.shape,
        tol=tol,
        ungated=ungated,
    )
