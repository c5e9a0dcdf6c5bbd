"""Radial eigensolver: closed-form Coulomb oracles, Poisson, and embedding."""

import math
import time

import numpy as np
import pytest

from mdlab.radial import (
    RadialProblem,
    RadialSolution,
    SeedError,
    charge_of_density,
    embed_check,
    far_field_seed,
    frobenius_seed,
    poisson_radial,
    radial_rhs,
    shoot_eigenvalue,
)

M = 1.0


def coulomb_problem(za: float, n: int = 4000, e: float = 1.0) -> RadialProblem:
    """Point source q = za/e: an exactly solvable background, no regular part."""
    r = RadialProblem.log_grid(1e-4, 60.0 / za, n)
    return RadialProblem(kappa=-1, m=M, e=e, q_interior=za / e, r=r)


def coulomb_ground_energy(za: float) -> float:
    return M * math.sqrt(1.0 - za * za)


def coulomb_energy(za: float, n_r: int) -> float:
    gamma = math.sqrt(1.0 - za * za)
    return M / math.sqrt(1.0 + (za / (n_r + gamma)) ** 2)


def coulomb_exact_solution(prob: RadialProblem, za: float) -> RadialSolution:
    """Closed-form ground state: G = r^gamma e^{-za r}, F = -za/(1+gamma) G."""
    gamma = math.sqrt(1.0 - za * za)
    G = prob.r**gamma * np.exp(-za * prob.r)
    F = -za / (1.0 + gamma) * G
    return RadialSolution(prob, M * gamma, G, F, 0).normalized()


# ------------------------------------------------------------------ eigenvalues


@pytest.mark.parametrize("za", [0.1, 0.3, 0.5])
def test_point_source_ground_state_energy(za):
    res = shoot_eigenvalue(coulomb_problem(za), bracket=(0.5, 0.999), n_scan=41)
    assert res.converged, res.message
    assert res.n_nodes == 0
    assert abs(res.E - coulomb_ground_energy(za)) < 1e-6
    assert res.defect < 1e-10


def test_ground_state_energy_frozen_digits():
    # literal digit string, not recomputed through the same sqrt call
    res = shoot_eigenvalue(coulomb_problem(0.3), bracket=(0.5, 0.999), n_scan=41)
    assert abs(res.E - 0.9539392014169457) < 1e-12


def test_solve_runtime_budget():
    t0 = time.perf_counter()
    res = shoot_eigenvalue(coulomb_problem(0.3), bracket=(0.5, 0.999), n_scan=41)
    assert res.converged
    assert time.perf_counter() - t0 < 10.0


def test_trajectory_matches_closed_form():
    prob = coulomb_problem(0.3)
    res = shoot_eigenvalue(prob, bracket=(0.5, 0.999), n_scan=41)
    exact = coulomb_exact_solution(prob, 0.3)
    scale = np.max(np.abs(exact.G))
    assert np.max(np.abs(res.solution.G - exact.G)) < 1e-8 * scale
    assert np.max(np.abs(res.solution.F - exact.F)) < 1e-8 * scale


def test_excited_state_selected_by_node_count():
    # the bracket contains both the nodeless state and the one-node state;
    # target_nodes must pick the right defect root
    prob = coulomb_problem(0.3)
    res = shoot_eigenvalue(prob, bracket=(0.9, 0.9995), n_scan=81, target_nodes=1)
    assert res.converged, res.message
    assert res.n_nodes == 1
    assert abs(res.E - coulomb_energy(0.3, n_r=1)) < 1e-6


def test_engines_agree_on_eigenvalue():
    prob = coulomb_problem(0.3, n=2000)
    fast = shoot_eigenvalue(prob, bracket=(0.9, 0.99), n_scan=21, polish=False)
    polished = shoot_eigenvalue(prob, bracket=(0.9, 0.99), n_scan=21, polish=True)
    assert fast.converged and polished.converged
    assert abs(fast.E - polished.E) < 1e-9


def test_empty_bracket_is_first_class_result():
    res = shoot_eigenvalue(coulomb_problem(0.1, n=1500), bracket=(0.05, 0.2), n_scan=11)
    assert not res.converged
    assert "sign change" in res.message
    assert res.scan_energies is not None and res.scan_defects is not None
    assert res.E is None


def test_bracket_validation():
    with pytest.raises(ValueError):
        shoot_eigenvalue(coulomb_problem(0.1, n=1500), bracket=(0.5, 1.5))


# ------------------------------------------------------------------------ seeds


def test_series_seed_matches_closed_form_expansion():
    # independent oracle: expanding G = r^gamma e^{-za r} to first order gives
    # coefficient ratios the series matrix solve must reproduce at E = E_exact
    za = 0.3
    prob = coulomb_problem(za)
    gamma = math.sqrt(1.0 - za * za)
    E = M * gamma
    y, gam = frobenius_seed(prob, E)
    assert abs(gam - gamma) < 1e-15
    r0 = prob.r[0]
    c = -za / (1.0 + gamma)
    expect = r0**gamma * np.array([1.0 - za * r0, c * (1.0 - za * r0)])
    assert np.allclose(y, expect, rtol=1e-7, atol=0.0)


def test_series_seed_gamma_frozen():
    prob = coulomb_problem(0.6)
    _, gamma = frobenius_seed(prob, 0.7)
    assert abs(gamma - 0.8) < 1e-15


def test_series_seed_residual_scales_with_radius():
    # plugging the two-term series into the exact equations must leave a
    # residual of the next series order, i.e. shrinking ~ r^{gamma+1}
    za, E = 0.3, 0.9
    gamma = math.sqrt(1.0 - za * za)

    def residual_at(r_min: float) -> float:
        r = RadialProblem.log_grid(r_min, 60.0 / za, 64)
        prob = RadialProblem(kappa=-1, m=M, e=1.0, q_interior=za, r=r)
        y, _ = frobenius_seed(prob, E)
        h = 1e-7 * r_min
        rp = RadialProblem(kappa=-1, m=M, e=1.0, q_interior=za,
                           r=RadialProblem.log_grid(r_min + h, 60.0 / za, 64))
        yp, _ = frobenius_seed(rp, E)
        deriv = (yp - y) / h
        rhs = radial_rhs(r_min, y, -1, M, za / r_min, E)
        return float(np.max(np.abs(deriv - rhs)))

    r_a, r_b = 1e-3, 5e-4
    res_a, res_b = residual_at(r_a), residual_at(r_b)
    ratio = res_b / res_a
    assert ratio < 0.7 * (r_b / r_a) ** gamma  # decisively higher order


def test_far_field_seed_frozen_ratio():
    r = RadialProblem.log_grid(1e-3, 50.0, 64)
    prob = RadialProblem(kappa=-1, m=M, e=1.0, q_interior=0.0, r=r)
    y = far_field_seed(prob, E=0.6)
    assert y[0] == 1.0
    assert abs(y[1] + 0.5) < 1e-15  # -sqrt((1-0.6)/(1+0.6)) = -1/2


def test_far_field_seed_requires_gap():
    r = RadialProblem.log_grid(1e-3, 50.0, 64)
    prob = RadialProblem(kappa=-1, m=M, e=1.0, q_interior=0.0, r=r)
    with pytest.raises(SeedError):
        far_field_seed(prob, E=1.0)
    with pytest.raises(SeedError):
        far_field_seed(prob, E=-1.01)


def test_rhs_frozen_values():
    out = radial_rhs(2.0, np.array([1.0, 2.0]), kappa=-1, m=1.0, W=0.25, E=0.5)
    assert out[0] == 4.0       # 0.5*1 + 1.75*2
    assert out[1] == -0.75     # -0.5*2 - (-0.25)*1


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialProblem(kappa=-1, m=M, e=1.0, q_interior=0.1, r=np.linspace(0.1, 10, 100))
    with pytest.raises(ValueError):
        RadialProblem(kappa=-1, m=M, e=1.0, q_interior=0.1, r=np.array([0.1, 1.0, 10.0]))


# ---------------------------------------------------------------------- Poisson


def test_poisson_point_charge_only():
    r = RadialProblem.log_grid(1e-3, 100.0, 800)
    a0, q0 = poisson_radial(r, np.zeros_like(r), q_interior=2.0, e=1.0)
    assert np.max(np.abs(a0 - 2.0 / r)) == 0.0
    assert q0 == 2.0


def test_poisson_satisfies_gauss_law():
    from scipy.integrate import cumulative_simpson
    from scipy.interpolate import CubicSpline

    r = RadialProblem.log_grid(1e-3, 100.0, 3000)
    j0 = np.exp(-((r - 3.0) ** 2) / 0.5)
    e = 0.7
    a0, q0 = poisson_radial(r, j0, q_interior=0.4, e=e)
    s = np.log(r)
    # flux form: -r^2 dA0/dr must equal q_interior - 4 pi e * integral(j0 r'^2 dr'),
    # with the enclosed integral recomputed by an independent (Simpson) rule
    flux = -r * CubicSpline(s, a0)(s, 1)
    enclosed = 0.4 - 4.0 * np.pi * e * cumulative_simpson(j0 * r**3, x=s, initial=0.0)
    assert np.max(np.abs(flux - enclosed)) < 1e-7 * np.max(np.abs(enclosed))
    # pointwise source equation in the band where it is well conditioned;
    # the tolerance reflects spline second-derivative error, not the solver
    lap = (CubicSpline(s, a0)(s, 2) + CubicSpline(s, a0)(s, 1)) / r**2
    band = (r > 0.5) & (r < 20.0)
    src = 4.0 * np.pi * e * j0
    assert np.max(np.abs(lap[band] - src[band])) < 1e-4 * np.max(np.abs(src))
    # tail readout equals the bookkeeping charge
    assert abs(r[-1] * a0[-1] - q0) < 1e-12
    assert abs(q0 - (0.4 - e * charge_of_density(r, j0))) < 1e-12
    assert abs(flux[-1] - q0) < 1e-7 * max(1.0, abs(q0))


def test_charge_normalization():
    prob = coulomb_problem(0.3)
    sol = coulomb_exact_solution(prob, 0.3).normalized(q_target=2.5)
    assert abs(sol.q_psi() - 2.5) < 1e-12
    assert abs(charge_of_density(prob.r, sol.j0()) - 2.5) < 1e-12


# -------------------------------------------------------------------- embedding


@pytest.fixture(scope="module")
def coulomb_solution():
    prob = coulomb_problem(0.3)
    res = shoot_eigenvalue(prob, bracket=(0.5, 0.999), n_scan=41)
    assert res.converged
    return res.solution


def test_embedding_certificate(coulomb_solution):
    rep = embed_check(coulomb_solution, n=40, gate_poisson=False)
    assert rep.passed
    for name in ("first_order_sigma", "first_order_explicit",
                 "reality_u", "reality_v", "reality_cross", "lorenz"):
        assert rep.gates[name]["max"] < 1e-5, name
    # the spatial current of this ansatz is azimuthal and genuinely nonzero
    assert rep.maxwell_spatial > 1e-4
    # an external-source eigenstate must NOT satisfy the coupled time equation
    assert rep.gates["poisson_time"]["max"] > 1e-3
    assert "poisson_time" in rep.ungated


def test_embedding_detects_corruption(coulomb_solution):
    clean = embed_check(coulomb_solution, n=40, gate_poisson=False)
    bad = embed_check(coulomb_solution, n=40, gate_poisson=False, corrupt_factor=1.01)
    assert not bad.passed
    ratio = bad.gates["first_order_sigma"]["max"] / clean.gates["first_order_sigma"]["max"]
    assert ratio > 100.0


def test_embedding_rejects_patch_outside_grid(coulomb_solution):
    r_max = coulomb_solution.r[-1]
    with pytest.raises(ValueError, match="radial grid"):
        embed_check(coulomb_solution, n=16, center=(1.5 * r_max, 0.0, 0.0), half_width=1.0)
    with pytest.raises(ValueError, match="radial grid"):
        # odd point count centered on the origin puts a node exactly at r = 0
        embed_check(coulomb_solution, n=17, center=(0.0, 0.0, 0.0), half_width=1.0)
