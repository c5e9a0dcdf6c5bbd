"""Tests for grid evaluators: analytic solution families with known answers."""

from __future__ import annotations

import numpy as np
import pytest

from mdlab.analytic import gauge_dress, plane_wave, shift_energy, superpose
from mdlab.fields import (
    DegenerateFieldError,
    PotentialField,
    SpinorFields,
    UniformGrid,
    a0_formula,
    current,
    dirac_residual,
    interior_norms,
    klein_gordon_residual,
    lorenz_residual,
    maxwell_residual,
    polar_decompose,
    potential_from_dirac,
    reality_residual,
)

M, COUPLING = 1.3, 0.8


def make_grid(n: int = 28) -> UniformGrid:
    # deliberately off-center so odd/even symmetries cannot hide sign errors
    return UniformGrid.cube((0.1, -0.2, 0.15), 1.0, n)


def make_superposition(grid: UniformGrid) -> SpinorFields:
    return superpose(
        [
            plane_wave(grid, (0.9, 0, 0), (1.0, 0.4j), M, COUPLING),
            plane_wave(grid, (0, 0.9, 0), (0.3, -0.2), M, COUPLING),
            plane_wave(grid, (0.54, 0, 0.72), (0.5j, 0.1), M, COUPLING),
        ]
    )


def make_dressed(grid: UniformGrid) -> tuple[SpinorFields, PotentialField]:
    psi = make_superposition(grid)
    x, y, z = grid.meshes()
    lam = 0.3 * (x * x - y * y) + 0.1 * x * y + 0.2 * x * z   # harmonic
    glam = np.stack([0.6 * x + 0.1 * y + 0.2 * z, -0.6 * y + 0.1 * x, 0.2 * x])
    return gauge_dress(psi, PotentialField.zero(grid), lam, glam)


def make_random_fields(grid: UniformGrid, seed: int = 5) -> SpinorFields:
    """Smooth but non-solution fields (Fourier modes), for identity tests."""
    rng = np.random.default_rng(seed)
    x, y, z = grid.meshes()

    def smooth() -> np.ndarray:
        acc = np.zeros(grid.shape, complex)
        for _ in range(4):
            k = rng.uniform(-1.5, 1.5, 3)
            c = complex(rng.standard_normal(), rng.standard_normal())
            acc += c * np.exp(1j * (k[0] * x + k[1] * y + k[2] * z))
        return acc

    return SpinorFields(
        grid, np.stack([smooth(), smooth()]), np.stack([smooth(), smooth()]),
        E=0.7, m=M, e=COUPLING,
    )


# ------------------------------------------------------------------ first order


def test_dual_route_assembly_agrees_pointwise():
    grid = make_grid()
    psi, pot = make_dressed(grid)
    r_sig = dirac_residual(psi, pot, route="sigma")
    r_exp = dirac_residual(psi, pot, route="explicit")
    assert interior_norms(r_sig - r_exp, grid)[0] < 1e-10
    # also on non-solution fields with a nonzero potential
    psir = make_random_fields(grid)
    r_sig = dirac_residual(psir, pot, route="sigma")
    r_exp = dirac_residual(psir, pot, route="explicit")
    assert interior_norms(r_sig - r_exp, grid)[0] < 1e-10


def test_plane_wave_solves_first_order_system():
    grid = make_grid()
    psi = make_superposition(grid)
    res = dirac_residual(psi, PotentialField.zero(grid), route="sigma")
    assert interior_norms(res, grid)[0] < 5e-6


def test_first_order_residual_converges_at_fourth_order():
    r = []
    for n in (28, 55):  # h halves (cube spans are equal; 27 -> 54 intervals)
        grid = make_grid(n)
        psi = make_superposition(grid)
        res = dirac_residual(psi, PotentialField.zero(grid), route="sigma")
        r.append(interior_norms(res, grid)[0])
    ratio = r[0] / r[1]
    assert 12.0 < ratio < 20.0


def test_gauge_dressing_preserves_residual_and_lorenz():
    grid = make_grid()
    psi, pot = make_dressed(grid)
    res = dirac_residual(psi, pot, route="sigma")
    assert interior_norms(res, grid)[0] < 5e-5
    assert interior_norms(lorenz_residual(pot), grid)[0] < 1e-12


def test_wrong_gauge_sign_is_loud():
    grid = make_grid()
    psi, pot = make_dressed(grid)
    bad = PotentialField(grid, pot.A.copy())
    bad.A[1:] *= -1.0
    res = dirac_residual(psi, bad, route="sigma")
    assert interior_norms(res, grid)[0] > 1e-1


def test_energy_shift_invariance():
    grid = make_grid()
    psi, pot = make_dressed(grid)
    shifted, pot2 = shift_energy(psi, pot, omega=0.37)
    res = dirac_residual(shifted, pot2, route="sigma")
    assert interior_norms(res, grid)[0] < 5e-5
    assert shifted.E == pytest.approx(psi.E - 0.37)


# ------------------------------------------------------------------ second order


def test_second_order_residual_on_solution():
    grid = make_grid()
    psi, pot = make_dressed(grid)
    kg = klein_gordon_residual(psi, pot)
    assert interior_norms(kg, grid)[0] < 5e-5


def test_second_order_detects_off_shell_energy():
    grid = make_grid()
    psi = make_superposition(grid)
    bad = SpinorFields(grid, psi.U, psi.Vbar, E=psi.E * 1.05, m=psi.m, e=psi.e)
    kg = klein_gordon_residual(bad, PotentialField.zero(grid))
    assert interior_norms(kg, grid)[0] > 1e-2


# ------------------------------------------------------------- reality + polar


def test_reality_residuals_vanish_on_solution():
    grid = make_grid()
    psi, _ = make_dressed(grid)
    rr = reality_residual(psi)
    assert interior_norms(rr.r_u, grid)[0] < 1e-5
    assert interior_norms(rr.r_v, grid)[0] < 1e-5
    assert interior_norms(rr.r_cross, grid)[0] < 1e-5
    # the first two are real fields by construction
    assert np.isrealobj(rr.r_u) and np.isrealobj(rr.r_v)


def test_polar_decomposition_reconstructs_fields():
    grid = make_grid(12)
    psi = make_random_fields(grid)
    pol = polar_decompose(psi)
    root = np.sqrt(pol.R * np.exp(1j * pol.chi))
    V = psi.v_lower()
    # o,iota reproduce U,V up to the per-point canonical sign (same for both)
    sgn_u = psi.U / (root * pol.o)
    sgn_v = V / (root * pol.iota)
    assert np.max(np.abs(np.abs(sgn_u) - 1)) < 1e-10
    assert np.max(np.abs(sgn_u - sgn_v)) < 1e-10
    # normalization iota^A o_A = 1
    contr = pol.iota[1] * pol.o[0] - pol.iota[0] * pol.o[1]
    assert np.max(np.abs(contr - 1)) < 1e-10


def test_degenerate_pair_raises_with_points():
    grid = make_grid(8)
    one = np.ones(grid.shape, complex)
    U = np.stack([one, 2 * one])
    # V parallel to U everywhere -> contraction identically zero
    Vbar = np.stack([np.conj(2 * one), -np.conj(one)])  # gives V = (1, 2)
    psi = SpinorFields(grid, U, Vbar, E=0.5, m=M, e=COUPLING)
    with pytest.raises(DegenerateFieldError) as exc:
        polar_decompose(psi)
    assert exc.value.points.shape[0] == 8**3
    with pytest.raises(DegenerateFieldError):
        potential_from_dirac(psi)


# ------------------------------------------------------- potential reconstruction


def test_reconstruction_recovers_background_potential():
    grid = make_grid()
    psi, pot = make_dressed(grid)
    rec = potential_from_dirac(psi)
    msk = grid.interior()
    assert np.max(np.abs((rec.A - pot.A)[:, msk])) < 5e-5
    assert np.max(rec.im_violation[:, msk]) < 5e-5


def test_a0_routes_agree_to_1e10_even_off_shell():
    grid = make_grid()
    psir = make_random_fields(grid)
    rec = potential_from_dirac(psir)
    a0 = a0_formula(psir)
    msk = grid.interior()
    assert np.max(np.abs((np.real(a0) - rec.A[0])[msk])) < 1e-10
    assert np.max(np.abs((np.abs(np.imag(a0)) - rec.im_violation[0])[msk])) < 1e-10


def test_reconstruction_flags_imaginary_part_for_non_solutions():
    grid = make_grid()
    psir = make_random_fields(grid)
    rec = potential_from_dirac(psir)
    assert np.max(rec.im_violation[:, grid.interior()]) > 1e-3


# ----------------------------------------------------------- current and Maxwell


def test_current_pointwise_identities():
    grid = make_grid(12)
    psi = make_random_fields(grid)
    cur = current(psi)
    jj = cur.j[0] ** 2 - cur.j[1] ** 2 - cur.j[2] ** 2 - cur.j[3] ** 2
    scale = np.max(cur.R**2)
    assert np.max(np.abs(jj - 4 * cur.R**2)) < 1e-12 * scale
    assert np.all(cur.j[0] > 0)
    # staticity invariant j0 = sqrt2 R (l0+n0) with (l0+n0) = sqrt(2 + lambda^2)
    pred = np.sqrt(2.0) * cur.R * np.sqrt(2.0 + cur.lambda2)
    assert np.max(np.abs(cur.j[0] - pred)) < 1e-10 * scale


def test_current_canonical_frozen_value():
    grid = make_grid(8)
    one = np.ones(grid.shape, complex)
    zero = np.zeros(grid.shape, complex)
    # U = (1,0), Vbar = (1,0)  =>  V = (0,1), Rexp = 1, j = (2,0,0,0)
    psi = SpinorFields(grid, np.stack([one, zero]), np.stack([one, zero]),
                       E=1.0, m=1.0, e=COUPLING)
    cur = current(psi)
    assert np.allclose(cur.j[0], 2.0, atol=1e-14)
    assert np.allclose(cur.j[1:], 0.0, atol=1e-14)
    assert np.allclose(cur.R, 1.0, atol=1e-14)
    assert np.allclose(cur.lambda2, 0.0, atol=1e-14)


def test_maxwell_residual_frozen_case():
    grid = make_grid()
    x, y, z = grid.meshes()
    one = np.ones(grid.shape, complex)
    zero = np.zeros(grid.shape, complex)
    psi = SpinorFields(grid, np.stack([one, zero]), np.stack([one, zero]),
                       E=1.0, m=1.0, e=COUPLING)
    # Lap A^0 = 12 exactly (4th-order stencil is exact on quadratics); j = (2,0,0,0)
    pot = PotentialField(grid, np.stack([x * x + 2 * y * y + 3 * z * z, x, z, x * y]))
    res = maxwell_residual(psi, pot)
    msk = grid.interior()
    assert np.max(np.abs(res[0][msk] - (12.0 - 8.0 * np.pi * COUPLING))) < 1e-10
    assert np.max(np.abs(res[1:][:, msk])) < 1e-10
    # divergence of (x, z, x*y) is exactly 1
    assert np.max(np.abs(lorenz_residual(pot)[msk] - 1.0)) < 1e-12
