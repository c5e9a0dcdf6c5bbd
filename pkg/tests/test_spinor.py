"""Unit tests for the 2-spinor layer: frozen conventions + algebraic identities."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlab import spinor as sp

SQ2 = np.sqrt(2.0)


def test_raise_lower_frozen_examples():
    assert np.allclose(sp.raise_index(np.array([1, 0])), [0, -1])
    assert np.allclose(sp.raise_index(np.array([0, 1])), [1, 0])
    assert np.allclose(sp.lower_index(np.array([0, -1])), [1, 0])
    assert np.allclose(sp.lower_index(np.array([1, 0])), [0, 1])


@given(
    a=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
    b=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
)
def test_raise_lower_roundtrip(a, b):
    xi = np.array([a, b])
    assert np.array_equal(sp.lower_index(sp.raise_index(xi)), xi)
    assert np.array_equal(sp.raise_index(sp.lower_index(xi)), xi)


def test_contract_is_antisymmetric():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    assert abs(sp.contract(x, y) + sp.contract(y, x)) < 1e-15
    assert abs(sp.contract(x, x)) == 0.0
    # contraction via explicit raise: xi^A eta_A
    assert np.isclose(sp.contract(x, y), np.sum(sp.raise_index(x) * y))


def test_sigma_identities_exact():
    d1, d2 = sp.sigma_identity_residuals()
    assert d1 < 1e-12
    assert d2 < 1e-12


def test_dyad_normalize_frozen_example():
    o, iota = sp.dyad_normalize(np.array([2.0, 0.0]), np.array([0.0, 1.0]))
    assert np.allclose(o, [SQ2, 0])
    assert np.allclose(iota, [0, 1 / SQ2])


def test_dyad_normalize_sign_branch():
    o1, i1 = sp.dyad_normalize(np.array([1.0, 0.3j]), np.array([0.2, 1.0]))
    o2, i2 = sp.dyad_normalize(-np.array([1.0, 0.3j]), -np.array([0.2, 1.0]))
    assert np.allclose(o1, o2) and np.allclose(i1, i2)
    assert np.real(o1[0]) >= 0


def test_dyad_normalize_degenerate_raises():
    with pytest.raises(sp.DegenerateDyadError):
        sp.dyad_normalize(np.array([1.0, 2.0]), np.array([2.0, 4.0]))
    with pytest.raises(sp.DegenerateDyadError):
        sp.dyad_normalize(np.zeros(2), np.array([1.0, 0.0]))


def test_canonical_tetrad_frozen():
    t = sp.tetrad_from_dyad(sp.Dyad.normalized(np.array([1, 0]), np.array([0, 1])))
    assert np.allclose(t.l, np.array([1, 0, 0, -1]) / SQ2, atol=1e-15)
    assert np.allclose(t.n, np.array([1, 0, 0, +1]) / SQ2, atol=1e-15)
    assert np.allclose(t.m, np.array([0, -1, -1j, 0]) / SQ2, atol=1e-15)
    assert sp.lambda_squared(t) == pytest.approx(0.0, abs=1e-15)


def test_boosted_dyad_staticity_value():
    # o = (a, 0), iota = (0, 1/a): l and n stretch oppositely along z and the
    # spatial sum l^3 + n^3 = (a^-2 - a^2)/sqrt2 exactly.
    a = 1.7
    t = sp.tetrad_from_dyad(sp.Dyad(np.array([a, 0.0]), np.array([0.0, 1 / a])))
    s3 = t.l[3] + t.n[3]
    assert s3 == pytest.approx((a**-2 - a**2) / SQ2, rel=1e-14)
    assert sp.lambda_squared(t) == pytest.approx(s3**2, rel=1e-14)


def test_thousand_random_dyads_all_identities():
    rng = np.random.default_rng(20240817)
    dyad = sp.random_dyad(rng, shape=(1000,))
    assert dyad.validate(tol=1e-12) < 1e-12
    tet = sp.tetrad_from_dyad(dyad)
    assert sp.tetrad_relation_residuals(tet) < 1e-12
    # decompose/reconstruct an arbitrary real vector field
    x = rng.standard_normal((4, 1000))
    coeffs = sp.decompose_vector(x, tet)
    err = np.max(np.abs(sp.reconstruct_vector(coeffs, tet) - x))
    assert err < 1e-12
    # staticity invariant: (l^0+n^0)^2 - lambda^2 = 2, lambda^2 >= 0
    lam2 = sp.lambda_squared(tet)
    assert np.all(lam2 >= 0)
    inv = (tet.l[0] + tet.n[0]) ** 2 - lam2
    assert np.max(np.abs(inv - 2.0)) < 1e-12
    assert np.max(np.abs((tet.l[0] + tet.n[0]) / SQ2 - np.sqrt(1 + lam2 / 2))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_normalize_idempotent(seed):
    rng = np.random.default_rng(seed)
    d = sp.random_dyad(rng)
    o2, i2 = sp.dyad_normalize(d.o, d.iota)
    assert np.allclose(o2, d.o, atol=1e-14)
    assert np.allclose(i2, d.iota, atol=1e-14)


def test_tetrad_reality():
    rng = np.random.default_rng(3)
    t = sp.tetrad_from_dyad(sp.random_dyad(rng, shape=(50,)))
    assert np.isrealobj(t.l) and np.isrealobj(t.n)
    # mbar really is the conjugate
    assert np.array_equal(t.mbar, np.conj(t.m))
