"""Closed-form stationary solutions and exact transformations, for testing.

Free plane waves solve the first-order system with zero potential at energy
E = +sqrt(m^2 + |k|^2); superpositions of waves with equal |k| share that
energy and remain solutions. Two exact transformations generate nontrivial
backgrounds from them:

* gauge dressing with a harmonic scalar (keeps the stationary Lorenz gauge),
* a constant energy shift absorbed into the time component of the potential.

These families exercise every term of the residual evaluators with known
answers, without assuming anything about the nonlinear coupled problem.
"""

from __future__ import annotations

import numpy as np

from .fields import PotentialField, SpinorFields, UniformGrid
from .spinor import SIGMA_UP

__all__ = ["plane_wave", "superpose", "gauge_dress", "shift_energy"]

_SQRT2 = np.sqrt(2.0)


def plane_wave(
    grid: UniformGrid,
    kvec: tuple[float, float, float],
    amplitude: tuple[complex, complex],
    m: float,
    e: float = 1.0,
) -> SpinorFields:
    """Free plane-wave solution U_A = u_A exp(i k.x) at E = +sqrt(m^2+|k|^2).

    The conjugate half follows from the first-order system itself:
    Vbar^Adot = (1/m) [E delta - sqrt2 k_j sigma^j]_B^Adot u_B exp(i k.x).
    """
    k = np.asarray(kvec, dtype=float)
    u = np.asarray(amplitude, dtype=complex)
    E = float(np.sqrt(m * m + k @ k))
    x, y, z = grid.meshes()
    phase = np.exp(1j * (k[0] * x + k[1] * y + k[2] * z))
    kmat = E * np.eye(2) - _SQRT2 * np.einsum("k,kba->ba", k, SIGMA_UP[1:])
    vb_amp = np.einsum("ba,b->a", kmat, u) / m
    U = u[:, None, None, None] * phase
    Vbar = vb_amp[:, None, None, None] * phase
    return SpinorFields(grid=grid, U=U, Vbar=Vbar, E=E, m=m, e=e)


def superpose(waves: list[SpinorFields]) -> SpinorFields:
    """Sum of stationary solutions sharing (grid, E, m, e) — still a solution."""
    first = waves[0]
    for w in waves[1:]:
        if abs(w.E - first.E) > 1e-12 * max(1.0, abs(first.E)):
            raise ValueError("superposition requires equal energies")
        if w.m != first.m or w.e != first.e or w.grid != first.grid:
            raise ValueError("superposition requires identical grid, m and e")
    U = sum(w.U for w in waves)
    Vbar = sum(w.Vbar for w in waves)
    return SpinorFields(grid=first.grid, U=U, Vbar=Vbar, E=first.E, m=first.m, e=first.e)


def gauge_dress(
    psi: SpinorFields,
    pot: PotentialField,
    lam: np.ndarray,
    grad_lam: np.ndarray,
) -> tuple[SpinorFields, PotentialField]:
    """Apply the stationary gauge transformation generated by a scalar field.

    Both bispinor halves pick up the same phase exp(i e lam); the spatial
    potential shifts by A^k -> A^k - d_k lam (upper-index components; the
    lower-index rule is A_k -> A_k + d_k lam). The caller supplies the exact
    gradient so no discretization error enters the transformation; a harmonic
    lam preserves the stationary Lorenz gauge.
    """
    phase = np.exp(1j * psi.e * lam)
    dressed = SpinorFields(
        grid=psi.grid, U=psi.U * phase, Vbar=psi.Vbar * phase, E=psi.E, m=psi.m, e=psi.e
    )
    A = pot.A.copy()
    A[1:] -= np.asarray(grad_lam)
    return dressed, PotentialField(grid=pot.grid, A=A)


def shift_energy(
    psi: SpinorFields, pot: PotentialField, omega: float
) -> tuple[SpinorFields, PotentialField]:
    """Shift E -> E - omega, compensated by A^0 -> A^0 + omega/e (e nonzero).

    The combination E + e A^0 is what the first-order system sees, so the
    residuals are unchanged; used to probe gauge-equivalence of energies.
    """
    if psi.e == 0:
        raise ValueError("energy shift needs nonzero coupling e")
    shifted = SpinorFields(
        grid=psi.grid, U=psi.U.copy(), Vbar=psi.Vbar.copy(), E=psi.E - omega, m=psi.m, e=psi.e
    )
    A = pot.A.copy()
    A[0] += omega / psi.e
    return shifted, PotentialField(grid=pot.grid, A=A)
