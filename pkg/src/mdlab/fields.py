"""Grid fields and residual evaluators for the stationary coupled system.

The unknowns of a stationary state with energy E are two 2-spinor fields on a
spatial grid — U_A (upper bispinor half) and Vbar^Adot (lower half, stored
with its natural upper dotted index) — together with a real 4-potential A^beta.
For the wave function itself the time dependence is a pure phase exp(-iEt).

This module provides:

* :class:`UniformGrid` plus 4th-order centered finite differences (interior
  points only; a shell of width 2 at each face carries wrap-around garbage and
  is excluded by :meth:`UniformGrid.interior`);
* two *independent* assemblies of the first-order residual
  (:func:`dirac_residual` with ``route="sigma"`` contracting the van der
  Waerden symbols, or ``route="explicit"`` transcribing the scalar component
  form) — they must agree to 1e-10, which is a live cross-check of every sign
  convention in :mod:`mdlab.spinor`;
* the second-order elimination form (:func:`klein_gordon_residual`), the
  reality conditions (:func:`reality_residual`), the sourced wave equation for
  the potential (:func:`maxwell_residual`, :func:`lorenz_residual`);
* algebraic reconstruction of the potential from the spinor fields alone
  (:func:`potential_from_dirac`) and the equivalent polar-variable formula for
  its time component (:func:`a0_formula`);
* the polar decomposition (R, chi, dyad) and the conserved current
  (:func:`polar_decompose`, :func:`current`).

Conventions: charge coupling enters as -ieA on U and +ieA on the conjugate
half; Maxwell source carries an explicit 4*pi: Lap A^beta = 4*pi*e*j^beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spinor import (
    SIGMA_UP,
    SIGMA_UP_LOWSP,
    lambda_squared,
    raise_index,
    tetrad_from_dyad,
    Dyad,
)

__all__ = [
    "UniformGrid",
    "SpinorFields",
    "PotentialField",
    "PolarField",
    "PotentialExtraction",
    "RealityResiduals",
    "CurrentReport",
    "DegenerateFieldError",
    "d1",
    "d2",
    "laplacian",
    "dirac_residual",
    "klein_gordon_residual",
    "reality_residual",
    "maxwell_residual",
    "lorenz_residual",
    "potential_from_dirac",
    "a0_formula",
    "polar_decompose",
    "current",
    "interior_norms",
]

_SQRT2 = np.sqrt(2.0)


class DegenerateFieldError(ValueError):
    """Polar decomposition attempted where the spinor pair degenerates."""

    def __init__(self, message: str, points: np.ndarray):
        super().__init__(message)
        self.points = points


# --------------------------------------------------------------------------- grid


@dataclass(frozen=True)
class UniformGrid:
    """Uniform Cartesian grid. Field arrays carry the grid as trailing axes.

    origin is the coordinate of index (0,0,0); spacing the per-axis step.
    """

    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]
    shape: tuple[int, int, int]

    @classmethod
    def cube(cls, center: tuple[float, float, float], half_width: float, n: int) -> "UniformGrid":
        h = 2.0 * half_width / (n - 1)
        org = tuple(c - half_width for c in center)
        return cls(org, (h, h, h), (n, n, n))

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            self.origin[i] + self.spacing[i] * np.arange(self.shape[i]) for i in range(3)
        )

    def meshes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ax = self.axes()
        return np.meshgrid(*ax, indexing="ij")

    def interior(self, width: int = 2) -> np.ndarray:
        """Boolean mask excluding a boundary shell (finite-difference halo)."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[width:-width, width:-width, width:-width] = True
        return mask

    def cell_volume(self) -> float:
        return float(self.spacing[0] * self.spacing[1] * self.spacing[2])


def _ax(axis: int) -> int:
    # grid axes are always the last three array axes
    return axis - 3


def d1(f: np.ndarray, grid: UniformGrid, axis: int) -> np.ndarray:
    """4th-order centered first derivative along spatial axis 0, 1 or 2.

    Uses periodic rolls; values within two cells of a face are meaningless and
    must be masked with :meth:`UniformGrid.interior`.
    """
    a = _ax(axis)
    h = grid.spacing[axis]
    return (
        -np.roll(f, -2, a) + 8 * np.roll(f, -1, a) - 8 * np.roll(f, 1, a) + np.roll(f, 2, a)
    ) / (12.0 * h)


def d2(f: np.ndarray, grid: UniformGrid, axis: int) -> np.ndarray:
    """4th-order centered second derivative along a spatial axis."""
    a = _ax(axis)
    h = grid.spacing[axis]
    return (
        -np.roll(f, -2, a)
        + 16 * np.roll(f, -1, a)
        - 30 * f
        + 16 * np.roll(f, 1, a)
        - np.roll(f, 2, a)
    ) / (12.0 * h * h)


def laplacian(f: np.ndarray, grid: UniformGrid) -> np.ndarray:
    return d2(f, grid, 0) + d2(f, grid, 1) + d2(f, grid, 2)


def interior_norms(res: np.ndarray, grid: UniformGrid, width: int = 2) -> tuple[float, float]:
    """(max, rms) of |res| over interior points; leading axes are reduced too."""
    mask = grid.interior(width)
    vals = np.abs(res[..., mask])
    return float(np.max(vals)), float(np.sqrt(np.mean(vals**2)))


# --------------------------------------------------------------------------- fields


@dataclass
class SpinorFields:
    """Stationary bispinor data on a grid: U_A and Vbar^Adot, plus (E, m, e)."""

    grid: UniformGrid
    U: np.ndarray       # (2, nx, ny, nz) complex
    Vbar: np.ndarray    # (2, nx, ny, nz) complex
    E: float
    m: float
    e: float

    def __post_init__(self) -> None:
        self.U = np.asarray(self.U, dtype=complex)
        self.Vbar = np.asarray(self.Vbar, dtype=complex)
        expected = (2, *self.grid.shape)
        if self.U.shape != expected or self.Vbar.shape != expected:
            raise ValueError(f"spinor fields must have shape {expected}")

    def v_lower(self) -> np.ndarray:
        """V_A reconstructed from Vbar^Adot: (-conj(Vbar^1), conj(Vbar^0))."""
        return np.stack([-np.conj(self.Vbar[1]), np.conj(self.Vbar[0])])


@dataclass
class PotentialField:
    """Real 4-potential A^beta (upper Minkowski index) on a grid."""

    grid: UniformGrid
    A: np.ndarray       # (4, nx, ny, nz) real

    def __post_init__(self) -> None:
        self.A = np.asarray(self.A, dtype=float)
        if self.A.shape != (4, *self.grid.shape):
            raise ValueError(f"potential must have shape {(4, *self.grid.shape)}")

    @classmethod
    def zero(cls, grid: UniformGrid) -> "PotentialField":
        return cls(grid, np.zeros((4, *grid.shape)))


@dataclass
class PolarField:
    """Pointwise polar data: scalars R >= 0 and chi, plus the normalized dyad."""

    R: np.ndarray
    chi: np.ndarray
    o: np.ndarray       # (2, ...) complex, lower index
    iota: np.ndarray    # (2, ...) complex, lower index


@dataclass
class PotentialExtraction:
    """Potential reconstructed from the spinor fields.

    A is the real part (the physical candidate); im_violation is |Im| of the
    reconstruction, which vanishes exactly when the reality conditions hold.
    """

    A: np.ndarray               # (4, ...) real
    im_violation: np.ndarray    # (4, ...) real, >= 0
    rexp: np.ndarray            # complex contraction field R*exp(i*chi)


@dataclass
class RealityResiduals:
    """The three reality-condition residuals: two real, one complex."""

    r_u: np.ndarray
    r_v: np.ndarray
    r_cross: np.ndarray


@dataclass
class CurrentReport:
    """Conserved current j^beta and derived staticity data."""

    j: np.ndarray          # (4, ...) real
    s: np.ndarray          # (3, ...) real: spatial part of l + n
    lambda2: np.ndarray    # sum_k s_k^2
    R: np.ndarray


# --------------------------------------------------------------- internal helpers


def _rexp(psi: SpinorFields) -> np.ndarray:
    """Contraction field u_C v^C = U0*V1 - U1*V0 = R exp(i chi)."""
    V = psi.v_lower()
    return psi.U[0] * V[1] - psi.U[1] * V[0]


def _slash_deriv(s: np.ndarray, grid: UniformGrid, sign_E: int, E: float) -> np.ndarray:
    """sigma^{alpha B Adot} d_alpha s_B with d_t -> sign_E * iE; shape (2, ...)."""
    ds = np.stack([d1(s, grid, k) for k in range(3)])  # (3, 2, ...)
    out = np.einsum("kba,kb...->a...", SIGMA_UP[1:], ds)
    out += sign_E * 1j * E * np.einsum("ba,b...->a...", SIGMA_UP[0], s)
    return out


def _a_slash(s: np.ndarray, A: np.ndarray) -> np.ndarray:
    """A^{B Adot} s_B = sigma^{alpha B Adot} A_alpha s_B (A given with upper index)."""
    out = A[0] * np.einsum("ba,b...->a...", SIGMA_UP[0], s)
    for k in (1, 2, 3):
        out -= A[k] * np.einsum("ba,b...->a...", SIGMA_UP[k], s)
    return out


# --------------------------------------------------------------------- evaluators


def dirac_residual(psi: SpinorFields, pot: PotentialField, route: str = "sigma") -> np.ndarray:
    """First-order residual, four complex component fields, shape (4, ...).

    Both routes return the residual in the *same* component basis (the scalar
    transcription's line order), so they can be compared pointwise:

    * ``route="sigma"``: contract the van der Waerden symbols with the spinor
      fields; the conjugate pair of lines is the eps-raised conjugate of the
      second abstract equation.
    * ``route="explicit"``: hand-transcribed scalar components using the
      complex combinations dcomb = d_x + i d_y and Ac = A^1 + i A^2.

    A zero residual on the interior means (U, Vbar) solves the first-order
    system in the background potential at energy E.
    """
    grid, U, Vb, E, m, e = psi.grid, psi.U, psi.Vbar, psi.E, psi.m, psi.e
    A = pot.A
    if route == "sigma":
        V = psi.v_lower()
        ubar_up = np.stack([np.conj(U[1]), -np.conj(U[0])])
        res_u = _SQRT2 * (_slash_deriv(U, grid, -1, E) - 1j * e * _a_slash(U, A)) + 1j * m * Vb
        res_v = _SQRT2 * (_slash_deriv(V, grid, +1, E) + 1j * e * _a_slash(V, A)) + 1j * m * ubar_up
        return np.stack([res_u[0], res_u[1], -np.conj(res_v[0]), np.conj(res_v[1])])
    if route == "explicit":
        dx = lambda f: d1(f, grid, 0)
        dy = lambda f: d1(f, grid, 1)
        dz = lambda f: d1(f, grid, 2)
        dp = lambda f: dx(f) + 1j * dy(f)
        dm = lambda f: dx(f) - 1j * dy(f)
        Ac = A[1] + 1j * A[2]
        Acb = A[1] - 1j * A[2]
        l1 = 1j * m * (Vb[0] - (E / m) * U[0]) - dm(U[1]) - dz(U[0]) \
            - 1j * e * ((A[0] + A[3]) * U[0] + Acb * U[1])
        l2 = 1j * m * (Vb[1] - (E / m) * U[1]) - dp(U[0]) + dz(U[1]) \
            - 1j * e * (Ac * U[0] + (A[0] - A[3]) * U[1])
        l3 = 1j * m * (U[1] - (E / m) * Vb[1]) + dp(Vb[0]) - dz(Vb[1]) \
            + 1j * e * (-(A[0] + A[3]) * Vb[1] + Ac * Vb[0])
        l4 = 1j * m * (U[0] - (E / m) * Vb[0]) + dm(Vb[1]) + dz(Vb[0]) \
            + 1j * e * (Acb * Vb[1] - (A[0] - A[3]) * Vb[0])
        return np.stack([l1, l2, l3, l4])
    raise ValueError(f"unknown route {route!r}")


def klein_gordon_residual(psi: SpinorFields, pot: PotentialField) -> np.ndarray:
    """Second-order (squared-operator) residual for the two U components.

    This is the elimination of Vbar from the first-order system; any solution
    of the first-order system satisfies it, so it serves as an independent
    consistency probe with different discretization error structure.
    """
    grid, U, E, m, e = psi.grid, psi.U, psi.E, psi.m, psi.e
    A = pot.A
    dx = lambda f: d1(f, grid, 0)
    dy = lambda f: d1(f, grid, 1)
    dz = lambda f: d1(f, grid, 2)
    dp = lambda f: dx(f) + 1j * dy(f)
    dm = lambda f: dx(f) - 1j * dy(f)
    Ac = A[1] + 1j * A[2]
    Acb = A[1] - 1j * A[2]
    a_dot_a = A[0] ** 2 - A[1] ** 2 - A[2] ** 2 - A[3] ** 2
    common = (E**2 - m**2) + 2 * e * E * A[0] + e**2 * a_dot_a
    conv0 = 2j * e * (A[1] * dx(U[0]) + A[2] * dy(U[0]) + A[3] * dz(U[0]))
    conv1 = 2j * e * (A[1] * dx(U[1]) + A[2] * dy(U[1]) + A[3] * dz(U[1]))
    r0 = (
        laplacian(U[0], grid)
        + conv0
        + (common + 1j * e * (dz(A[0] + A[3]) + dm(Ac))) * U[0]
        + 1j * e * (dz(Acb) + dm(A[0] - A[3])) * U[1]
    )
    r1 = (
        laplacian(U[1], grid)
        + conv1
        + (common + 1j * e * (-dz(A[0] - A[3]) + dp(Acb))) * U[1]
        + 1j * e * (-dz(Ac) + dp(A[0] + A[3])) * U[0]
    )
    return np.stack([r0, r1])


def reality_residual(psi: SpinorFields) -> RealityResiduals:
    """Residuals of the three conditions equivalent to the reconstructed
    potential being real.

    r_u and r_v are real fields: the divergence-type contraction of the U
    (resp. V) bilinear plus/minus sqrt2 * m * R * sin(chi). r_cross is the
    complex mixed condition. All vanish on exact stationary solutions.
    """
    grid, U = psi.grid, psi.U
    V = psi.v_lower()
    m = psi.m
    im_rexp = np.imag(_rexp(psi))

    def div_bilinear(s: np.ndarray) -> np.ndarray:
        bil = np.einsum("a...,b...->ab...", s, np.conj(s))
        acc = 0.0
        for k in (1, 2, 3):
            acc = acc + np.einsum("ab,ab...->...", SIGMA_UP[k], d1(bil, grid, k - 1))
        return np.real(acc)

    r_u = div_bilinear(U) + _SQRT2 * m * im_rexp
    r_v = div_bilinear(V) - _SQRT2 * m * im_rexp

    vbar_low = np.stack([-psi.Vbar[1], psi.Vbar[0]])
    dU = np.stack([d1(U, grid, k) for k in range(3)])
    dVb = np.stack([d1(vbar_low, grid, k) for k in range(3)])
    r_cross = np.einsum("kab,a...,kb...->...", SIGMA_UP[1:], U, dVb) - np.einsum(
        "kab,ka...,b...->...", SIGMA_UP[1:], dU, vbar_low
    )
    # the time-derivative parts cancel between the two terms (opposite phases)
    return RealityResiduals(r_u=r_u, r_v=r_v, r_cross=r_cross)


def current(psi: SpinorFields) -> CurrentReport:
    """Conserved current j^beta = sqrt2 sigma^{beta A Adot} (U_A Ubar_Adot + V_A Vbar_Adot).

    Also reports the staticity vector s = spatial(l + n) and lambda^2 = |s|^2,
    computed from the normalized dyad; algebraically j = sqrt2 R (l + n), so
    j.j = 4 R^2 pointwise.
    """
    U = psi.U
    V = psi.v_lower()
    bil = np.einsum("a...,b...->ab...", U, np.conj(U)) + np.einsum(
        "a...,b...->ab...", V, np.conj(V)
    )
    j = _SQRT2 * np.real(np.einsum("xab,ab...->x...", SIGMA_UP, bil))
    rexp = _rexp(psi)
    R = np.abs(rexp)
    # staticity from the tetrad of the normalized dyad; where R ~ 0 the dyad is
    # undefined, so guard those points with NaN rather than raising
    with np.errstate(invalid="ignore", divide="ignore"):
        safe_root = np.where(R > 0, np.sqrt(rexp), 1.0)
        o = np.where(R > 0, psi.U / safe_root, np.nan + 0j)
        iota = np.where(R > 0, V / safe_root, np.nan + 0j)
    tet = tetrad_from_dyad(Dyad(o, iota))
    s = tet.l[1:] + tet.n[1:]
    return CurrentReport(j=j, s=s, lambda2=lambda_squared(tet), R=R)


def maxwell_residual(psi: SpinorFields, pot: PotentialField) -> np.ndarray:
    """Residual of Lap A^beta = 4 pi e j^beta (Lorenz gauge, stationary), (4, ...)."""
    lap = np.stack([laplacian(pot.A[b], psi.grid) for b in range(4)])
    return lap - 4.0 * np.pi * psi.e * current(psi).j


def lorenz_residual(pot: PotentialField) -> np.ndarray:
    """Stationary Lorenz gauge residual: sum_j d_j A^j (time term drops)."""
    g = pot.grid
    return d1(pot.A[1], g, 0) + d1(pot.A[2], g, 1) + d1(pot.A[3], g, 2)


def polar_decompose(psi: SpinorFields, degeneracy_tol: float = 1e-300) -> PolarField:
    """Pointwise polar split U_A = sqrt(R e^{i chi}) o_A, V_A = sqrt(R e^{i chi}) iota_A.

    chi is the principal argument of the contraction field; the dyad sign
    branch follows the same canonical rule as :func:`mdlab.spinor.dyad_normalize`.
    Raises :class:`DegenerateFieldError` listing offending grid indices when
    R falls below degeneracy_tol.
    """
    rexp = _rexp(psi)
    R = np.abs(rexp)
    bad = R < degeneracy_tol
    if np.any(bad):
        pts = np.argwhere(bad)
        raise DegenerateFieldError(
            f"spinor pair degenerate (R < {degeneracy_tol:g}) at {pts.shape[0]} grid "
            f"points, first few: {pts[:5].tolist()}",
            points=pts,
        )
    root = np.sqrt(rexp)
    o = psi.U / root
    iota = psi.v_lower() / root
    # canonical sign branch, vectorized (same rule as spinor._canonical_sign)
    re0 = np.real(o[0])
    im0 = np.imag(o[0])
    re1 = np.real(o[1])
    im1 = np.imag(o[1])
    flip = (re0 < 0) | (
        (re0 == 0) & ((im0 < 0) | ((im0 == 0) & ((re1 < 0) | ((re1 == 0) & (im1 < 0)))))
    )
    sgn = np.where(flip, -1.0, 1.0)
    return PolarField(R=R, chi=np.angle(rexp), o=o * sgn, iota=iota * sgn)


def potential_from_dirac(psi: SpinorFields, degeneracy_tol: float = 1e-300) -> PotentialExtraction:
    """Reconstruct the 4-potential algebraically from the spinor fields.

    The first-order system, solved for the potential where the contraction
    field is nonzero, gives

        A^{A Adot} = -i/(e Rexp) { V^A (slash_d U)^Adot + U^A (slash_d V)^Adot
                                   + (i m / sqrt2)(U^A Ubar^Adot + V^A Vbar^Adot) }

    with the stationary time derivative -iE on U and +iE on V. Its Minkowski
    components follow by contracting with the lower-spinor-index symbols. For
    exact solutions the result is real and reproduces the background
    potential; im_violation measures the failure of the reality conditions.

    Raises :class:`DegenerateFieldError` where |Rexp| < degeneracy_tol.
    """
    grid, U, E, m, e = psi.grid, psi.U, psi.E, psi.m, psi.e
    if e == 0:
        raise ValueError("potential reconstruction requires a nonzero coupling e")
    V = psi.v_lower()
    rexp = _rexp(psi)
    bad = np.abs(rexp) < degeneracy_tol
    if np.any(bad):
        pts = np.argwhere(bad)
        raise DegenerateFieldError(
            f"potential reconstruction degenerate at {pts.shape[0]} grid points, "
            f"first few: {pts[:5].tolist()}",
            points=pts,
        )
    du = _slash_deriv(U, grid, -1, E)    # (2:Adot, ...)
    dv = _slash_deriv(V, grid, +1, E)
    u_up = raise_index(U)
    v_up = raise_index(V)
    ubar_up = np.stack([np.conj(U[1]), -np.conj(U[0])])
    vbar_up = psi.Vbar
    core = (
        np.einsum("a...,b...->ab...", v_up, du)
        + np.einsum("a...,b...->ab...", u_up, dv)
        + (1j * m / _SQRT2)
        * (
            np.einsum("a...,b...->ab...", u_up, ubar_up)
            + np.einsum("a...,b...->ab...", v_up, vbar_up)
        )
    )
    a_spinor = (-1j / (e * rexp)) * core
    a_mink = np.einsum("xab,ab...->x...", SIGMA_UP_LOWSP, a_spinor)
    return PotentialExtraction(
        A=np.real(a_mink), im_violation=np.abs(np.imag(a_mink)), rexp=rexp
    )


def a0_formula(psi: SpinorFields) -> np.ndarray:
    """Time component of the potential from the polar variables (complex field).

    Independent transcription of the polar-variable formula

        A^0 = (m/2e) [ e^{-i chi} (|o_0|^2 + |o_1|^2 + |iota^0|^2 + |iota^1|^2) - 2E/m ]
            + (i/2e) [ (dR/R + i d chi) iota^A o_B terms + d(iota^A o_B) terms ]

    evaluated in branch-free form: the log-derivative terms cancel the
    quotient rule of d(iota^A o_B) exactly, leaving
    [V^A dU_B + U_B dV^A]/Rexp, so the only discretization entering is the
    same first-derivative stencil used by :func:`potential_from_dirac`. The
    two routes reach A^0 through entirely different algebra and must agree to
    1e-10; the imaginary part is again a reality diagnostic.
    """
    grid, E, m, e = psi.grid, psi.E, psi.m, psi.e
    if e == 0:
        raise ValueError("potential formula requires a nonzero coupling e")
    pol = polar_decompose(psi)
    rexp = pol.R * np.exp(1j * pol.chi)
    o, iota_up = pol.o, raise_index(pol.iota)

    sum_abs = (
        np.abs(o[0]) ** 2 + np.abs(o[1]) ** 2 + np.abs(iota_up[0]) ** 2 + np.abs(iota_up[1]) ** 2
    )
    e_mchi = np.conj(rexp) / pol.R
    first = (m / (2 * e)) * (e_mchi * sum_abs - 2 * E / m)

    U = psi.U
    v_up = raise_index(psi.v_lower())
    dU = np.stack([d1(U, grid, k) for k in range(3)])      # (3, 2, ...)
    dV = np.stack([d1(v_up, grid, k) for k in range(3)])

    def pair(a: int, b: int, comb: str) -> np.ndarray:
        # D(iota^a o_b) + (D Rexp / Rexp) iota^a o_b  ==  (V^a DU_b + U_b DV^a)/Rexp
        if comb == "p":        # d_x + i d_y
            du = dU[0][b] + 1j * dU[1][b]
            dv = dV[0][a] + 1j * dV[1][a]
        elif comb == "m":      # d_x - i d_y
            du = dU[0][b] - 1j * dU[1][b]
            dv = dV[0][a] - 1j * dV[1][a]
        else:                  # d_z
            du = dU[2][b]
            dv = dV[2][a]
        return (v_up[a] * du + U[b] * dv) / rexp

    second = (1j / (2 * e)) * (
        pair(0, 1, "m") + pair(1, 0, "p") + pair(0, 0, "z") - pair(1, 1, "z")
    )
    return first + second
