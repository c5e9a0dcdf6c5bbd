"""2-spinor algebra: index gymnastics, dyads, van der Waerden symbols, null tetrads.

Conventions (fixed once, used everywhere):

* metric signature (+,-,-,-);
* epsilon_{AB} = epsilon^{AB} = [[0,1],[-1,0]], raising xi^A = eps^{AB} xi_B,
  lowering xi_A = eps_{BA} xi^B (so raise((1,0)) = (0,-1), raise((0,1)) = (1,0));
* van der Waerden symbols with both spinor indices down,
      sqrt(2) * sigma^alpha_{A Adot} = (I, s1, s2, s3)   (Pauli matrices),
  equivalently with spinor indices up
      sqrt(2) * sigma^{alpha A Adot} = (I, -s1, +s2, -s3).
  The relative spatial signs are not a free choice here: they are the unique
  assignment under which the abstract 2-spinor Dirac operator assembled from
  these symbols reproduces, component by component, the explicit scalar form
  implemented in :func:`mdlab.fields.dirac_residual` — the two assemblies are
  cross-checked to 1e-10 in the test suite.

All functions accept trailing grid axes: a spinor is an array of shape
(2, ...), a Minkowski vector (4, ...). Scalars work as shape (2,)/(4,).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPS",
    "SIGMA_UP",
    "SIGMA_UP_LOWSP",
    "SIGMA_LOW",
    "SIGMA_LOW_LOWSP",
    "MINKOWSKI_DIAG",
    "DegenerateDyadError",
    "Spinor2",
    "Dyad",
    "NullTetrad",
    "raise_index",
    "lower_index",
    "contract",
    "dyad_normalize",
    "random_dyad",
    "tetrad_from_dyad",
    "minkowski_dot",
    "decompose_vector",
    "reconstruct_vector",
    "lambda_squared",
    "sigma_identity_residuals",
    "tetrad_relation_residuals",
]

_SQRT2 = np.sqrt(2.0)

#: epsilon symbol, identical numeric entries for upper/lower and dotted/undotted.
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])

_ID2 = np.eye(2, dtype=complex)
_PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

#: Minkowski metric diagonal, signature (+,-,-,-).
MINKOWSKI_DIAG = np.array([1.0, -1.0, -1.0, -1.0])


def _lower_both_spinor(m: np.ndarray) -> np.ndarray:
    # M_{A Adot} = eps_{BA} eps_{Bdot Adot} M^{B Bdot}  ==  E^T M E
    return EPS.T @ m @ EPS


# sigma^{alpha A Adot}: upper Minkowski index, upper spinor indices.
SIGMA_UP = np.empty((4, 2, 2), dtype=complex)
SIGMA_UP[0] = _ID2 / _SQRT2
SIGMA_UP[1] = -_PAULI[0] / _SQRT2
SIGMA_UP[2] = +_PAULI[1] / _SQRT2
SIGMA_UP[3] = -_PAULI[2] / _SQRT2

# sigma^alpha_{A Adot}: upper Minkowski, lower spinor. Works out to (I, s1, s2, s3)/sqrt2.
SIGMA_UP_LOWSP = np.array([_lower_both_spinor(SIGMA_UP[a]) for a in range(4)])

# sigma_alpha^{A Adot} and sigma_{alpha A Adot}: Minkowski index lowered with the metric.
SIGMA_LOW = MINKOWSKI_DIAG[:, None, None] * SIGMA_UP
SIGMA_LOW_LOWSP = MINKOWSKI_DIAG[:, None, None] * SIGMA_UP_LOWSP


class DegenerateDyadError(ValueError):
    """Raised when a spinor pair has (numerically) vanishing contraction."""


def raise_index(xi: np.ndarray) -> np.ndarray:
    """xi^A = eps^{AB} xi_B; componentwise (xi_1, -xi_0)."""
    xi = np.asarray(xi)
    return np.stack([xi[1], -xi[0]])


def lower_index(xi_up: np.ndarray) -> np.ndarray:
    """xi_A = eps_{BA} xi^B; componentwise (-xi^1, xi^0). Inverse of :func:`raise_index`."""
    xi_up = np.asarray(xi_up)
    return np.stack([-xi_up[1], xi_up[0]])


def contract(xi_low: np.ndarray, eta_low: np.ndarray) -> np.ndarray:
    """Contraction xi^A eta_A of two lower-index spinors: xi_1 eta_0 - xi_0 eta_1."""
    return xi_low[1] * eta_low[0] - xi_low[0] * eta_low[1]


@dataclass
class Spinor2:
    """A single 2-spinor with explicit index position ('lower' or 'upper')."""

    components: np.ndarray
    index_position: str = "lower"

    def __post_init__(self) -> None:
        self.components = np.asarray(self.components, dtype=complex)
        if self.components.shape[0] != 2:
            raise ValueError("Spinor2 needs a leading axis of length 2")
        if self.index_position not in ("lower", "upper"):
            raise ValueError(f"bad index_position {self.index_position!r}")

    def raised(self) -> "Spinor2":
        if self.index_position == "upper":
            return self
        return Spinor2(raise_index(self.components), "upper")

    def lowered(self) -> "Spinor2":
        if self.index_position == "lower":
            return self
        return Spinor2(lower_index(self.components), "lower")


def _canonical_sign(o: np.ndarray, iota: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Resolve the overall (o, iota) -> (-o, -iota) sign freedom.

    Branch rule: non-negative real part of o_0; ties broken by non-negative
    imaginary part of o_0; if o_0 = 0 exactly, the same rule on o_1.
    Vectorized over trailing axes.
    """
    re0, im0 = np.real(o[0]), np.imag(o[0])
    re1, im1 = np.real(o[1]), np.imag(o[1])
    flip = (re0 < 0) | (
        (re0 == 0)
        & ((im0 < 0) | ((im0 == 0) & ((re1 < 0) | ((re1 == 0) & (im1 < 0)))))
    )
    sign = np.where(flip, -1.0, 1.0)
    return o * sign, iota * sign


def dyad_normalize(o: np.ndarray, iota: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rescale a spinor pair so that iota^A o_A = 1 exactly.

    The scaling is split symmetrically: both spinors are multiplied by the
    same factor 1/sqrt(c) where c = iota^A o_A, so neither member absorbs the
    whole rescale. The residual sign freedom is resolved by
    :func:`_canonical_sign`.

    Raises :class:`DegenerateDyadError` when c vanishes (|c| < 1e-300).
    """
    o = np.asarray(o, dtype=complex)
    iota = np.asarray(iota, dtype=complex)
    c = contract(iota, o)
    bad = np.abs(c) < 1e-300
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))
        raise DegenerateDyadError(
            f"degenerate spinor pair: contraction vanishes at {idx[:8].tolist()}"
            + ("..." if idx.shape[0] > 8 else "")
        )
    s = 1.0 / np.sqrt(c)
    return _canonical_sign(o * s, iota * s)


@dataclass
class Dyad:
    """Normalized spinor dyad {o_A, iota_A} with iota^A o_A = 1.

    Both members are stored with lower indices. Use ``validate()`` to get the
    worst normalization violation, or construct through :func:`dyad_normalize`
    to have it enforced.
    """

    o: np.ndarray
    iota: np.ndarray

    def __post_init__(self) -> None:
        self.o = np.asarray(self.o, dtype=complex)
        self.iota = np.asarray(self.iota, dtype=complex)

    @classmethod
    def normalized(cls, o: np.ndarray, iota: np.ndarray) -> "Dyad":
        return cls(*dyad_normalize(o, iota))

    def validate(self, tol: float = 1e-12) -> float:
        """Max violation of iota^A o_A = 1 and o_A iota_B - o_B iota_A = eps_AB."""
        c = contract(self.iota, self.o)
        worst = np.max(np.abs(c - 1.0))
        # the antisymmetrized outer product has a single independent component
        skew = self.o[0] * self.iota[1] - self.o[1] * self.iota[0]
        worst = max(worst, np.max(np.abs(skew - 1.0)))
        if worst > tol:
            raise ValueError(f"dyad normalization violated by {worst:.3e}")
        return float(worst)


def random_dyad(rng: np.random.Generator, shape: tuple[int, ...] = ()) -> Dyad:
    """Draw a random normalized dyad (components ~ complex standard normal).

    Pairs whose contraction is small relative to the component scale are
    redrawn: they are valid dyads but normalizing them amplifies roundoff,
    and this generator exists to exercise identities near machine precision.
    """
    n = int(np.prod(shape)) if shape else 1

    def draw(k: int) -> np.ndarray:
        return rng.standard_normal((2, k)) + 1j * rng.standard_normal((2, k))

    o, iota = draw(n), draw(n)
    while True:
        c = contract(iota, o)
        scale = np.linalg.norm(o, axis=0) * np.linalg.norm(iota, axis=0)
        bad = np.abs(c) < 0.05 * scale
        if not np.any(bad):
            break
        k = int(np.count_nonzero(bad))
        o[:, bad], iota[:, bad] = draw(k), draw(k)
    o, iota = dyad_normalize(o, iota)
    return Dyad(o.reshape(2, *shape), iota.reshape(2, *shape))


def _sigma_bilinear(sig: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Contract sigma[alpha, A, Adot] with a[A] * b[Adot] -> vector [alpha, ...]."""
    return np.einsum("xab,a...,b...->x...", sig, a, b)


@dataclass
class NullTetrad:
    """Null tetrad (l, n, m, mbar) built from a dyad.

    l and n are real null vectors, m complex, with l.n = 1, m.mbar = -1 and
    all other Minkowski products zero. mbar is not stored (it is conj(m)).
    """

    l: np.ndarray
    n: np.ndarray
    m: np.ndarray

    @property
    def mbar(self) -> np.ndarray:
        return np.conj(self.m)

    def validate(self, tol: float = 1e-12) -> float:
        worst = tetrad_relation_residuals(self)
        if worst > tol:
            raise ValueError(f"tetrad relations violated by {worst:.3e}")
        return worst


def tetrad_from_dyad(dyad: Dyad) -> NullTetrad:
    """Null tetrad of a normalized dyad.

    l^alpha = sigma^alpha_{A Adot} o^A obar^Adot, n from iota likewise,
    m^alpha from (o, iotabar). With the conventions of this module the
    canonical dyad o=(1,0), iota=(0,1) gives l = (1,0,0,-1)/sqrt2 and
    n = (1,0,0,+1)/sqrt2.
    """
    o_low, i_low = dyad.o, dyad.iota
    ob, ib = np.conj(o_low), np.conj(i_low)
    l = _sigma_bilinear(SIGMA_UP, o_low, ob)
    n = _sigma_bilinear(SIGMA_UP, i_low, ib)
    m = _sigma_bilinear(SIGMA_UP, o_low, ib)
    # the sigma contraction with upper spinor indices against lower-index dyad
    # components equals the lower-spinor-index contraction against raised ones
    return NullTetrad(l=np.real(l), n=np.real(n), m=m)


def minkowski_dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """u^alpha v_alpha with signature (+,-,-,-); leading axis is the Minkowski index."""
    return u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3]


def decompose_vector(x: np.ndarray, tetrad: NullTetrad) -> tuple[np.ndarray, ...]:
    """Coefficients (c_l, c_n, c_m, c_mbar) of X in the tetrad basis.

    X^alpha = c_l l^alpha + c_n n^alpha + c_m m^alpha + c_mbar mbar^alpha with
    c_l = n.X, c_n = l.X, c_m = -(mbar.X), c_mbar = -(m.X).
    """
    c_l = minkowski_dot(tetrad.n, x)
    c_n = minkowski_dot(tetrad.l, x)
    c_m = -minkowski_dot(tetrad.mbar, x)
    c_mbar = -minkowski_dot(tetrad.m, x)
    return c_l, c_n, c_m, c_mbar


def reconstruct_vector(coeffs: tuple[np.ndarray, ...], tetrad: NullTetrad) -> np.ndarray:
    c_l, c_n, c_m, c_mbar = coeffs
    return (
        c_l * tetrad.l + c_n * tetrad.n + c_m * tetrad.m + c_mbar * tetrad.mbar
    )


def lambda_squared(tetrad: NullTetrad) -> np.ndarray:
    """Staticity scalar: sum over spatial components of (l^j + n^j)^2."""
    s = tetrad.l[1:] + tetrad.n[1:]
    return np.sum(s * s, axis=0)


def sigma_identity_residuals() -> tuple[float, float]:
    """Max deviations of the two sigma-symbol identities.

    1) sigma_alpha^{A Adot} sigma_{beta A Adot} = eta_{alpha beta}
    2) sigma_{alpha A Adot} sigma^alpha_{B Bdot} = eps_{AB} eps_{Adot Bdot}
    """
    r1 = np.einsum("xab,yab->xy", SIGMA_LOW, SIGMA_LOW_LOWSP)
    d1 = np.max(np.abs(r1 - np.diag(MINKOWSKI_DIAG)))
    r2 = np.einsum("xab,xcd->abcd", SIGMA_LOW_LOWSP, SIGMA_UP_LOWSP)
    eps2 = np.einsum("ac,bd->abcd", EPS, EPS)
    d2 = np.max(np.abs(r2 - eps2))
    return float(d1), float(d2)


def tetrad_relation_residuals(tetrad: NullTetrad) -> float:
    """Worst violation over all nine tetrad relations (and reality of l, n)."""
    l, n, m = tetrad.l, tetrad.n, tetrad.m
    mb = tetrad.mbar
    checks = [
        minkowski_dot(l, l),
        minkowski_dot(n, n),
        minkowski_dot(m, m),
        minkowski_dot(l, n) - 1.0,
        minkowski_dot(m, mb) + 1.0,
        minkowski_dot(l, m),
        minkowski_dot(l, mb),
        minkowski_dot(n, m),
        minkowski_dot(n, mb),
    ]
    worst = max(float(np.max(np.abs(c))) for c in checks)
    return worst
