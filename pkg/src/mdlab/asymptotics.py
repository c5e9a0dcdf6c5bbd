"""Tail diagnostics: decay fits, envelope bounds, and threshold expansions.

Bound states of the coupled system are characterized by how they decay, and
several structural claims about the system are statements about tails.  This
module turns those claims into fits and machine-checkable verdicts:

* :func:`fit_decay` -- log-space least squares for three tail families:
  ``C exp(-a r)/r^p`` (gapped bound states, |E| < m), ``C exp(-b sqrt(r))/r^p``
  (charged threshold states, |E| = m with net charge), and ``C r^-p``
  (neutral threshold states).
* :func:`comparison_bound_check` -- an envelope test in the style of a
  maximum-principle argument: anchor ``w(r) = C0 exp(-sqrt2 k r)/r`` at a
  shell rho via ``C0 = rho exp(sqrt2 k rho) h(rho)`` and require h <= w
  outward of rho, for k below the gap rate sqrt(m^2 - E^2).
* :func:`limit_formula_check` -- the shell diagnostic
  ``cos(chi)/sqrt(1 + lambda^2/2)``, which must approach E/m with a roughly
  1/r deviation for any localized stationary state.  For the kappa = -1
  radial ansatz the diagnostic reduces pointwise to the angle-free ratio
  ``(G^2 - F^2)/(G^2 + F^2)`` (see :func:`limit_formula_radial`).
* :func:`staticity_check` -- decay exponent of ``|l + n|``, the spatial part
  of the unit current direction; a threshold state must have this decay at
  least like ``r^{-1/2}``.
* :func:`phase_expansion_fit` -- inverse-half-power expansion of the phase
  remainder of a charged threshold state over the basis
  ``{r^{-1/2}, r^{-1}, r^{-3/2}}``, with predicted coefficients from
  :func:`phase_expansion_coefficients`.
* :func:`charge_and_dipole` -- quadrature-exact monopole/dipole extraction
  from the electric potential sampled on spheres.
* :func:`charge_tail_scale` -- the sign relation ``lam^2 = -(E/m) e q0 / m``
  fixing the stretched-exponential scale of a charged threshold tail; the
  relation is only satisfiable when the state's charge opposes e (E/m) and
  is inapplicable for q0 = 0.

Fit windows default to the outermost decade of the data after trimming the
outer 5% of the radial extent (boundary contamination); pass ``window=(lo,
hi)`` to override.  Weighted-norm decay statements are operationalized as
pointwise power-law fits, so exponents carry a fit tolerance rather than an
epsilon bookkeeping term.

Every report serializes through ``diagnostic_dict`` to a stable payload
``{schema, diagnostic, claim, inputs, fitted, predicted, tolerance,
verdict}`` and exposes ``curve_columns`` returning the plotted columns
``(r, value, model_value)`` so downstream tooling can overlay the predicted
curve without re-deriving it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .fields import SpinorFields, current, polar_decompose

__all__ = [
    "DIAGNOSTIC_SCHEMA",
    "AsymptoticsReport",
    "ChargeTailScale",
    "ComparisonBound",
    "DecayFit",
    "LimitFormula",
    "MultipoleReport",
    "PhaseExpansionFit",
    "StaticityReport",
    "charge_and_dipole",
    "charge_tail_scale",
    "comparison_bound_check",
    "comparison_bound_radial",
    "decay_model_values",
    "fit_decay",
    "limit_formula_check",
    "limit_formula_fields",
    "limit_formula_radial",
    "phase_expansion_coefficients",
    "phase_expansion_fit",
    "staticity_check",
    "staticity_fields",
    "staticity_radial",
    "stretched_rate",
    "tail_scale_consistency",
    "tail_window",
]

DIAGNOSTIC_SCHEMA = "mdlab-diagnostic/1"

_DECAY_MODELS = ("exponential", "stretched", "power")


# ----------------------------------------------------------------- utilities


def _json_value(x):
    """Make a scalar/array JSON-friendly; non-finite floats become strings."""
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_json_value(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    return x


def _payload(diagnostic, inputs, fitted, predicted, tolerance, verdict, claim=None):
    out = {
        "schema": DIAGNOSTIC_SCHEMA,
        "diagnostic": diagnostic,
        "inputs": {k: _json_value(v) for k, v in inputs.items()},
        "fitted": {k: _json_value(v) for k, v in fitted.items()},
        "predicted": {k: _json_value(v) for k, v in predicted.items()},
        "tolerance": {k: _json_value(v) for k, v in tolerance.items()},
        "verdict": verdict,
    }
    if claim is not None:
        out["claim"] = claim
    return out


def tail_window(r: np.ndarray, decades: float = 1.0, trim: float = 0.05) -> np.ndarray:
    """Boolean mask selecting the default tail fit window of a radius array.

    The outer ``trim`` fraction of the radial extent is discarded (grid
    truncation contaminates the last cells) and the window spans the
    outermost ``decades`` in log radius below that cut.  Raises ValueError
    when the data does not reach deep enough to supply the requested span.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 8:
        raise ValueError("need a 1-D radius array with at least 8 samples")
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    r_hi = r[-1] - trim * (r[-1] - r[0])
    r_lo = r_hi / 10.0**decades
    if r_lo < r[0]:
        raise ValueError(
            f"data range [{r[0]:g}, {r[-1]:g}] too short for a "
            f"{decades:g}-decade fit window below r = {r_hi:g}"
        )
    mask = (r >= r_lo) & (r <= r_hi)
    if np.count_nonzero(mask) < 8:
        raise ValueError("fewer than 8 samples in the tail fit window")
    return mask


def _window_mask(r: np.ndarray, window: tuple[float, float] | None) -> np.ndarray:
    if window is None:
        return tail_window(r)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"empty fit window ({lo:g}, {hi:g})")
    mask = (r >= lo) & (r <= hi)
    if np.count_nonzero(mask) < 8:
        raise ValueError(f"fewer than 8 samples in fit window ({lo:g}, {hi:g})")
    return mask


def _halves_decreasing(r: np.ndarray, magnitude: np.ndarray) -> bool:
    """True when the mean magnitude over the outer half (in log r) is below
    the mean over the inner half."""
    mid = math.sqrt(r[0] * r[-1])
    inner = magnitude[r <= mid]
    outer = magnitude[r > mid]
    if inner.size == 0 or outer.size == 0:
        return False
    return float(np.mean(outer)) < float(np.mean(inner))


# ------------------------------------------------------------- decay fitting


def decay_model_values(
    r: np.ndarray, model: str, coefficient: float, rate: float, power: float
) -> np.ndarray:
    """Evaluate a tail model; the synthetic-generator side of the fitters."""
    r = np.asarray(r, dtype=float)
    if model == "exponential":
        return coefficient * np.exp(-rate * r) / r**power
    if model == "stretched":
        return coefficient * np.exp(-rate * np.sqrt(r)) / r**power
    if model == "power":
        return coefficient * r**-power
    raise ValueError(f"unknown decay model {model!r}; expected one of {_DECAY_MODELS}")


@dataclass
class DecayFit:
    """Least-squares fit of a positive tail profile in log space.

    ``rate`` is the coefficient of -r (exponential) or -sqrt(r) (stretched)
    in log h and is 0.0 for the pure power model; ``power`` multiplies
    -log r in every model.
    """

    model: str
    coefficient: float
    rate: float
    power: float
    window: tuple[float, float]
    rms_log_residual: float
    n_samples: int
    r: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)

    def model_values(self, r: np.ndarray | None = None) -> np.ndarray:
        rr = self.r if r is None else np.asarray(r, dtype=float)
        return decay_model_values(rr, self.model, self.coefficient, self.rate, self.power)

    def curve_columns(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "value": self.value, "model_value": self.model_values()}

    def diagnostic_dict(
        self,
        predicted: Mapping[str, float] | None = None,
        rtol: float = 0.01,
        claim: str | None = None,
        inputs: Mapping[str, object] | None = None,
    ) -> dict:
        """JSON payload; verdict compares fitted fields named in ``predicted``
        (e.g. {"rate": ..., "power": ...}) relatively within ``rtol``,
        or is "informational" when no prediction is supplied."""
        fitted = {
            "model": self.model,
            "coefficient": self.coefficient,
            "rate": self.rate,
            "power": self.power,
            "rms_log_residual": self.rms_log_residual,
            "window": list(self.window),
            "n_samples": self.n_samples,
        }
        if predicted is None:
            verdict = "informational"
            predicted = {}
        else:
            verdict = "pass"
            for key, want in predicted.items():
                have = fitted.get(key)
                if have is None:
                    raise KeyError(f"no fitted field named {key!r}")
                scale = max(abs(float(want)), 1e-300)
                if abs(float(have) - float(want)) > rtol * scale:
                    verdict = "fail"
        return _payload(
            "decay-envelope",
            dict(inputs or {}),
            fitted,
            dict(predicted),
            {"relative": rtol},
            verdict,
            claim,
        )


def fit_decay(
    r: np.ndarray,
    h: np.ndarray,
    model: str = "exponential",
    window: tuple[float, float] | None = None,
) -> DecayFit:
    """Fit ``h(r)`` by one of the three tail models, least squares in log h.

    Raises ValueError for an unknown model, a window with non-positive
    samples, or a window too small/empty (see :func:`tail_window` for the
    default window rule).
    """
    if model not in _DECAY_MODELS:
        raise ValueError(f"unknown decay model {model!r}; expected one of {_DECAY_MODELS}")
    r = np.asarray(r, dtype=float)
    h = np.asarray(h, dtype=float)
    if r.shape != h.shape or r.ndim != 1:
        raise ValueError("r and h must be 1-D arrays of equal length")
    mask = _window_mask(r, window)
    rw, hw = r[mask], h[mask]
    if np.any(hw <= 0.0) or not np.all(np.isfinite(hw)):
        bad = int(np.count_nonzero((hw <= 0.0) | ~np.isfinite(hw)))
        raise ValueError(f"{bad} non-positive/non-finite samples in the fit window")
    logh = np.log(hw)
    cols = [np.ones_like(rw)]
    if model == "exponential":
        cols.append(-rw)
    elif model == "stretched":
        cols.append(-np.sqrt(rw))
    cols.append(-np.log(rw))
    design = np.stack(cols, axis=1)
    beta, *_ = np.linalg.lstsq(design, logh, rcond=None)
    resid = logh - design @ beta
    rms = float(np.sqrt(np.mean(resid**2)))
    if model == "power":
        coeff, rate, power = math.exp(beta[0]), 0.0, float(beta[1])
    else:
        coeff, rate, power = math.exp(beta[0]), float(beta[1]), float(beta[2])
    return DecayFit(
        model=model,
        coefficient=coeff,
        rate=rate,
        power=power,
        window=(float(rw[0]), float(rw[-1])),
        rms_log_residual=rms,
        n_samples=int(rw.size),
        r=rw,
        value=hw,
    )


def stretched_rate(m: float, lam: float) -> float:
    """Predicted sqrt-r rate of a charged threshold tail: 4 sqrt(2) m lam."""
    return 4.0 * math.sqrt(2.0) * m * lam


# ------------------------------------------------------------ envelope bound


@dataclass
class ComparisonBound:
    """Outcome of the anchored-envelope test h(r) <= C0 exp(-sqrt2 k r)/r.

    ``margin`` is min over the window of log(w/h); non-negative means the
    bound holds everywhere in the window.  ``rate_floor`` is sqrt(2) k, the
    decay rate any conforming h must (at least) exhibit.
    """

    k: float
    c0: float
    anchor: float
    margin: float
    passed: bool
    rate_floor: float
    window: tuple[float, float]
    r: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)

    def envelope(self, r: np.ndarray | None = None) -> np.ndarray:
        rr = self.r if r is None else np.asarray(r, dtype=float)
        return self.c0 * np.exp(-math.sqrt(2.0) * self.k * rr) / rr

    def curve_columns(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "value": self.value, "model_value": self.envelope()}

    def diagnostic_dict(
        self, claim: str | None = None, inputs: Mapping[str, object] | None = None
    ) -> dict:
        return _payload(
            "comparison-bound",
            dict(inputs or {}),
            {"margin": self.margin, "anchor": self.anchor, "window": list(self.window)},
            {
                "model": "envelope",
                "coefficient": self.c0,
                "rate": self.rate_floor,
                "power": 1.0,
            },
            {"margin_at_least": 0.0},
            "pass" if self.passed else "fail",
            claim,
        )


def comparison_bound_check(
    r: np.ndarray,
    h: np.ndarray,
    E: float,
    m: float,
    k_fraction: float = 0.9,
    window: tuple[float, float] | None = None,
) -> ComparisonBound:
    """Check h <= C0 exp(-sqrt2 k r)/r on the tail, k = k_fraction sqrt(m^2-E^2).

    The envelope constant comes from the anchor recipe C0 = rho exp(sqrt2 k
    rho) h(rho) with rho the inner edge of the window, so the envelope
    touches the data there and the test is about relative decay beyond.
    Only meaningful inside the gap: raises ValueError when |E| >= m.
    """
    if abs(E) >= m:
        raise ValueError("comparison bound applies to gapped states only (|E| < m)")
    if not 0.0 < k_fraction < 1.0:
        raise ValueError("k_fraction must lie in (0, 1)")
    r = np.asarray(r, dtype=float)
    h = np.asarray(h, dtype=float)
    mask = _window_mask(r, window)
    rw, hw = r[mask], h[mask]
    if np.any(hw <= 0.0):
        raise ValueError("non-positive samples in the fit window")
    k = k_fraction * math.sqrt(m * m - E * E)
    rho = float(rw[0])
    c0 = rho * math.exp(math.sqrt(2.0) * k * rho) * float(hw[0])
    log_w = math.log(c0) - math.sqrt(2.0) * k * rw - np.log(rw)
    # the envelope touches the data at the anchor by construction, so the
    # min is taken strictly outward of it and equality-to-rounding counts
    margin = float(np.min(log_w[1:] - np.log(hw[1:])))
    return ComparisonBound(
        k=k,
        c0=c0,
        anchor=rho,
        margin=margin,
        passed=margin >= -1e-12,
        rate_floor=math.sqrt(2.0) * k,
        window=(float(rw[0]), float(rw[-1])),
        r=rw,
        value=hw,
    )


def comparison_bound_radial(sol, k_fraction: float = 0.9, window=None) -> ComparisonBound:
    """Envelope test on a radial solution; h is the summed component density
    2 (G^2 + F^2)/r^2 of the embedded state."""
    r = sol.problem.r
    return comparison_bound_check(
        r, 2.0 * sol.density_h(), sol.E, sol.problem.m, k_fraction=k_fraction, window=window
    )


# ------------------------------------------------------------- limit formula


@dataclass
class LimitFormula:
    """Shell diagnostic cos(chi)/sqrt(1+lambda^2/2) versus the energy ratio.

    ``gamma`` is the fitted power of the deviation |value - E/m| ~ C r^-gamma
    (math.inf with ``exact=True`` when the deviation sits at the noise floor
    throughout the window, as happens for tails whose component ratio is
    exactly energy-locked)."""

    e_over_m: float
    tail_estimate: float
    gamma: float
    deviation_scale: float
    deviation_sign: float
    decreasing: bool
    exact: bool
    window: tuple[float, float]
    r: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)

    def model_values(self, r: np.ndarray | None = None) -> np.ndarray:
        rr = self.r if r is None else np.asarray(r, dtype=float)
        if self.exact:
            return np.full_like(rr, self.e_over_m)
        return self.e_over_m + self.deviation_sign * self.deviation_scale * rr**-self.gamma

    def curve_columns(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "value": self.value, "model_value": self.model_values()}

    def diagnostic_dict(
        self,
        gamma_band: tuple[float, float] = (0.7, 1.3),
        claim: str | None = None,
        inputs: Mapping[str, object] | None = None,
    ) -> dict:
        ok = self.exact or (
            gamma_band[0] <= self.gamma <= gamma_band[1] and self.decreasing
        )
        return _payload(
            "limit-formula",
            dict(inputs or {}),
            {
                "e_over_m_tail": self.tail_estimate,
                "gamma": self.gamma,
                "deviation_scale": self.deviation_scale,
                "decreasing": self.decreasing,
                "exact": self.exact,
                "window": list(self.window),
            },
            {"e_over_m": self.e_over_m, "gamma": 1.0},
            {"gamma_band": list(gamma_band)},
            "pass" if ok else "fail",
            claim,
        )


def limit_formula_check(
    r: np.ndarray,
    value: np.ndarray,
    e_over_m: float,
    window: tuple[float, float] | None = None,
    noise_floor: float = 1e-12,
) -> LimitFormula:
    """Fit the approach of the shell diagnostic to its limit ``e_over_m``.

    The deviation is fit as ``C r^-gamma`` over the window using samples
    above ``noise_floor``; a window entirely at the floor is reported as
    ``exact`` (gamma = inf) rather than fitted.
    """
    r = np.asarray(r, dtype=float)
    value = np.asarray(value, dtype=float)
    if r.shape != value.shape or r.ndim != 1:
        raise ValueError("r and value must be 1-D arrays of equal length")
    mask = _window_mask(r, window)
    rw, vw = r[mask], value[mask]
    dev = vw - e_over_m
    adev = np.abs(dev)
    win = (float(rw[0]), float(rw[-1]))
    if float(np.max(adev)) <= noise_floor:
        return LimitFormula(
            e_over_m=e_over_m,
            tail_estimate=float(vw[-1]),
            gamma=math.inf,
            deviation_scale=0.0,
            deviation_sign=0.0,
            decreasing=True,
            exact=True,
            window=win,
            r=rw,
            value=vw,
        )
    keep = adev > noise_floor
    if np.count_nonzero(keep) < 8:
        raise ValueError("fewer than 8 deviation samples above the noise floor")
    design = np.stack([np.ones(int(keep.sum())), -np.log(rw[keep])], axis=1)
    beta, *_ = np.linalg.lstsq(design, np.log(adev[keep]), rcond=None)
    return LimitFormula(
        e_over_m=e_over_m,
        tail_estimate=float(vw[-1]),
        gamma=float(beta[1]),
        deviation_scale=math.exp(beta[0]),
        deviation_sign=float(np.sign(np.mean(dev))),
        decreasing=_halves_decreasing(rw, adev),
        exact=False,
        window=win,
        r=rw,
        value=vw,
    )


def limit_formula_radial(
    sol,
    window: tuple[float, float] | None = None,
    noise_floor: float = 1e-12,
) -> LimitFormula:
    """Limit-formula check on a radial solution.

    For the kappa = -1 ansatz the shell diagnostic is angle independent and
    equals (G^2 - F^2)/(G^2 + F^2) pointwise, so it can be evaluated without
    embedding (the 3-D route, :func:`limit_formula_fields`, cross-checks
    that reduction on an embedded patch).
    """
    G, F = sol.G, sol.F
    denom = G * G + F * F
    ok = denom > 0.0
    ratio = (G[ok] * G[ok] - F[ok] * F[ok]) / denom[ok]
    return limit_formula_check(
        sol.problem.r[ok], ratio, sol.E / sol.problem.m,
        window=window, noise_floor=noise_floor,
    )


def _shell_sort(radii: np.ndarray, values: np.ndarray, keep: np.ndarray):
    order = np.argsort(radii[keep])
    return radii[keep][order], values[keep][order]


def limit_formula_fields(psi: SpinorFields) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise shell diagnostic on a 3-D patch, sorted by radius.

    Returns (radii, cos(chi)/sqrt(1+lambda^2/2)) for every grid point with a
    nonvanishing amplitude invariant.  Patches rarely span a full fit decade,
    so no fit is attempted here; compare the values against the radial route
    or fit them with :func:`limit_formula_check` when the range allows.
    """
    pol = polar_decompose(psi)
    rep = current(psi)
    x, y, z = psi.grid.meshes()
    radii = np.sqrt(x * x + y * y + z * z).ravel()
    value = (np.cos(pol.chi) / np.sqrt(1.0 + 0.5 * rep.lambda2)).ravel()
    keep = np.isfinite(value) & (rep.R.ravel() > 1e-300)
    return _shell_sort(radii, value, keep)


# ----------------------------------------------------------------- staticity


@dataclass
class StaticityReport:
    """Decay exponent of the spatial unit-current magnitude |l + n|.

    ``static=True`` (with kappa = inf) flags an identically vanishing
    magnitude in the window -- the exactly static case."""

    kappa: float
    coefficient: float
    rms_log_residual: float
    static: bool
    window: tuple[float, float]
    r: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)

    def model_values(self, r: np.ndarray | None = None) -> np.ndarray:
        rr = self.r if r is None else np.asarray(r, dtype=float)
        if self.static:
            return np.zeros_like(rr)
        return self.coefficient * rr**-self.kappa

    def curve_columns(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "value": self.value, "model_value": self.model_values()}

    def diagnostic_dict(
        self,
        expected: float | None = None,
        rtol: float = 0.05,
        at_least: bool = False,
        claim: str | None = None,
        inputs: Mapping[str, object] | None = None,
    ) -> dict:
        """Verdict: informational without ``expected``; otherwise kappa must
        match ``expected`` within ``rtol`` (relative), or merely reach it
        when ``at_least`` is set.  A static profile passes any decay demand.
        """
        if expected is None:
            verdict = "informational"
        elif self.static:
            verdict = "pass"
        elif at_least:
            verdict = "pass" if self.kappa >= expected * (1.0 - rtol) else "fail"
        else:
            verdict = "pass" if abs(self.kappa - expected) <= rtol * abs(expected) else "fail"
        return _payload(
            "staticity-rate",
            dict(inputs or {}),
            {
                "kappa": self.kappa,
                "coefficient": self.coefficient,
                "rms_log_residual": self.rms_log_residual,
                "static": self.static,
                "window": list(self.window),
            },
            {} if expected is None else {"kappa": expected},
            {"relative": rtol, "at_least": at_least},
            verdict,
            claim,
        )


def staticity_check(
    r: np.ndarray,
    s_mag: np.ndarray,
    window: tuple[float, float] | None = None,
) -> StaticityReport:
    """Fit |l + n|(r) ~ C r^-kappa; identically zero data is reported as
    static (kappa = inf) instead of being fit."""
    r = np.asarray(r, dtype=float)
    s_mag = np.asarray(s_mag, dtype=float)
    if r.shape != s_mag.shape or r.ndim != 1:
        raise ValueError("r and s_mag must be 1-D arrays of equal length")
    if np.any(s_mag < 0.0):
        raise ValueError("s_mag is a magnitude and must be non-negative")
    mask = _window_mask(r, window)
    rw, sw = r[mask], s_mag[mask]
    win = (float(rw[0]), float(rw[-1]))
    pos = sw > 0.0
    if not np.any(pos):
        return StaticityReport(
            kappa=math.inf,
            coefficient=0.0,
            rms_log_residual=0.0,
            static=True,
            window=win,
            r=rw,
            value=sw,
        )
    if np.count_nonzero(pos) < 8:
        raise ValueError("fewer than 8 positive magnitude samples in the window")
    design = np.stack([np.ones(int(pos.sum())), -np.log(rw[pos])], axis=1)
    beta, *_ = np.linalg.lstsq(design, np.log(sw[pos]), rcond=None)
    resid = np.log(sw[pos]) - design @ beta
    return StaticityReport(
        kappa=float(beta[1]),
        coefficient=math.exp(beta[0]),
        rms_log_residual=float(np.sqrt(np.mean(resid**2))),
        static=False,
        window=win,
        r=rw,
        value=sw,
    )


def staticity_radial(sol) -> tuple[np.ndarray, np.ndarray]:
    """Shell supremum of |l + n| for a kappa = -1 radial solution.

    The supremum over a shell sits on the equator and equals
    2 sqrt(2) |G F| / |G^2 - F^2|; for a gapped state this tends to a
    nonzero constant (no staticity -- expected, the threshold claim is
    one-directional), while threshold tails send it to zero.
    Samples where G^2 = F^2 (the supremum diverges) are dropped.
    """
    G, F = sol.G, sol.F
    denom = np.abs(G * G - F * F)
    keep = denom > 0.0
    mag = 2.0 * math.sqrt(2.0) * np.abs(G[keep] * F[keep]) / denom[keep]
    return sol.problem.r[keep], mag


def staticity_fields(psi: SpinorFields) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise |l + n| on a 3-D patch, sorted by radius from the origin."""
    rep = current(psi)
    x, y, z = psi.grid.meshes()
    radii = np.sqrt(x * x + y * y + z * z).ravel()
    mag = np.sqrt(rep.lambda2).ravel()
    keep = np.isfinite(mag)
    return _shell_sort(radii, mag, keep)


# ------------------------------------------------------ phase-tail expansion


def phase_expansion_coefficients(
    m: float, lam: float, sign: float = 1.0
) -> tuple[float, float, float]:
    """Predicted inverse-half-power coefficients of the threshold phase
    remainder: (sqrt2 s lam, -s/(4m), s (16 lam^4 m^2 + 9)/(96 sqrt2 lam m^2))
    for branch sign s = +-1.  Requires lam > 0."""
    if lam <= 0.0:
        raise ValueError("phase expansion needs a positive tail scale lam")
    if sign not in (-1.0, 1.0):
        raise ValueError("branch sign must be +1 or -1")
    c1 = math.sqrt(2.0) * sign * lam
    c2 = -sign / (4.0 * m)
    c3 = sign * (16.0 * lam**4 * m * m + 9.0) / (96.0 * math.sqrt(2.0) * lam * m * m)
    return (c1, c2, c3)


@dataclass
class PhaseExpansionFit:
    """Fit of a threshold phase remainder over {r^-1/2, r^-1, r^-3/2}."""

    c1: float
    c2: float
    c3: float
    predicted: tuple[float, float, float]
    branch_sign: float
    rms_residual: float
    window: tuple[float, float]
    r: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)

    @property
    def relative_errors(self) -> tuple[float, float, float]:
        fit = (self.c1, self.c2, self.c3)
        return tuple(abs(f / p - 1.0) for f, p in zip(fit, self.predicted))

    def model_values(self, r: np.ndarray | None = None) -> np.ndarray:
        rr = self.r if r is None else np.asarray(r, dtype=float)
        return self.c1 * rr**-0.5 + self.c2 / rr + self.c3 * rr**-1.5

    def curve_columns(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "value": self.value, "model_value": self.model_values()}

    def diagnostic_dict(
        self,
        rtol: float = 0.01,
        claim: str | None = None,
        inputs: Mapping[str, object] | None = None,
    ) -> dict:
        verdict = "pass" if max(self.relative_errors) <= rtol else "fail"
        return _payload(
            "phase-expansion",
            dict(inputs or {}),
            {
                "c1": self.c1,
                "c2": self.c2,
                "c3": self.c3,
                "branch_sign": self.branch_sign,
                "rms_residual": self.rms_residual,
                "window": list(self.window),
            },
            {
                "c1": self.predicted[0],
                "c2": self.predicted[1],
                "c3": self.predicted[2],
            },
            {"relative": rtol},
            verdict,
            claim,
        )


def phase_expansion_fit(
    r: np.ndarray,
    phase: np.ndarray,
    m: float,
    lam: float,
    window: tuple[float, float] | None = None,
) -> PhaseExpansionFit:
    """Least-squares fit of the phase remainder on {r^-1/2, r^-1, r^-3/2}.

    ``lam`` is the charge-tail scale; the expansion is singular there, so
    lam <= 0 raises ValueError (neutral threshold tails are out of scope for
    this diagnostic).  The branch sign is taken from the fitted leading
    coefficient and applied to the predicted triple.
    """
    if lam <= 0.0:
        raise ValueError(
            "phase expansion inapplicable: tail scale lam must be positive "
            "(neutral states have no sqrt(r) phase tail)"
        )
    r = np.asarray(r, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if r.shape != phase.shape or r.ndim != 1:
        raise ValueError("r and phase must be 1-D arrays of equal length")
    mask = _window_mask(r, window)
    rw, pw = r[mask], phase[mask]
    design = np.stack([rw**-0.5, 1.0 / rw, rw**-1.5], axis=1)
    beta, *_ = np.linalg.lstsq(design, pw, rcond=None)
    resid = pw - design @ beta
    sign = 1.0 if beta[0] >= 0.0 else -1.0
    return PhaseExpansionFit(
        c1=float(beta[0]),
        c2=float(beta[1]),
        c3=float(beta[2]),
        predicted=phase_expansion_coefficients(m, lam, sign),
        branch_sign=sign,
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        window=(float(rw[0]), float(rw[-1])),
        r=rw,
        value=pw,
    )


# --------------------------------------------------------- multipole moments


@dataclass
class MultipoleReport:
    """Monopole and dipole moments of A^0 extracted on spherical shells.

    ``q0_spread``/``dipole_spread`` are the maximum deviations of the
    per-shell extractions from their averages -- a proxy for how far the
    sampled potential is from a pure monopole+dipole field."""

    q0: float
    dipole: np.ndarray
    q0_spread: float
    dipole_spread: float
    radii: tuple[float, ...]
    n_theta: int
    n_phi: int
    per_shell_q0: np.ndarray = field(repr=False)

    @property
    def dipole_mag(self) -> float:
        return float(np.linalg.norm(self.dipole))

    def curve_columns(self) -> dict[str, np.ndarray]:
        rr = np.asarray(self.radii, dtype=float)
        return {
            "r": rr,
            "value": self.per_shell_q0,
            "model_value": np.full_like(rr, self.q0),
        }

    def diagnostic_dict(
        self,
        predicted_q0: float | None = None,
        predicted_dipole_mag: float | None = None,
        rtol: float = 1e-6,
        atol: float = 1e-10,
        claim: str | None = None,
        inputs: Mapping[str, object] | None = None,
    ) -> dict:
        predicted: dict[str, float] = {}
        verdict = "informational"
        if predicted_q0 is not None or predicted_dipole_mag is not None:
            verdict = "pass"
            if predicted_q0 is not None:
                predicted["q0"] = predicted_q0
                if abs(self.q0 - predicted_q0) > rtol * abs(predicted_q0) + atol:
                    verdict = "fail"
            if predicted_dipole_mag is not None:
                predicted["dipole_mag"] = predicted_dipole_mag
                if abs(self.dipole_mag - predicted_dipole_mag) > (
                    rtol * abs(predicted_dipole_mag) + atol
                ):
                    verdict = "fail"
        return _payload(
            "multipole",
            dict(inputs or {}),
            {
                "q0": self.q0,
                "dipole": list(self.dipole),
                "dipole_mag": self.dipole_mag,
                "q0_spread": self.q0_spread,
                "dipole_spread": self.dipole_spread,
                "radii": list(self.radii),
            },
            predicted,
            {"relative": rtol, "absolute": atol},
            verdict,
            claim,
        )


def charge_and_dipole(
    a0: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    radii: Sequence[float],
    n_theta: int = 24,
    n_phi: int = 16,
) -> MultipoleReport:
    """Extract (q0, d) from A^0 = q0/r + d.x_hat/r^2 + (faster-decaying rest).

    ``a0`` is evaluated on Gauss-Legendre x uniform-azimuth nodes over each
    shell; the quadrature integrates the monopole and dipole projections
    exactly, so on a field that is exactly monopole+dipole the extraction is
    exact to rounding.  Requires at least two shells (so the caller can see
    radius-dependence through the spread fields) and enough angular nodes.
    """
    radii = tuple(float(x) for x in radii)
    if len(radii) < 2:
        raise ValueError("need at least two shell radii")
    if any(x <= 0 for x in radii):
        raise ValueError("shell radii must be positive")
    if n_theta < 4 or n_phi < 4:
        raise ValueError("insufficient angular sampling (need n_theta, n_phi >= 4)")
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    mu2 = mu[:, None]
    sin_t = np.sqrt(1.0 - mu2**2)
    xhat = sin_t * np.cos(phi)[None, :]
    yhat = sin_t * np.sin(phi)[None, :]
    zhat = np.broadcast_to(mu2, xhat.shape)
    # mean over the sphere = (1/2) sum_i w_i (1/n_phi) sum_j
    weight = (wmu[:, None] / 2.0) / n_phi

    qs = np.empty(len(radii))
    ds = np.empty((len(radii), 3))
    for i, rho in enumerate(radii):
        vals = a0(rho * xhat, rho * yhat, rho * zhat)
        qs[i] = rho * float(np.sum(weight * vals))
        for k, comp in enumerate((xhat, yhat, zhat)):
            ds[i, k] = 3.0 * rho**2 * float(np.sum(weight * vals * comp))
    q0 = float(np.mean(qs))
    dipole = np.mean(ds, axis=0)
    return MultipoleReport(
        q0=q0,
        dipole=dipole,
        q0_spread=float(np.max(np.abs(qs - q0))),
        dipole_spread=float(np.max(np.linalg.norm(ds - dipole, axis=1))),
        radii=radii,
        n_theta=n_theta,
        n_phi=n_phi,
        per_shell_q0=qs,
    )


# --------------------------------------------------------- charge-tail scale


@dataclass(frozen=True)
class ChargeTailScale:
    """The sign relation fixing a charged threshold tail's sqrt(r) scale.

    lam^2 = -(E/m) e q0 / m must be positive for a localized charged
    threshold state; verdict "fail" means the charge has the wrong sign for
    such a tail to exist, "not-applicable" means q0 = 0 (no charge tail --
    power-law behaviour takes over and the stretched envelope, phase
    expansion, and this relation all say nothing)."""

    epsilon: float
    lam_squared: float
    lam: float
    verdict: str

    @property
    def applicable(self) -> bool:
        return self.verdict != "not-applicable"

    def diagnostic_dict(
        self, claim: str | None = None, inputs: Mapping[str, object] | None = None
    ) -> dict:
        return _payload(
            "charge-tail-scale",
            dict(inputs or {}),
            {"epsilon": self.epsilon, "lam_squared": self.lam_squared, "lam": self.lam},
            {"lam_squared_positive": True},
            {},
            self.verdict,
            claim,
        )


def charge_tail_scale(
    E: float, m: float, e: float, q0: float, threshold_rtol: float = 1e-9
) -> ChargeTailScale:
    """Compute lam = sqrt(-(E/m) e q0 / m) and judge the sign condition.

    Raises ValueError off the threshold (use it only when |E| = m within
    ``threshold_rtol`` relatively); q0 = 0 yields the "not-applicable"
    verdict rather than an error so sweeps over charge can pass through
    neutrality.
    """
    if abs(abs(E) - m) > threshold_rtol * m:
        raise ValueError(
            f"charge-tail relation applies at the threshold |E| = m only "
            f"(got E = {E:g}, m = {m:g})"
        )
    eps = 1.0 if E >= 0.0 else -1.0
    lam_squared = -eps * e * q0 / m
    if q0 == 0.0:
        return ChargeTailScale(epsilon=eps, lam_squared=0.0, lam=0.0, verdict="not-applicable")
    if lam_squared <= 0.0:
        return ChargeTailScale(
            epsilon=eps, lam_squared=lam_squared, lam=0.0, verdict="fail"
        )
    return ChargeTailScale(
        epsilon=eps, lam_squared=lam_squared, lam=math.sqrt(lam_squared), verdict="pass"
    )


def tail_scale_consistency(scales: Mapping[str, float], rtol: float = 0.05) -> dict:
    """Mutual-consistency check between independent estimates of lam.

    ``scales`` maps route names (say envelope-rate, phase-expansion,
    charge-relation) to their lam estimates.  Returns a payload whose
    verdict is "pass" when every pair agrees within ``rtol`` of the mean.
    """
    if len(scales) < 2:
        raise ValueError("need at least two estimates to cross-check")
    values = np.array([float(v) for v in scales.values()])
    mean = float(np.mean(values))
    if mean == 0.0:
        raise ValueError("cannot cross-check all-zero scale estimates")
    spread = float(np.max(np.abs(values - mean))) / abs(mean)
    return _payload(
        "tail-scale-consistency",
        {},
        {**{k: float(v) for k, v in scales.items()}, "relative_spread": spread},
        {"relative_spread": 0.0},
        {"relative": rtol},
        "pass" if spread <= rtol else "fail",
    )


# ----------------------------------------------------------- aggregate report


@dataclass
class AsymptoticsReport:
    """Bundle of tail diagnostics for one state; fields left None when the
    corresponding diagnostic was not run (or was inapplicable)."""

    e_over_m: float | None = None
    approach_exponent: float | None = None
    tail_scale: float | None = None
    q0: float | None = None
    dipole_mag: float | None = None
    staticity_exponent: float | None = None
    phase_coefficients: tuple[float, float, float] | None = None

    def to_json_dict(self) -> dict:
        out = {}
        for key in (
            "e_over_m",
            "approach_exponent",
            "tail_scale",
            "q0",
            "dipole_mag",
            "staticity_exponent",
            "phase_coefficients",
        ):
            val = getattr(self, key)
            if val is not None:
                out[key] = _json_value(val)
        return out
