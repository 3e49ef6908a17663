"""Method-agreement machinery: least-products regression, V-shaped
limits of agreement, measurement-error bounds, interchangeability
thresholds, and per-point influence classification.

The flow: fit a (weighted) least-products line M2 on M1, regress
absolute residuals on M1, scale by sqrt(pi/2) to get a linearly growing
SD, place 95 percent limits of agreement around the fitted line, and
widen or narrow them by the propagated standard errors of the residual
regression. All mode choices
(paper-compat scale, z versus t, weight scheme, error-term sign
convention) are explicit arguments, never silent defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import sqrt
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .errors import (
    DegenerateInputError,
    NegativeSdError,
    TooFewPairsError,
    TooFewPointsError,
    UndefinedSignError,
    ValidationError,
    ZeroVarianceError,
)
from .panel import PairedSeries
from .stat_tests import NormalityResult, ks_normality

SCALE_EXACT = sqrt(np.pi / 2.0)   # 1.2533141...
SCALE_PAPER = 1.25
Z_NORMAL = 1.96

WEIGHT_SCHEMES = ("uniform", "proportional", "custom")
Z_MODES = ("normal", "student")
EQN5_CONVENTIONS = ("worst", "plus-minus", "minus-plus")
THRESHOLD_CONVENTIONS = ("inner", "outer")


class LineCoefficients(NamedTuple):
    """A bare regression line, for running the band machinery off
    published coefficients instead of a data fit."""

    slope: float
    intercept: float


def _line_of(fit) -> tuple[float, float]:
    if hasattr(fit, "slope") and hasattr(fit, "intercept"):
        return float(fit.slope), float(fit.intercept)
    slope, intercept = fit
    return float(slope), float(intercept)


# ---------------------------------------------------------------------------
# Weighted least-products fit

@dataclass(frozen=True)
class WlpFit:
    """Least-products (geometric-mean) regression of M2 on M1.

    slope_ci/intercept_ci stay None until wlp_confidence_intervals runs;
    ci_method then records how they were built.
    """

    slope: float
    intercept: float
    n: int
    m1: tuple[float, ...]
    m2: tuple[float, ...]
    weights: tuple[float, ...]
    weight_scheme: str
    centroid: tuple[float, float]
    r_weighted: float
    residuals: tuple[float, ...]
    slope_ci: tuple[float, float] | None = None
    intercept_ci: tuple[float, float] | None = None
    ci_method: str | None = None
    ci_level: float | None = None
    ci_seed: int | None = None
    ci_resamples: int | None = None

    def fitted(self, m1):
        return self.slope * np.asarray(m1, dtype=float) + self.intercept


def _weighted_moments(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    total = w.sum()
    xb = float((w * x).sum() / total)
    yb = float((w * y).sum() / total)
    dx = x - xb
    dy = y - yb
    sxx = float((w * dx * dx).sum())
    syy = float((w * dy * dy).sum())
    sxy = float((w * dx * dy).sum())
    return xb, yb, sxx, syy, sxy


def _fit_arrays(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    xb, yb, sxx, syy, sxy = _weighted_moments(x, y, w)
    if sxx <= 0.0 or syy <= 0.0:
        raise DegenerateInputError(
            "least-products fit needs positive weighted variance in both "
            "M1 and M2")
    if sxy == 0.0:
        raise UndefinedSignError(
            "weighted covariance is zero: the least-products slope sign "
            "is undefined")
    slope = float(np.sign(sxy)) * sqrt(syy / sxx)
    intercept = yb - slope * xb
    r = sxy / sqrt(sxx * syy)
    return slope, intercept, (xb, yb), r


def fit_wlp(pairs: PairedSeries,
            weights: Sequence[float] | None = None) -> WlpFit:
    """Fit the least-products line; uniform weights when none given.

    The slope is sign(cov_w) * sqrt(S_yy,w / S_xx,w) and the line passes
    through the weighted centroid, so swapping the axes inverts the
    slope exactly (the property ordinary regression lacks).
    """
    x = np.asarray(pairs.m1, dtype=float)
    y = np.asarray(pairs.m2, dtype=float)
    n = x.size
    if n < 3:
        raise TooFewPairsError(f"least-products fit needs n >= 3, got {n}")
    if weights is None:
        w = np.ones(n)
        scheme = "uniform"
    else:
        w = np.asarray(weights, dtype=float)
        if w.size != n:
            raise ValidationError(
                f"{w.size} weights for {n} pairs")
        if not np.all(np.isfinite(w)) or (w <= 0).any():
            raise ValidationError("weights must be positive and finite")
        scheme = "custom"
    slope, intercept, centroid, r = _fit_arrays(x, y, w)
    residuals = y - (slope * x + intercept)
    return WlpFit(
        slope=slope, intercept=intercept, n=n,
        m1=tuple(float(v) for v in x),
        m2=tuple(float(v) for v in y),
        weights=tuple(float(v) for v in w),
        weight_scheme=scheme,
        centroid=centroid,
        r_weighted=float(r),
        residuals=tuple(float(v) for v in residuals),
    )


PROPORTIONAL_TOL = 1e-12
PROPORTIONAL_MAX_ITER = 200


def _proportional_weights(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Iteratively reweighted least products with weight 1/fitted^2,
    converged to PROPORTIONAL_TOL on slope and intercept."""
    w = np.ones(x.size)
    slope, intercept, _, _ = _fit_arrays(x, y, w)
    for _ in range(PROPORTIONAL_MAX_ITER):
        fitted = slope * x + intercept
        if (fitted <= 0).any():
            raise DegenerateInputError(
                "proportional weighting needs strictly positive fitted "
                "values over the data")
        w = 1.0 / (fitted * fitted)
        new_slope, new_intercept, _, _ = _fit_arrays(x, y, w)
        if (abs(new_slope - slope) <= PROPORTIONAL_TOL * max(1.0, abs(slope))
                and abs(new_intercept - intercept)
                <= PROPORTIONAL_TOL * max(1.0, abs(intercept))):
            break
        slope, intercept = new_slope, new_intercept
    return w


def fit_wlp_proportional(pairs: PairedSeries) -> WlpFit:
    """Least-products fit under the proportional-error weight scheme
    (weight proportional to 1/fitted^2), for data whose error grows with
    the measured value."""
    x = np.asarray(pairs.m1, dtype=float)
    y = np.asarray(pairs.m2, dtype=float)
    if x.size < 3:
        raise TooFewPairsError(
            f"least-products fit needs n >= 3, got {x.size}")
    w = _proportional_weights(x, y)
    fit = fit_wlp(pairs, weights=w)
    return replace(fit, weight_scheme="proportional")


# ---------------------------------------------------------------------------
# Confidence intervals

def _analytic_ci(fit: WlpFit, level: float):
    n = fit.n
    r2 = fit.r_weighted ** 2
    if n < 3:
        raise TooFewPointsError("analytic CI needs n >= 3")
    b_term = stats.f.ppf(level, 1, n - 2) * (1.0 - r2) / (n - 2)
    lo = fit.slope * (sqrt(b_term + 1.0) - sqrt(b_term))
    hi = fit.slope * (sqrt(b_term + 1.0) + sqrt(b_term))
    slope_ci = (min(lo, hi), max(lo, hi))
    xb, yb = fit.centroid
    ints = sorted(yb - s * xb for s in slope_ci)
    return slope_ci, (ints[0], ints[1])


def _bootstrap_ci(fit: WlpFit, level: float, seed: int, n_resamples: int):
    if n_resamples < 1000:
        raise ValidationError(
            f"bootstrap needs n_resamples >= 1000, got {n_resamples}")
    if fit.n < 3:
        raise TooFewPointsError("bootstrap CI needs n >= 3")
    x = np.asarray(fit.m1)
    y = np.asarray(fit.m2)
    base_w = np.asarray(fit.weights)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, fit.n, size=(n_resamples, fit.n))
    if fit.weight_scheme == "proportional":
        slopes = np.empty(n_resamples)
        intercepts = np.empty(n_resamples)
        valid = np.zeros(n_resamples, dtype=bool)
        for i in range(n_resamples):
            xi, yi = x[idx[i]], y[idx[i]]
            try:
                wi = _proportional_weights(xi, yi)
                s, a, _, _ = _fit_arrays(xi, yi, wi)
            except (DegenerateInputError, UndefinedSignError):
                continue
            slopes[i], intercepts[i], valid[i] = s, a, True
    else:
        xs, ys, ws = x[idx], y[idx], base_w[idx]
        total = ws.sum(axis=1)
        xb = (ws * xs).sum(axis=1) / total
        yb = (ws * ys).sum(axis=1) / total
        dx = xs - xb[:, None]
        dy = ys - yb[:, None]
        sxx = (ws * dx * dx).sum(axis=1)
        syy = (ws * dy * dy).sum(axis=1)
        sxy = (ws * dx * dy).sum(axis=1)
        valid = (sxx > 0) & (syy > 0) & (sxy != 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.sign(sxy) * np.sqrt(syy / sxx)
            intercepts = yb - slopes * xb
    slopes = slopes[valid]
    intercepts = intercepts[valid]
    if slopes.size == 0:
        raise DegenerateInputError("every bootstrap resample was degenerate")
    tail = 100.0 * (1.0 - level) / 2.0
    slope_ci = tuple(float(v) for v in np.percentile(slopes, [tail, 100 - tail]))
    int_ci = tuple(float(v) for v in np.percentile(intercepts, [tail, 100 - tail]))
    return slope_ci, int_ci


def wlp_confidence_intervals(fit: WlpFit, level: float = 0.95,
                             method: str = "analytic", seed: int = 0,
                             n_resamples: int = 2000) -> WlpFit:
    """Attach slope and intercept CIs to a fit.

    analytic: the geometric-mean-regression interval
    slope * (sqrt(B+1) +/- sqrt(B)) with B = F(level; 1, n-2) * (1-r^2)/(n-2),
    intercept limits carried through the centroid. bootstrap: percentile
    interval over case-resampled refits, deterministic for a given seed.
    """
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must be in (0, 1), got {level}")
    if method == "analytic":
        slope_ci, int_ci = _analytic_ci(fit, level)
        return replace(fit, slope_ci=slope_ci, intercept_ci=int_ci,
                       ci_method="analytic", ci_level=level,
                       ci_seed=None, ci_resamples=None)
    if method == "bootstrap":
        slope_ci, int_ci = _bootstrap_ci(fit, level, seed, n_resamples)
        return replace(fit, slope_ci=slope_ci, intercept_ci=int_ci,
                       ci_method="bootstrap", ci_level=level,
                       ci_seed=seed, ci_resamples=n_resamples)
    raise ValidationError(f"unknown CI method: {method!r}")


# ---------------------------------------------------------------------------
# Limits-of-agreement model

@dataclass(frozen=True)
class LoaModel:
    """Linear SD model from the absolute-residual regression.

    SD(M1) = scale * (a + b*M1); scale is sqrt(pi/2) exactly or the
    published 1.25 in paper-compat mode; z is 1.96 or the two-sided
    0.05 Student quantile at df = n - 1.
    """

    a: float
    b: float
    se_a: float
    se_b: float
    scale: float
    z: float
    n: int
    m1_range: tuple[float, float]
    t_a: float | None = None
    p_a: float | None = None
    t_b: float | None = None
    p_b: float | None = None

    def sd(self, m1):
        return self.scale * (self.a + self.b * np.asarray(m1, dtype=float))


def fit_loa(fit: WlpFit, m1: Sequence[float] | None = None,
            paper_compat: bool = False, z_mode: str = "normal") -> LoaModel:
    """OLS of absolute residuals on M1, scaled into an SD line.

    Refuses essentially exact-line inputs (max |residual| below
    1e-12 * max M2): a zero-width band divides by zero downstream.
    """
    if z_mode not in Z_MODES:
        raise ValidationError(f"unknown z mode: {z_mode!r}")
    x = np.asarray(fit.m1 if m1 is None else m1, dtype=float)
    res = np.asarray(fit.residuals, dtype=float)
    if x.size != res.size:
        raise ValidationError(
            f"{x.size} M1 values for {res.size} residuals")
    n = x.size
    if n < 3:
        raise DegenerateInputError(
            f"absolute-residual regression needs n >= 3, got {n}")
    abs_res = np.abs(res)
    m2_scale = float(np.abs(np.asarray(fit.m2)).max()) or 1.0
    if abs_res.max() < 1e-12 * m2_scale:
        raise DegenerateInputError(
            "residuals are indistinguishable from zero; the data lie on "
            "an exact line and no agreement band is defined")
    xb = x.mean()
    sxx = float(((x - xb) ** 2).sum())
    if sxx <= 0.0:
        raise DegenerateInputError("M1 has zero variance")
    b = float(((x - xb) * (abs_res - abs_res.mean())).sum() / sxx)
    a = float(abs_res.mean() - b * xb)
    dof = n - 2
    sse = float(((abs_res - (a + b * x)) ** 2).sum())
    s2 = sse / dof
    se_b = sqrt(s2 / sxx)
    se_a = sqrt(s2 * (1.0 / n + xb * xb / sxx))
    scale = SCALE_PAPER if paper_compat else SCALE_EXACT
    z = Z_NORMAL if z_mode == "normal" else float(stats.t.ppf(0.975, n - 1))
    lo, hi = float(x.min()), float(x.max())
    model = LoaModel(
        a=a, b=b, se_a=se_a, se_b=se_b, scale=scale, z=z, n=n,
        m1_range=(lo, hi),
        t_a=a / se_a if se_a > 0 else None,
        p_a=float(2 * stats.t.sf(abs(a / se_a), dof)) if se_a > 0 else None,
        t_b=b / se_b if se_b > 0 else None,
        p_b=float(2 * stats.t.sf(abs(b / se_b), dof)) if se_b > 0 else None,
    )
    if model.sd(lo) <= 0 or model.sd(hi) <= 0:
        raise DegenerateInputError(
            "fitted SD is not positive over the observed M1 range")
    return model


# ---------------------------------------------------------------------------
# Band evaluation

@dataclass(frozen=True)
class LoaBand:
    """Band evaluation at one M1 (or an array of them)."""

    m1: float | tuple[float, ...]
    fitted: float | tuple[float, ...]
    sd: float | tuple[float, ...]
    lower: float | tuple[float, ...]
    upper: float | tuple[float, ...]
    error_term: float | tuple[float, ...]
    lower_inner: float | tuple[float, ...]
    lower_outer: float | tuple[float, ...]
    upper_inner: float | tuple[float, ...]
    upper_outer: float | tuple[float, ...]
    eqn5_convention: str = "worst"


def _error_term_coeffs(model: LoaModel, eqn5: str) -> tuple[float, float]:
    """Intercept/slope of the propagated error term in M1, per the
    chosen sign convention for (+/-SE_a +/- SE_b * M1)."""
    if eqn5 == "worst":
        sa, sb = model.se_a, model.se_b
    elif eqn5 == "plus-minus":
        sa, sb = model.se_a, -model.se_b
    elif eqn5 == "minus-plus":
        sa, sb = -model.se_a, model.se_b
    else:
        raise ValidationError(f"unknown eqn5 convention: {eqn5!r}")
    k = model.z * model.scale
    return k * sa, k * sb


def loa_band(model: LoaModel, fit, m1, eqn5: str = "worst") -> LoaBand:
    """Evaluate the agreement band at m1 (scalar or array).

    lower/upper are fitted -/+ z*SD; the error term widens them to the
    outer bounds and narrows them to the inner bounds. Under the
    default worst-case convention the error term is nonnegative, so the
    outer bounds always contain the inner ones; the mixed conventions
    exist to reproduce alternative readings and can sign-flip the term.
    """
    slope, intercept = _line_of(fit)
    x = np.asarray(m1, dtype=float)
    if (x < 0).any():
        raise ValidationError("m1 must be nonnegative")
    sd = model.sd(x)
    if (np.asarray(sd) <= 0).any():
        raise NegativeSdError(
            "model extrapolated to where the fitted SD is not positive")
    fitted = slope * x + intercept
    e_a, e_b = _error_term_coeffs(model, eqn5)
    err = e_a + e_b * x
    lower = fitted - model.z * sd
    upper = fitted + model.z * sd

    def _py(v):
        arr = np.asarray(v, dtype=float)
        if arr.ndim == 0:
            return float(arr)
        return tuple(float(u) for u in arr)

    return LoaBand(
        m1=_py(x), fitted=_py(fitted), sd=_py(sd),
        lower=_py(lower), upper=_py(upper), error_term=_py(err),
        lower_inner=_py(lower + err), lower_outer=_py(lower - err),
        upper_inner=_py(upper - err), upper_outer=_py(upper + err),
        eqn5_convention=eqn5,
    )


# ---------------------------------------------------------------------------
# Interchangeability thresholds

@dataclass(frozen=True)
class Crossing:
    """Where the equality line M2 = M1 crosses a band boundary."""

    boundary: str
    m1: float


def _boundary_lines(model: LoaModel, fit, convention: str,
                    eqn5: str) -> dict[str, tuple[float, float]]:
    slope, intercept = _line_of(fit)
    sd_a = model.scale * model.a
    sd_b = model.scale * model.b
    e_a, e_b = _error_term_coeffs(model, eqn5)
    lower = (intercept - model.z * sd_a, slope - model.z * sd_b)
    upper = (intercept + model.z * sd_a, slope + model.z * sd_b)
    if convention == "inner":
        return {
            "lower_inner": (lower[0] + e_a, lower[1] + e_b),
            "upper_inner": (upper[0] - e_a, upper[1] - e_b),
        }
    if convention == "outer":
        return {
            "lower_outer": (lower[0] - e_a, lower[1] - e_b),
            "upper_outer": (upper[0] + e_a, upper[1] + e_b),
        }
    raise ValidationError(f"unknown threshold convention: {convention!r}")


def interchange_threshold(model: LoaModel, fit,
                          m1_range: tuple[float, float] = (0.0, 300.0),
                          convention: str = "inner",
                          eqn5: str = "worst") -> tuple[Crossing, ...]:
    """Solve, in closed form, where the equality line crosses the chosen
    band boundaries inside m1_range. Every boundary is a line, so each
    contributes at most one crossing; an empty result means the equality
    line stays on one side throughout the range.
    """
    lo, hi = float(m1_range[0]), float(m1_range[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0 or hi <= lo:
        raise ValidationError(
            f"m1_range must be finite, nonnegative and increasing, "
            f"got ({lo}, {hi})")
    crossings: list[Crossing] = []
    for name, (alpha, beta) in _boundary_lines(model, fit, convention,
                                               eqn5).items():
        denom = 1.0 - beta
        if abs(denom) < 1e-15:
            continue
        m1 = alpha / denom
        if lo <= m1 <= hi:
            crossings.append(Crossing(boundary=name, m1=float(m1)))
    return tuple(sorted(crossings, key=lambda c: (c.m1, c.boundary)))


# ---------------------------------------------------------------------------
# Influence classification

INFLUENCE_CATEGORIES = (
    "cross_field_positive", "growth_dominant", "cross_field_dominant")


@dataclass(frozen=True)
class InfluenceClass:
    """Decomposition of one point's position against the fitted line and
    the line of equality.

    gap_to_wlp is the signed cross-field influence on the count;
    gap_to_equality is the genuine year-over-year growth when positive.
    """

    category: str
    m1: float
    m2: float
    gap_to_wlp: float
    gap_to_equality: float


def classify_influence(fit, point: tuple[float, float]) -> InfluenceClass:
    """Classify a point: above the fitted line means positive
    cross-field influence; below it but above equality means growth
    outweighs the cross-field loss; on or below equality means the
    cross-field loss dominates. Checks run in that order, which makes
    the three regions a true partition of the plane.
    """
    slope, intercept = _line_of(fit)
    m1, m2 = float(point[0]), float(point[1])
    gap_wlp = m2 - (slope * m1 + intercept)
    gap_eq = m2 - m1
    if gap_wlp > 0:
        category = "cross_field_positive"
    elif gap_eq > 0:
        category = "growth_dominant"
    else:
        category = "cross_field_dominant"
    return InfluenceClass(category=category, m1=m1, m2=m2,
                          gap_to_wlp=gap_wlp, gap_to_equality=gap_eq)


# ---------------------------------------------------------------------------
# Pipeline

@dataclass(frozen=True)
class AgreementOptions:
    """Mode switches for the end-to-end agreement pipeline."""

    weight_scheme: str = "uniform"
    paper_compat: bool = False
    z_mode: str = "normal"
    eqn5: str = "worst"
    level: float = 0.95
    seed: int = 0
    n_resamples: int = 2000
    threshold_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.weight_scheme not in ("uniform", "proportional"):
            raise ValidationError(
                f"unknown weight scheme: {self.weight_scheme!r}")
        if self.z_mode not in Z_MODES:
            raise ValidationError(f"unknown z mode: {self.z_mode!r}")
        if self.eqn5 not in EQN5_CONVENTIONS:
            raise ValidationError(f"unknown eqn5 convention: {self.eqn5!r}")
        if not 0.0 < self.level < 1.0:
            raise ValidationError(f"level must be in (0, 1), got {self.level}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if self.n_resamples < 1000:
            raise ValidationError(
                f"n_resamples must be >= 1000, got {self.n_resamples}")


@dataclass(frozen=True)
class AgreementResult:
    """Composite output of the agreement pipeline."""

    fit: WlpFit
    bootstrap_slope_ci: tuple[float, float]
    bootstrap_intercept_ci: tuple[float, float]
    residual_normality: NormalityResult
    residual_normality_ok: bool
    loa: LoaModel
    thresholds: dict[str, tuple[Crossing, ...]]
    influence: tuple[InfluenceClass, ...]
    options: AgreementOptions


def agreement_pipeline(pairs: PairedSeries,
                       options: AgreementOptions | None = None
                       ) -> AgreementResult:
    """Run the full agreement analysis on paired data.

    Fits the least-products line, checks residual normality (Lilliefors;
    the run is flagged, not aborted, when it fails), fits the SD model,
    solves the interchangeability thresholds for both inner and outer
    boundary conventions, and classifies every point. Analytic and
    bootstrap CIs are both computed so the two routes stay comparable.
    """
    opt = options or AgreementOptions()
    if pairs.n < 10:
        raise TooFewPairsError(
            f"agreement pipeline needs n >= 10, got {pairs.n}")
    if opt.weight_scheme == "proportional":
        fit = fit_wlp_proportional(pairs)
    else:
        fit = fit_wlp(pairs)
    fit = wlp_confidence_intervals(fit, level=opt.level, method="analytic")
    boot = wlp_confidence_intervals(fit, level=opt.level, method="bootstrap",
                                    seed=opt.seed,
                                    n_resamples=opt.n_resamples)
    try:
        normality = ks_normality(fit.residuals)
    except ZeroVarianceError:
        # Constant residuals mean the data lie on an exact line; the
        # absolute-residual regression owns that diagnosis.
        fit_loa(fit, paper_compat=opt.paper_compat, z_mode=opt.z_mode)
        raise
    loa = fit_loa(fit, paper_compat=opt.paper_compat, z_mode=opt.z_mode)
    t_range = opt.threshold_range or (0.0, max(fit.m1))
    thresholds = {
        conv: interchange_threshold(loa, fit, t_range, conv, opt.eqn5)
        for conv in THRESHOLD_CONVENTIONS
    }
    influence = tuple(
        classify_influence(fit, (a, b)) for a, b in zip(fit.m1, fit.m2))
    return AgreementResult(
        fit=fit,
        bootstrap_slope_ci=boot.slope_ci,
        bootstrap_intercept_ci=boot.intercept_ci,
        residual_normality=normality,
        residual_normality_ok=normality.normal_at_005,
        loa=loa,
        thresholds=thresholds,
        influence=influence,
        options=opt,
    )
