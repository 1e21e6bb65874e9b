"""Least squares with categorical fixed effects, HC1 errors, VIFs and margins."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats as sps
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_columns, check_no_missing, check_table

__all__ = [
    "ModelSpec",
    "RegressionResult",
    "Margins",
    "RankDeficientError",
    "InsufficientDataError",
    "fit_ols",
    "vif",
    "margins",
    "parse_formula",
    "FixedEffectsOLS",
    "significance_stars",
    "coefficient_table_csv",
    "LEGENDS",
    "ROBUST_VARIANT",
    "INTERCEPT",
]

ROBUST_VARIANT = "HC1"
INTERCEPT = "const"

# (threshold, marker), tightest first
LEGENDS: Dict[str, Tuple[Tuple[float, str], ...]] = {
    "t4": ((0.001, "***"), (0.01, "**"), (0.05, "*")),
    "t6": ((0.01, "***"), (0.05, "**"), (0.1, "*")),
}


class RankDeficientError(ValueError):
    def __init__(self, columns: Sequence[str], detail: str = ""):
        self.columns = list(columns)
        msg = f"design matrix is rank deficient; collinear columns: {', '.join(self.columns)}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    outcome: str
    predictors: Tuple[str, ...] = ()
    fixed_effects: Tuple[str, ...] = ()
    robust: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "predictors", tuple(self.predictors))
        object.__setattr__(self, "fixed_effects", tuple(self.fixed_effects))
        if self.outcome in self.predictors:
            raise ValueError(f"outcome {self.outcome!r} is also a predictor")
        overlap = set(self.predictors) & set(self.fixed_effects)
        if overlap:
            raise ValueError(f"columns both predictor and fixed effect: {sorted(overlap)}")

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.outcome,) + self.predictors + self.fixed_effects


def parse_formula(formula: str, robust: bool = True) -> ModelSpec:
    """Parse ``"y ~ x1 + x2 | fe1 + fe2"`` into a ModelSpec.

    Fixed effects follow ``|``; ``C(col)`` terms on the right-hand side are
    also taken as fixed effects.
    """
    if "~" not in formula:
        raise ValueError(f"formula needs '~': {formula!r}")
    lhs, rhs = formula.split("~", 1)
    fe_part = ""
    if "|" in rhs:
        rhs, fe_part = rhs.split("|", 1)
    preds, fes = [], []
    for term in (t.strip() for t in rhs.split("+")):
        if not term or term == "1":
            continue
        if term.startswith("C(") and term.endswith(")"):
            fes.append(term[2:-1].strip())
        else:
            preds.append(term)
    fes += [t.strip() for t in fe_part.split("+") if t.strip()]
    outcome = lhs.strip()
    if not outcome:
        raise ValueError(f"formula has no outcome: {formula!r}")
    return ModelSpec(outcome, tuple(preds), tuple(fes), robust)


# --- design matrix ---------------------------------------------------------

def _level_key(v) -> str:
    return str(v)


@dataclass(frozen=True)
class _Design:
    names: Tuple[str, ...]
    levels: Mapping[str, Tuple[str, ...]]  # kept (non-reference) levels per FE column
    reference: Mapping[str, str]


def _design_info(df: pd.DataFrame, spec: ModelSpec) -> _Design:
    names = [INTERCEPT] + list(spec.predictors)
    levels, reference = {}, {}
    for col in spec.fixed_effects:
        lv = sorted({_level_key(v) for v in df[col]})
        reference[col] = lv[0]
        levels[col] = tuple(lv[1:])
        names += [f"{col}[{v}]" for v in lv[1:]]
    return _Design(tuple(names), levels, reference)


def _design_matrix(df: pd.DataFrame, spec: ModelSpec, info: _Design) -> np.ndarray:
    n = len(df)
    blocks = [np.ones((n, 1))]
    if spec.predictors:
        try:
            blocks.append(df[list(spec.predictors)].to_numpy(dtype=float))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"predictors must be numeric: {exc}") from exc
    for col in spec.fixed_effects:
        keys = df[col].map(_level_key).to_numpy()
        kept = info.levels[col]
        blocks.append((keys[:, None] == np.asarray(kept, dtype=object)[None, :]).astype(float)
                      if kept else np.empty((n, 0)))
    return np.hstack(blocks)


def _collinear_detail(X: np.ndarray, names: Sequence[str], independent: Sequence[int],
                      dependent: Sequence[int]) -> Tuple[str, List[str]]:
    """Readable relations plus every column taking part in one."""
    parts = []
    involved = set()
    basis = X[:, independent]
    for j in dependent:
        coef, *_ = np.linalg.lstsq(basis, X[:, j], rcond=None)
        scale = max(np.abs(coef).max(initial=0.0), 1.0)
        partners = [names[independent[i]] for i in np.flatnonzero(np.abs(coef) > 1e-8 * scale)]
        involved.add(names[j])
        involved.update(partners)
        if partners:
            parts.append(f"{names[j]} ~ {' + '.join(partners)}")
        else:
            parts.append(f"{names[j]} is all zero")
    ordered = [n for n in names if n in involved]
    return "; ".join(parts), ordered


def _check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    tol = max(X.shape) * np.finfo(float).eps * (d[0] if d.size else 0.0)
    rank = int(np.sum(d > tol))
    if rank < X.shape[1]:
        dependent = sorted(piv[rank:].tolist())
        independent = sorted(piv[:rank].tolist())
        detail, involved = _collinear_detail(X, names, independent, dependent)
        raise RankDeficientError(involved, detail)


# --- results ---------------------------------------------------------------

@dataclass
class RegressionResult:
    coefficients: Dict[str, float]
    std_errors: Dict[str, float]
    p_values: Dict[str, float]
    t_values: Dict[str, float]
    r_squared: float
    n: int
    k: int
    vifs: Dict[str, float]
    spec: ModelSpec
    robust_variant: Optional[str]
    design_columns: Tuple[str, ...]
    fe_levels: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    fe_reference: Mapping[str, str] = field(default_factory=dict)
    cov: Optional[np.ndarray] = field(default=None, repr=False)
    residuals: Optional[np.ndarray] = field(default=None, repr=False)
    fitted: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def df_resid(self) -> int:
        return self.n - self.k

    @property
    def params(self) -> np.ndarray:
        return np.array([self.coefficients[c] for c in self.design_columns])

    def design(self, data) -> np.ndarray:
        df = check_table(data)
        info = _Design(self.design_columns, self.fe_levels, self.fe_reference)
        return _design_matrix(df, self.spec, info)

    def predict(self, data) -> np.ndarray:
        return self.design(data) @ self.params

    def to_dict(self) -> dict:
        def num(x: float):
            return None if x is None or (isinstance(x, float) and math.isnan(x)) else (
                "inf" if x == math.inf else x)

        return {
            "outcome": self.spec.outcome,
            "predictors": list(self.spec.predictors),
            "fixed_effects": list(self.spec.fixed_effects),
            "fixed_effect_reference": dict(self.fe_reference),
            "robust_variant": self.robust_variant,
            "n": self.n,
            "k": self.k,
            "df_resid": self.df_resid,
            "r_squared": self.r_squared,
            "coefficients": {c: self.coefficients[c] for c in self.design_columns},
            "std_errors": {c: self.std_errors[c] for c in self.design_columns},
            "t_values": {c: num(self.t_values[c]) for c in self.design_columns},
            "p_values": {c: self.p_values[c] for c in self.design_columns},
            "vifs": {c: num(v) for c, v in self.vifs.items()},
        }


def fit_ols(data, spec: ModelSpec, compute_vif: bool = True) -> RegressionResult:
    """Least-squares fit of ``spec`` on ``data``.

    Fixed-effect columns become dummies with the alphabetically first level
    dropped. Coefficients come from a Householder QR solve. With
    ``spec.robust`` the covariance is HC1; p-values are two-sided from a t
    distribution with n - k degrees of freedom.

    Raises RankDeficientError naming the collinear columns, and
    InsufficientDataError when there are not more rows than parameters.
    """
    df = check_table(data)
    check_columns(df, spec.columns)
    check_no_missing(df, spec.columns)
    info = _design_info(df, spec)
    X = _design_matrix(df, spec, info)
    y = df[spec.outcome].to_numpy(dtype=float)
    n, k = X.shape
    if n <= k:
        raise InsufficientDataError(f"need more rows than parameters: n={n}, k={k}")
    _check_rank(X, info.names)

    Q, R = np.linalg.qr(X)
    beta = scipy.linalg.solve_triangular(R, Q.T @ y)
    fitted = X @ beta
    resid = y - fitted
    dof = n - k
    Rinv = scipy.linalg.solve_triangular(R, np.eye(k))
    if spec.robust:
        Qe = Q * resid[:, None]
        meat = Qe.T @ Qe
        cov = Rinv @ meat @ Rinv.T * (n / dof)
    else:
        cov = Rinv @ Rinv.T * (resid @ resid / dof)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    tvals = np.empty(k)
    pvals = np.empty(k)
    for j in range(k):
        if se[j] > 0:
            tvals[j] = beta[j] / se[j]
            pvals[j] = 2 * sps.t.sf(abs(tvals[j]), dof)
        elif beta[j] != 0:
            tvals[j] = math.copysign(math.inf, beta[j])
            pvals[j] = 0.0
        else:
            tvals[j] = 0.0
            pvals[j] = 1.0

    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 0.0 if sst == 0 else min(1.0, max(0.0, 1.0 - float(resid @ resid) / sst))

    names = info.names
    vifs: Dict[str, float] = {}
    if compute_vif and spec.predictors:
        vifs = _vif_from_design(X[:, 1:], list(names[1:]), report=list(spec.predictors))
    return RegressionResult(
        coefficients=dict(zip(names, beta.tolist())),
        std_errors=dict(zip(names, se.tolist())),
        p_values=dict(zip(names, pvals.tolist())),
        t_values=dict(zip(names, tvals.tolist())),
        r_squared=r2,
        n=n,
        k=k,
        vifs=vifs,
        spec=spec,
        robust_variant=ROBUST_VARIANT if spec.robust else None,
        design_columns=names,
        fe_levels=dict(info.levels),
        fe_reference=dict(info.reference),
        cov=cov,
        residuals=resid,
        fitted=fitted,
    )


# --- VIF -------------------------------------------------------------------

# relative residual norm below which a column counts as an exact combination
_EXACT_COLLINEAR_RTOL = 1e-10


def _vif_from_design(Z: np.ndarray, names: List[str], report: Sequence[str]) -> Dict[str, float]:
    n = Z.shape[0]
    out: Dict[str, float] = {}
    for name in report:
        j = names.index(name)
        target = Z[:, j]
        others = np.hstack([np.ones((n, 1)), np.delete(Z, j, axis=1)])
        coef, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        centered = target - target.mean()
        sst = float(centered @ centered)
        ssr = float(resid @ resid)
        if sst == 0 or math.sqrt(ssr) <= _EXACT_COLLINEAR_RTOL * math.sqrt(sst):
            out[name] = math.inf
        else:
            out[name] = sst / ssr  # 1 / (1 - R^2)
    return out


def vif(data, predictors: Sequence[str], fixed_effects: Sequence[str] = ()) -> Dict[str, float]:
    """Variance inflation factor of each predictor.

    Each predictor is regressed on the others (plus intercept and any
    fixed-effect dummies). Exact linear combinations give ``math.inf``.
    """
    predictors = list(predictors)
    if len(predictors) + len(fixed_effects) < 2 or not predictors:
        raise ValueError("vif needs at least two predictors")
    df = check_table(data)
    check_columns(df, predictors + list(fixed_effects))
    check_no_missing(df, predictors + list(fixed_effects))
    spec = ModelSpec("__none__", tuple(predictors), tuple(fixed_effects))
    info = _design_info(df, spec)
    X = _design_matrix(df, spec, info)
    return _vif_from_design(X[:, 1:], list(info.names[1:]), report=predictors)


# --- margins ---------------------------------------------------------------

@dataclass(frozen=True)
class Margins:
    focal: str
    pred_0: float
    pred_1: float
    pct_diff: Optional[float]
    """``None`` when the baseline prediction is zero."""

    @property
    def undefined(self) -> bool:
        return self.pct_diff is None


def margins(result: RegressionResult, data, focal: str, levels: Tuple[float, float] = (0, 1)) -> Margins:
    """Predictions at two levels of a binary predictor, all else at sample means.

    Dummies are held at their sample means (shares). The percent difference
    is ``(pred_1 - pred_0) / pred_0 * 100``.
    """
    if focal not in result.spec.predictors:
        raise ValueError(f"{focal!r} is not a predictor of the model")
    df = check_table(data)
    vals = set(pd.unique(df[focal].dropna()))
    if not vals <= {0, 1, 0.0, 1.0, True, False}:
        raise ValueError(f"focal predictor {focal!r} must be binary (0/1)")
    X = result.design(df)
    means = X.mean(axis=0)
    j = result.design_columns.index(focal)
    beta = result.params
    lo, hi = means.copy(), means.copy()
    lo[j], hi[j] = levels
    p0, p1 = float(lo @ beta), float(hi @ beta)
    # a baseline that is zero up to rounding makes the percentage meaningless
    scale = float(np.abs(beta) @ np.maximum(np.abs(lo), np.abs(hi)))
    pct = None if abs(p0) <= 64 * np.finfo(float).eps * scale else (p1 - p0) / p0 * 100.0
    return Margins(focal, p0, p1, pct)


# --- export ----------------------------------------------------------------

def significance_stars(p: float, legend: str = "t4") -> str:
    for threshold, marker in LEGENDS[legend]:
        if p < threshold:
            return marker
    return ""


def legend_text(legend: str = "t4") -> str:
    return "; ".join(f"{m} p<{t:g}" for t, m in LEGENDS[legend])


def coefficient_table_csv(results: Sequence[Tuple[str, RegressionResult]], legend: str = "t4") -> str:
    """Long-format coefficient table: one row per (model, term)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "term", "coef", "std_err", "t", "p_value", "stars", "vif", "n", "r_squared"])
    for label, res in results:
        for c in res.design_columns:
            v = res.vifs.get(c)
            w.writerow([label, c, repr(res.coefficients[c]), repr(res.std_errors[c]),
                        repr(res.t_values[c]), repr(res.p_values[c]),
                        significance_stars(res.p_values[c], legend),
                        "" if v is None else repr(v), res.n, repr(res.r_squared)])
    return buf.getvalue()


def results_json(results: Sequence[Tuple[str, RegressionResult]], legend: str = "t4") -> str:
    payload = {"legend": legend_text(legend), "robust_variant": ROBUST_VARIANT,
               "models": {label: res.to_dict() for label, res in results}}
    return json.dumps(payload, indent=2, sort_keys=True)


# --- estimator -------------------------------------------------------------

class FixedEffectsOLS(BaseEstimator, RegressorMixin):
    """OLS regressor with categorical fixed effects and HC1 errors.

    ``fit`` takes a DataFrame ``X`` holding the predictors and the
    fixed-effect columns, and the outcome ``y``. Every column of ``X`` not
    listed in ``fixed_effects`` is a predictor.

    Attributes
    ----------
    result_ : RegressionResult
    coef_ : ndarray of predictor coefficients, in column order
    intercept_ : float
    """

    def __init__(self, fixed_effects=(), robust=True):
        self.fixed_effects = fixed_effects
        self.robust = robust

    def fit(self, X, y):
        df = check_table(X).copy()
        fes = tuple(self.fixed_effects)
        check_columns(df, fes)
        predictors = tuple(c for c in df.columns if c not in fes)
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != len(df):
            raise ValueError(f"X has {len(df)} rows but y has {len(y)}")
        outcome = "__y__"
        df[outcome] = y
        self.result_ = fit_ols(df, ModelSpec(outcome, predictors, fes, bool(self.robust)))
        self.feature_names_in_ = np.asarray(predictors, dtype=object)
        self.n_features_in_ = len(predictors)
        self.coef_ = np.array([self.result_.coefficients[c] for c in predictors])
        self.intercept_ = self.result_.coefficients[INTERCEPT]
        self.bse_ = np.array([self.result_.std_errors[c] for c in predictors])
        self.pvalues_ = np.array([self.result_.p_values[c] for c in predictors])
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.result_.predict(check_table(X))

    def margins(self, X, focal, levels=(0, 1)) -> Margins:
        check_is_fitted(self, "result_")
        return margins(self.result_, check_table(X), focal, levels)
