from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import DegenerateResiduals, InvalidParameter, NumericalFailure, SeriesTooShort
from ..timeseries import TimeSeries, align
from .critical_values import JOHANSEN_TRACE_CRITICAL, level_key
from .ols import OlsFit, ols
from .unitroot import AdfResult, adf_test


@dataclass(frozen=True, eq=False)
class EngleGrangerResult:
    longrun_slope: float
    longrun_intercept: float
    residual_series: TimeSeries
    residual_adf: AdfResult
    cointegrated: bool
    level: str
    fit: OlsFit

    def to_dict(self) -> dict:
        return {
            "test": "engle_granger",
            "longrun_slope": float(self.longrun_slope),
            "longrun_intercept": float(self.longrun_intercept),
            "regression": self.fit.to_dict(["slope", "intercept"]),
            "residual_adf": self.residual_adf.to_dict(),
            "level": self.level,
            "cointegrated": self.cointegrated,
        }


def engle_granger(
    y: TimeSeries, z: TimeSeries, level="5%", max_lag: int | None = None, lag_rule: str = "aic"
) -> EngleGrangerResult:
    """Two-step test: y on (z, 1), then a no-constant ADF on the residuals."""
    level = level_key(level)
    y, z = align(y, z)
    if len(y) < 30:
        raise SeriesTooShort("Engle-Granger needs at least 30 aligned observations")
    fit = ols(y.values, np.column_stack([z.values, np.ones(len(z))]))
    e = fit.residuals
    scale = max(float(np.max(np.abs(y.values))), 1.0)
    if np.max(np.abs(e)) <= 1e-12 * scale:
        raise DegenerateResiduals("long-run regression fits exactly; residuals are zero")
    res = adf_test(e, spec="none", max_lag=max_lag, lag_rule=lag_rule)
    resid_ts = TimeSeries(y.dates, e, "residual")
    return EngleGrangerResult(
        float(fit.coefficients[0]), float(fit.coefficients[1]), resid_ts, res,
        bool(res.reject_at[level]), level, fit,
    )


@dataclass(frozen=True, eq=False)
class JohansenResult:
    """Bivariate reduced-rank regression with the constant inside the relation.

    ``vectors`` holds the cointegrating vectors as rows (coefficients on the
    two lagged levels and the constant), each scaled so its first entry is 1.
    ``loadings`` are the adjustment speeds of the two equations for the
    leading vector, in series order.
    """

    eigenvalues: np.ndarray
    trace_stats: dict
    max_eig_stats: dict
    critical_values: dict
    selected_rank: int
    level: str
    vectors: np.ndarray
    loadings: np.ndarray
    n_obs: int
    lag_order: int
    decision: str = "max_eig"

    @property
    def longrun_vector(self) -> np.ndarray:
        return self.vectors[0, :2]

    @property
    def longrun_slope(self) -> float:
        return float(-self.vectors[0, 1])

    @property
    def longrun_intercept(self) -> float:
        return float(-self.vectors[0, 2])

    def to_dict(self) -> dict:
        return {
            "test": "johansen",
            "lag_order": self.lag_order,
            "n_obs": self.n_obs,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "trace_stats": {k: float(v) for k, v in self.trace_stats.items()},
            "max_eig_stats": {k: float(v) for k, v in self.max_eig_stats.items()},
            "decision_statistic": self.decision,
            "critical_values": {k: dict(v) for k, v in self.critical_values.items()},
            "level": self.level,
            "selected_rank": self.selected_rank,
            "longrun_vector": [float(v) for v in self.longrun_vector],
            "longrun_intercept": float(self.vectors[0, 2]),
            "loadings": [float(v) for v in self.loadings],
        }


def _lagged_diffs(levels: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """dY_t, Y_{t-1} and [dY_{t-1}, ..., dY_{t-p}] for t = p+1..n-1."""
    dY = np.diff(levels, axis=0)
    T = dY.shape[0] - p
    d0 = dY[p:]
    lev = levels[p:-1]
    lags = np.hstack([dY[p - i : p - i + T] for i in range(1, p + 1)]) if p > 0 else np.empty((T, 0))
    return d0, lev, lags


def _pair_levels(pair) -> tuple[np.ndarray, np.ndarray | None]:
    a, b = pair
    if isinstance(a, TimeSeries):
        a, b = align(a, b)
        return np.column_stack([a.values, b.values]), a.dates
    return np.column_stack([np.asarray(a, float), np.asarray(b, float)]), None


def _reduced_rank(levels: np.ndarray, p: int):
    d0, lev, lags = _lagged_diffs(levels, p)
    T = d0.shape[0]
    Z1 = np.column_stack([lev, np.ones(T)])
    if p > 0:
        coef0, *_ = np.linalg.lstsq(lags, d0, rcond=None)
        coef1, *_ = np.linalg.lstsq(lags, Z1, rcond=None)
        R0, R1 = d0 - lags @ coef0, Z1 - lags @ coef1
    else:
        R0, R1 = d0, Z1
    S00, S11, S01 = R0.T @ R0 / T, R1.T @ R1 / T, R0.T @ R1 / T
    try:
        L = np.linalg.cholesky(S11)
        Linv = scipy.linalg.solve_triangular(L, np.eye(3), lower=True)
        C = Linv @ S01.T @ np.linalg.solve(S00, S01) @ Linv.T
        lam, U = np.linalg.eigh(0.5 * (C + C.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Johansen eigenproblem failed: {exc}") from exc
    order = np.argsort(lam)[::-1]
    lam, U = lam[order], U[:, order]
    B = (Linv.T @ U).T  # rows are eigenvectors in Z1 coordinates
    return np.clip(lam[:2], 0.0, 1.0 - 1e-15), B[:2], S01, S11, T


def johansen(pair, p: int = 1, level="5%", decision: str = "max_eig") -> JohansenResult:
    """Likelihood-ratio tests of the cointegration rank of a bivariate system.

    ``pair`` is two aligned TimeSeries (or arrays); ``p`` is the number of
    lagged differences in the error-correction form. The selected rank is the
    smallest r whose statistic stays below the stored critical value. The
    stored r=0 row holds maximum-eigenvalue quantiles, so by default r=0 is
    decided on -T ln(1 - lambda_1); ``decision="trace"`` compares the trace
    statistic instead. For r<=1 the two statistics coincide.
    """
    level = level_key(level)
    if decision not in ("max_eig", "trace"):
        raise InvalidParameter(f"unknown decision statistic {decision!r}")
    levels, _ = _pair_levels(pair)
    if p < 0:
        raise SeriesTooShort("lag order must be nonnegative")
    if levels.shape[0] < 2 * p + 20:
        raise SeriesTooShort(f"{levels.shape[0]} observations are too few for p = {p}")
    lam, B, S01, S11, T = _reduced_rank(levels, p)
    vectors = B / B[:, :1]
    beta = vectors[0]
    loadings = S01 @ beta / float(beta @ S11 @ beta)
    log1m = np.log1p(-lam)
    trace = {"r=0": float(-T * log1m.sum()), "r<=1": float(-T * log1m[1])}
    max_eig = {"r=0": float(-T * log1m[0]), "r<=1": float(-T * log1m[1])}
    used = max_eig if decision == "max_eig" else trace
    crit = {k: dict(v) for k, v in JOHANSEN_TRACE_CRITICAL.items()}
    rank = 2
    for r, key in enumerate(("r=0", "r<=1")):
        if used[key] < crit[key][level]:
            rank = r
            break
    return JohansenResult(lam, trace, max_eig, crit, rank, level, vectors, loadings, T, p, decision)
