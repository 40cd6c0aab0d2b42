from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..errors import ConstantSeries, InvalidParameter, SeriesTooShort
from ..timeseries import TimeSeries
from .critical_values import DF_CRITICAL, LEVELS
from .ols import OlsFit, ols

Spec = Literal["none", "constant", "trend"]


@dataclass(frozen=True, eq=False)
class AdfResult:
    statistic: float
    lag_order: int
    spec: str
    critical_values: dict
    reject_at: dict
    n_obs: int
    fit: OlsFit

    def to_dict(self) -> dict:
        return {
            "test": "adf",
            "statistic": float(self.statistic),
            "lag_order": self.lag_order,
            "spec": self.spec,
            "n_obs": self.n_obs,
            "critical_values": dict(self.critical_values),
            "reject_at": dict(self.reject_at),
        }


def default_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _values(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return ts.values
    return np.asarray(ts, dtype=float)


def _design(y: np.ndarray, lag: int, spec: str, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows t = start..n-1 of the DF regression with ``lag`` augmentation terms."""
    dy = np.diff(y)
    rows = np.arange(start, y.size)
    cols = [y[rows - 1]]
    if spec in ("constant", "trend"):
        cols.append(np.ones(rows.size))
    if spec == "trend":
        cols.append(rows.astype(float))
    for i in range(1, lag + 1):
        cols.append(dy[rows - 1 - i])
    return dy[rows - 1], np.column_stack(cols)


def _aic(fit: OlsFit) -> float:
    n = fit.n_obs
    llf = -0.5 * n * (math.log(2.0 * math.pi) + math.log(fit.ssr / n) + 1.0)
    return -2.0 * llf + 2.0 * fit.n_params


def adf_test(ts, spec: Spec = "none", max_lag: int | None = None, lag_rule: str = "aic") -> AdfResult:
    """Augmented Dickey-Fuller t-test of a unit root.

    With ``lag_rule="aic"`` the augmentation order is chosen over 0..max_lag
    on a common sample (smallest order wins ties) and the regression is then
    refitted on all usable observations. ``"fixed"`` uses ``max_lag``.
    """
    if spec not in DF_CRITICAL:
        raise InvalidParameter(f"unknown ADF spec {spec!r}")
    y = _values(ts)
    n = y.size
    if n < 3:
        raise SeriesTooShort("ADF needs at least 3 observations")
    if np.ptp(y) == 0:
        raise ConstantSeries("series is constant")
    if max_lag is None:
        max_lag = default_max_lag(n)
    if max_lag < 0:
        raise InvalidParameter("max_lag must be nonnegative")
    n_det = {"none": 0, "constant": 1, "trend": 2}[spec]
    if n - 1 - max_lag <= 1 + n_det + max_lag:
        raise SeriesTooShort(f"{n} observations are too few for {max_lag} lags")

    if lag_rule == "fixed":
        lag = max_lag
    elif lag_rule == "aic":
        best = None
        for p in range(max_lag + 1):
            fit = ols(*_design(y, p, spec, max_lag + 1))
            crit = _aic(fit)
            if best is None or crit < best[0]:
                best = (crit, p)
        lag = best[1]
    else:
        raise InvalidParameter(f"unknown lag rule {lag_rule!r}")

    fit = ols(*_design(y, lag, spec, lag + 1))
    stat = float(fit.t_stats[0])
    crit = dict(DF_CRITICAL[spec])
    reject = {lv: bool(stat < crit[lv]) for lv in LEVELS}
    return AdfResult(stat, lag, spec, crit, reject, fit.n_obs, fit)
