from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import ConstantSeries, InvalidParameter, SeriesTooShort
from .ols import ols


@dataclass(frozen=True)
class DiagnosticResult:
    name: str
    statistic: float
    p_value: float
    lags: int | None = None
    dof: int | None = None

    def to_dict(self) -> dict:
        return {
            "test": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "lags": self.lags,
            "dof": self.dof,
        }


def _chi2_result(name, stat, dof, lags=None) -> DiagnosticResult:
    stat = max(float(stat), 0.0)
    p = float(min(max(stats.chi2.sf(stat, dof), 0.0), 1.0))
    return DiagnosticResult(name, stat, p, lags, dof)


def _lag_matrix(e: np.ndarray, lags: int) -> np.ndarray:
    """Columns e_{t-1}, ..., e_{t-lags}, zero before the sample start."""
    n = e.size
    out = np.zeros((n, lags))
    for i in range(1, lags + 1):
        out[i:, i - 1] = e[: n - i]
    return out


def breusch_godfrey(residuals, lags: int, regressors=None) -> DiagnosticResult:
    """LM test for serial correlation up to order ``lags``.

    The auxiliary regression uses the original regressors (a constant when
    none are given) and zero-filled lagged residuals; statistic n * R^2.
    """
    e = np.asarray(residuals, dtype=float)
    n = e.size
    if lags < 1:
        raise InvalidParameter("lags must be at least 1")
    Z = np.ones((n, 1)) if regressors is None else np.asarray(regressors, dtype=float).reshape(n, -1)
    if lags + Z.shape[1] >= n:
        raise SeriesTooShort(f"{n} residuals are too few for {lags} lags")
    fit = ols(e, np.hstack([Z, _lag_matrix(e, lags)]))
    return _chi2_result("breusch_godfrey", n * fit.r_squared, lags, lags)


def jarque_bera(residuals) -> DiagnosticResult:
    e = np.asarray(residuals, dtype=float)
    n = e.size
    if n < 8:
        raise SeriesTooShort("Jarque-Bera needs at least 8 observations")
    c = e - e.mean()
    m2 = float(np.mean(c**2))
    if m2 == 0.0:
        raise ConstantSeries("residuals are constant")
    S = float(np.mean(c**3)) / m2**1.5
    K = float(np.mean(c**4)) / m2**2
    return _chi2_result("jarque_bera", n / 6.0 * (S * S + 0.25 * (K - 3.0) ** 2), 2)


def arch_lm(residuals, lags: int) -> DiagnosticResult:
    """Engle's LM test: e_t^2 on a constant and ``lags`` own lags; (n - lags) * R^2."""
    if lags < 1:
        raise InvalidParameter("lags must be at least 1")
    e2 = np.asarray(residuals, dtype=float) ** 2
    n = e2.size - lags
    if n <= lags + 1:
        raise SeriesTooShort(f"{e2.size} residuals are too few for {lags} lags")
    X = np.column_stack([np.ones(n)] + [e2[lags - i : lags - i + n] for i in range(1, lags + 1)])
    if np.ptp(e2[lags:]) == 0:
        raise ConstantSeries("squared residuals are constant")
    fit = ols(e2[lags:], X)
    return _chi2_result("arch_lm", n * fit.r_squared, lags, lags)
