from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import InvalidParameter, OutOfDomain
from .cointegration import JohansenResult, _lagged_diffs, _pair_levels, johansen
from .ols import OlsFit, ols


@dataclass(frozen=True, eq=False)
class VecmFit:
    """Error-correction fit of a bivariate system, estimated equation by equation.

    Each equation regresses dY_i,t on the r lagged error-correction terms
    beta_j'(Y_{t-1}, 1) followed by dY_{t-1}, ..., dY_{t-p} (both series per lag).
    ``loadings[i, j]`` is equation i's response to relation j and
    ``short_run[l][i, j]`` the coefficient of dY_j,t-1-l in equation i.
    """

    lag_order: int
    rank: int
    vectors: np.ndarray
    loadings: np.ndarray
    short_run: np.ndarray
    equations: tuple
    residuals: np.ndarray
    r_squared: np.ndarray
    johansen: JohansenResult
    levels: np.ndarray
    names: tuple = ("y", "x")

    @property
    def longrun(self) -> tuple[float, float]:
        """(slope, intercept) of the leading relation y = slope*x + intercept."""
        return float(-self.vectors[0, 1]), float(-self.vectors[0, 2])

    @property
    def rank_supported(self) -> bool:
        return self.johansen.selected_rank >= self.rank

    def regressor_names(self) -> list[str]:
        out = [f"ect{j + 1}" for j in range(self.rank)]
        for lag in range(1, self.lag_order + 1):
            out += [f"d{nm}_l{lag}" for nm in self.names]
        return out

    def to_dict(self) -> dict:
        slope, intercept = self.longrun
        cols = self.regressor_names()
        return {
            "model": "vecm",
            "lag_order": self.lag_order,
            "rank": self.rank,
            "rank_supported": self.rank_supported,
            "longrun": {"slope": slope, "intercept": intercept},
            "equations": {
                f"d{nm}": {**eq.to_dict(cols), "loading": float(self.loadings[i, 0])}
                for i, (nm, eq) in enumerate(zip(self.names, self.equations))
            },
            "johansen": self.johansen.to_dict(),
        }


def vecm_fit(pair, p: int = 1, r: int = 1, level="5%", names: tuple = ("y", "x")) -> VecmFit:
    """Johansen long run, then OLS of each differenced series on ECTs and lags.

    The fit is returned for any r in {1, 2}; ``rank_supported`` reports
    whether the trace test backs the requested rank.
    """
    if r not in (1, 2):
        raise InvalidParameter("rank must be 1 or 2 for a bivariate system")
    levels, _ = _pair_levels(pair)
    jo = johansen((levels[:, 0], levels[:, 1]), p, level)
    vectors = jo.vectors[:r]
    d0, lev, lags = _lagged_diffs(levels, p)
    ect = np.column_stack([lev, np.ones(lev.shape[0])]) @ vectors.T
    X = np.hstack([ect, lags])
    eqs = tuple(ols(d0[:, i], X) for i in range(2))
    coef = np.vstack([e.coefficients for e in eqs])
    loadings = coef[:, :r]
    short = np.stack([coef[:, r + 2 * l : r + 2 * l + 2] for l in range(p)]) if p else np.empty((0, 2, 2))
    resid = np.column_stack([e.residuals for e in eqs])
    return VecmFit(
        p, r, vectors, loadings, short, eqs, resid,
        np.array([e.r_squared for e in eqs]), jo, levels, tuple(names),
    )


@dataclass(frozen=True, eq=False)
class LevelVar:
    """Y_t = const + sum_i coefs[i] @ Y_{t-1-i}."""

    const: np.ndarray
    coefs: np.ndarray

    def predict(self, levels: np.ndarray) -> np.ndarray:
        """One-step predictions for t = order..n-1."""
        order = self.coefs.shape[0]
        n = levels.shape[0]
        out = np.tile(self.const, (n - order, 1))
        for i in range(order):
            out += levels[order - 1 - i : n - 1 - i] @ self.coefs[i].T
        return out


def vecm_to_var(fit: VecmFit) -> LevelVar:
    """Level VAR(p+1) equivalent to the error-correction fit."""
    pi_full = fit.loadings @ fit.vectors
    Pi, const = pi_full[:, :2], pi_full[:, 2]
    p = fit.lag_order
    A = np.zeros((p + 1, 2, 2))
    A[0] = np.eye(2) + Pi
    if p:
        A[0] += fit.short_run[0]
        for i in range(1, p):
            A[i] = fit.short_run[i] - fit.short_run[i - 1]
        A[p] = -fit.short_run[p - 1]
    return LevelVar(const, A)


def vecm_predict(fit: VecmFit, levels: np.ndarray | None = None) -> np.ndarray:
    """One-step level predictions Y_{t-1} + fitted dY_t for t = p+1..n-1."""
    levels = fit.levels if levels is None else np.asarray(levels, float)
    d0, lev, lags = _lagged_diffs(levels, fit.lag_order)
    ect = np.column_stack([lev, np.ones(lev.shape[0])]) @ fit.vectors.T
    X = np.hstack([ect, lags])
    coef = np.vstack([e.coefficients for e in fit.equations])
    return lev + X @ coef.T


def granger_block_test(fit: VecmFit, equation, block) -> tuple[float, float]:
    """F test that all lagged differences of series ``block`` are zero in ``equation``.

    ``equation`` and ``block`` are series indices (0, 1) or names.
    """
    eq = _series_index(fit, equation)
    src = _series_index(fit, block)
    p = fit.lag_order
    if p == 0:
        raise InvalidParameter("the coefficient block is empty (no lagged differences)")
    d0, lev, lags = _lagged_diffs(fit.levels, p)
    ect = np.column_stack([lev, np.ones(lev.shape[0])]) @ fit.vectors.T
    X = np.hstack([ect, lags])
    drop = [fit.rank + 2 * l + src for l in range(p)]
    keep = [j for j in range(X.shape[1]) if j not in drop]
    full: OlsFit = fit.equations[eq]
    restricted = ols(d0[:, eq], X[:, keep])
    F = ((restricted.ssr - full.ssr) / p) / (full.ssr / full.dof)
    F = max(F, 0.0)
    return float(F), float(stats.f.sf(F, p, full.dof))


def _series_index(fit: VecmFit, key) -> int:
    if isinstance(key, str):
        if key not in fit.names:
            raise InvalidParameter(f"unknown series {key!r}; expected one of {fit.names}")
        return fit.names.index(key)
    key = int(key)
    if key not in (0, 1):
        raise InvalidParameter("series index must be 0 or 1")
    return key


def half_life(gamma_prime: float) -> float:
    """Periods for (1 + gamma')^t to reach one half."""
    g = float(gamma_prime)
    if not -1.0 < g < 0.0:
        raise OutOfDomain(f"half-life needs -1 < gamma' < 0, got {g}")
    return math.log(0.5) / math.log1p(g)
