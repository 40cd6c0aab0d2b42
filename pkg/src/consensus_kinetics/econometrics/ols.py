from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import InvalidParameter, RankDeficient, TooFewObservations


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Classical least-squares fit with homoskedastic standard errors.

    R^2 is centered when the design contains a constant column and uncentered
    otherwise, so it always lies in [0, 1].
    """

    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    residuals: np.ndarray
    r_squared: float
    n_obs: int
    n_params: int
    ssr: float
    cov: np.ndarray
    has_constant: bool

    @property
    def sigma2(self) -> float:
        return self.ssr / (self.n_obs - self.n_params)

    @property
    def dof(self) -> int:
        return self.n_obs - self.n_params

    def to_dict(self, names: list[str] | None = None) -> dict:
        names = names or [f"b{i}" for i in range(self.n_params)]
        return {
            "coefficients": {
                nm: {"estimate": float(c), "std_error": float(s), "t_stat": _finite_or_none(t)}
                for nm, c, s, t in zip(names, self.coefficients, self.std_errors, self.t_stats)
            },
            "r_squared": float(self.r_squared),
            "n_obs": self.n_obs,
        }


def _finite_or_none(v: float):
    v = float(v)
    return v if np.isfinite(v) else None


def _has_constant(X: np.ndarray) -> bool:
    return bool(np.any(np.all(X == X[0:1, :], axis=0) & (X[0] != 0)))


def ols(y, regressors) -> OlsFit:
    """Least squares of ``y`` on the columns of ``regressors`` (n x k)."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(regressors, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.size:
        raise InvalidParameter("y must be 1-d and regressors n x k with matching n")
    n, k = X.shape
    if n <= k:
        raise TooFewObservations(f"{n} observations for {k} parameters")
    Q, R = scipy.linalg.qr(X, mode="economic")
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * max(diag.max(), 1e-300):
        raise RankDeficient("regressor matrix is not of full column rank")
    beta = scipy.linalg.solve_triangular(R, Q.T @ y)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    Rinv = scipy.linalg.solve_triangular(R, np.eye(k))
    cov = sigma2 * (Rinv @ Rinv.T)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
    const = _has_constant(X)
    sst = float(np.sum((y - y.mean()) ** 2)) if const else float(y @ y)
    if sst > 0:
        r2 = min(max(1.0 - ssr / sst, 0.0), 1.0)
    else:
        r2 = 1.0 if ssr == 0 else 0.0
    return OlsFit(beta, se, t, resid, r2, n, k, ssr, cov, const)
