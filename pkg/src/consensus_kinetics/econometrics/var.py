from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidParameter, SeriesTooShort
from .cointegration import _pair_levels

CRITERIA = ("aic", "sic", "hq", "fpe")


def var_lag_select(pair, p_max: int) -> dict:
    """Lag order of a bivariate VAR in differences (with constant) per criterion.

    All orders 1..p_max are fitted on the same sample; each criterion's
    argmin is returned, the smallest order winning ties. The result also
    carries the full table under ``"table"``.
    """
    if p_max < 1:
        raise InvalidParameter("p_max must be at least 1")
    levels, _ = _pair_levels(pair)
    if levels.shape[0] <= 2 * p_max + 10:
        raise SeriesTooShort(f"{levels.shape[0]} observations are too few for p_max = {p_max}")
    d = np.diff(levels, axis=0)
    K = d.shape[1]
    T = d.shape[0] - p_max
    target = d[p_max:]
    table = {c: [] for c in CRITERIA}
    for p in range(1, p_max + 1):
        X = np.column_stack([np.ones(T)] + [d[p_max - i : p_max - i + T] for i in range(1, p + 1)])
        coef, *_ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ coef
        sigma = resid.T @ resid / T
        logdet = math.log(np.linalg.det(sigma))
        n_par = X.shape[1] * K
        table["aic"].append(logdet + 2.0 * n_par / T)
        table["sic"].append(logdet + math.log(T) * n_par / T)
        table["hq"].append(logdet + 2.0 * math.log(math.log(T)) * n_par / T)
        m = X.shape[1]
        table["fpe"].append(((T + m) / (T - m)) ** K * math.exp(logdet))
    out = {c: int(np.argmin(table[c])) + 1 for c in CRITERIA}
    out["table"] = {c: [float(v) for v in vals] for c, vals in table.items()}
    return out
