"""Mean sentiment and variance dynamics of the kinetic opinion model.

The mean sentiment obeys ds/dt = q*beta*(X(t)(1+delta) - s), independent of
alpha. Two variance equations are provided:

* ``"corrected"`` (default), re-derived from the jump-drift process:
  dV/dt = (-2*alpha + beta*(q^2 - 2q)) V + beta*q^2 (s - X(1+delta))^2
* ``"paper"``, the published form with +2*alpha in the growth rate and an
  expanded forcing that is negative at V = 0, s = X(1+delta).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..errors import InvalidParameter
from .params import KineticParams
from .paths import ForcingPath, _phi, as_time_grid, propagate_linear, rk4

Variant = Literal["corrected", "paper"]
VARIANTS = ("corrected", "paper")


@dataclass(frozen=True, eq=False)
class SentimentPath:
    t_grid: np.ndarray
    s_values: np.ndarray


@dataclass(frozen=True, eq=False)
class VariancePath:
    t_grid: np.ndarray
    v_values: np.ndarray
    variant: str = "corrected"


def interaction_rule(x, X, params: KineticParams):
    """Post-jump forecast: (1-q)*x + q*X*(1+delta)."""
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    if np.any(x < 0) or np.any(X <= 0):
        raise InvalidParameter("interaction rule needs x >= 0 and X > 0")
    out = (1.0 - params.q) * x + params.q * X * (1.0 + params.delta)
    return float(out) if out.ndim == 0 else out


def _check_s0(s0: float) -> float:
    s0 = float(s0)
    if not np.isfinite(s0) or s0 < 0:
        raise InvalidParameter(f"s0 must be nonnegative, got {s0}")
    return s0


def sentiment_closed_form(
    params: KineticParams, X: ForcingPath, s0: float, t_grid
) -> SentimentPath:
    """Evaluate s(t) = s0 e^{-kt} + k(1+delta) int_0^t X(u) e^{k(u-t)} du.

    The convolution is integrated exactly between knots of the interpolated
    index path (linear or piecewise-constant), so the result is exact for the
    interpolant up to rounding.
    """
    t = as_time_grid(t_grid)
    s0 = _check_s0(s0)
    X.check_covers(np.concatenate([[0.0], t]))
    inner = X.times[(X.times > 0.0) & (X.times < t[-1])]
    nodes = np.union1d(np.union1d([0.0], t), inner)
    k = params.k
    forcing = k * (1.0 + params.delta) * X(nodes)
    s = propagate_linear(-k, forcing, nodes, s0, X.interpolation)
    return SentimentPath(t, s[np.searchsorted(nodes, t)])


def sentiment_rk4(params: KineticParams, X: ForcingPath, s0: float, t_grid) -> SentimentPath:
    """Integrate ds/dt = k (X(t)(1+delta) - s) with classical RK4."""
    t = as_time_grid(t_grid)
    s0 = _check_s0(s0)
    X.check_covers(t)
    k, premium = params.k, 1.0 + params.delta

    def rhs(tt, s):
        return k * (X(tt) * premium - s)

    return SentimentPath(t, rk4(rhs, [s0], t)[:, 0])


def gamma_coefficient(params: KineticParams, variant: Variant = "corrected") -> tuple[float, str]:
    """Linear growth rate of the variance equation and the regime it implies."""
    base = params.beta * (params.q**2 - 2.0 * params.q)
    if variant == "corrected":
        gamma = -2.0 * params.alpha + base
    elif variant == "paper":
        gamma = 2.0 * params.alpha + base
    else:
        raise InvalidParameter(f"unknown variant {variant!r}")
    return gamma, ("unstable" if gamma > 0 else "stable")


def _variance_forcing(params: KineticParams, s, X, variant: Variant):
    q, beta = params.q, params.beta
    target = np.asarray(X, dtype=float) * (1.0 + params.delta)
    s = np.asarray(s, dtype=float)
    if variant == "corrected":
        return beta * q * q * (s - target) ** 2
    return (
        beta * (q * q - 2.0 * q) * s * s
        + 2.0 * beta * q * (1.0 - 2.0 * q) * target * s
        + beta * q * q * target * target
    )


def variance_rhs(params: KineticParams, V: float, s: float, X: float, variant: Variant = "corrected") -> float:
    gamma, _ = gamma_coefficient(params, variant)
    return float(gamma * V + _variance_forcing(params, s, X, variant))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _variance_closed(params, s, x, t, V0, gamma, variant):
    h = np.diff(t)[:, None]
    tau = 0.5 * h * (_GL_NODES[None, :] + 1.0)
    w = 0.5 * h * _GL_WEIGHTS[None, :]
    k, premium = params.k, 1.0 + params.delta
    xa, xb = x[:-1, None], x[1:, None]
    slope = (xb - xa) / h
    z = -k * tau
    phi1, phi2 = (p.reshape(tau.shape) for p in _phi(z.ravel(), 2))
    s_tau = np.exp(z) * s[:-1, None] + k * premium * (xa * tau * phi1 + slope * tau * tau * phi2)
    x_tau = xa + slope * tau
    inc = np.sum(w * np.exp(gamma * (h - tau)) * _variance_forcing(params, s_tau, x_tau, variant), axis=1)
    growth = np.exp(gamma * h[:, 0])
    v = np.empty(t.size)
    v[0] = V0
    for i in range(t.size - 1):
        v[i + 1] = growth[i] * v[i] + inc[i]
    return v


def variance_solve(
    params: KineticParams,
    s_path: SentimentPath,
    X: ForcingPath,
    V0: float,
    t_grid=None,
    variant: Variant = "corrected",
    method: Literal["closed", "rk4"] = "closed",
) -> VariancePath:
    """Variance along ``t_grid`` (defaults to the sentiment grid).

    ``closed`` applies the integrating factor e^{gamma t}; on each step the
    sentiment is continued exactly from its grid value (index linear on the
    step) and the forcing integral uses 4-point Gauss-Legendre. ``rk4``
    integrates sentiment and variance jointly from s_path's first value,
    independent of the rest of ``s_path``.
    """
    if V0 < 0:
        raise InvalidParameter("V0 must be nonnegative")
    if variant not in VARIANTS:
        raise InvalidParameter(f"unknown variant {variant!r}")
    t = s_path.t_grid if t_grid is None else as_time_grid(t_grid)
    X.check_covers(t)
    gamma, _ = gamma_coefficient(params, variant)

    if method == "closed":
        if t.shape != s_path.t_grid.shape or not np.allclose(t, s_path.t_grid, rtol=0, atol=1e-12):
            raise InvalidParameter("closed-form variance needs s_path on the same grid")
        v = _variance_closed(params, s_path.s_values, X(t), t, float(V0), gamma, variant)
    elif method == "rk4":
        k, premium = params.k, 1.0 + params.delta

        def rhs(tt, y):
            xt = X(tt)
            return np.array(
                [k * (xt * premium - y[0]), gamma * y[1] + _variance_forcing(params, y[0], xt, variant)]
            )

        v = rk4(rhs, [s_path.s_values[0], V0], t)[:, 1]
    else:
        raise InvalidParameter(f"unknown method {method!r}")
    return VariancePath(t, v, variant)
