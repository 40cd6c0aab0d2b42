"""Continuous-time views of observed series and linear-ODE propagators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.signal import lfilter

from ..errors import InvalidParameter, PathTooShort
from ..timeseries import DEFAULT_DT, TimeSeries

Interpolation = Literal["linear", "constant"]


@dataclass(frozen=True, eq=False)
class ForcingPath:
    """Index level X(t) on knots ``times`` (years), interpolated between them."""

    times: np.ndarray
    values: np.ndarray
    interpolation: Interpolation = "linear"

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 1:
            raise InvalidParameter("times and values must be equal-length 1-d arrays")
        if np.any(np.diff(t) <= 0):
            raise InvalidParameter("forcing knots must be strictly increasing")
        if self.interpolation not in ("linear", "constant"):
            raise InvalidParameter(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_series(
        cls, ts: TimeSeries, dt: float = DEFAULT_DT, interpolation: Interpolation = "linear"
    ) -> "ForcingPath":
        return cls(ts.times(dt), ts.values, interpolation)

    @classmethod
    def constant(cls, level: float, t_end: float) -> "ForcingPath":
        return cls(np.array([0.0, float(t_end)]), np.array([level, level]))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], t_grid) -> "ForcingPath":
        t = np.asarray(t_grid, dtype=float)
        return cls(t, np.asarray(fn(t), dtype=float))

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.interpolation == "linear":
            return np.interp(t, self.times, self.values)
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 1)
        return self.values[idx]

    def check_covers(self, t_grid: np.ndarray) -> None:
        if t_grid.size == 0:
            raise PathTooShort("empty time grid")
        lo, hi = float(t_grid[0]), float(t_grid[-1])
        tol = 1e-9 * max(1.0, abs(hi))
        if lo < self.times[0] - tol or hi > self.times[-1] + tol:
            raise PathTooShort(
                f"forcing covers [{self.times[0]}, {self.times[-1]}], grid needs [{lo}, {hi}]"
            )


def as_time_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise PathTooShort("time grid must be a nonempty 1-d array")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise InvalidParameter("time grid must be nonnegative and strictly increasing")
    return t


def _phi(z, order: int) -> list[np.ndarray]:
    """phi_j(z) = sum_m z^m / (m+j)! for j = 1..order, stable for all z.

    ``h**(j+1) * j! * phi_{j+1}(a*h)`` is the integral of e^{a(h-u)} u^j over [0, h].
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = [np.empty_like(z) for _ in range(order)]
    small = np.abs(z) < 1.0
    zs = z[small]
    fact = [math.factorial(i) for i in range(order + 26)]
    for j in range(1, order + 1):
        acc = np.zeros_like(zs)
        for m in range(24, -1, -1):
            acc = acc * zs + 1.0 / fact[m + j]
        out[j - 1][small] = acc
    zb = z[~small]
    prev = np.exp(zb)  # phi_0
    for j in range(1, order + 1):
        prev = (prev - 1.0 / fact[j - 1]) / zb
        out[j - 1][~small] = prev
    return out


def propagate_linear(
    rate: float,
    forcing: np.ndarray,
    nodes: np.ndarray,
    y0: float,
    interpolation: str = "linear",
) -> np.ndarray:
    """Solve y' = rate*y + F(t) on ``nodes`` with F known at the nodes.

    Between nodes F is interpolated (``linear`` or left-held ``constant``)
    and the convolution with e^{rate*t} is integrated exactly for that
    interpolant. Returns y at every node, y[0] = y0.
    """
    h = np.diff(nodes)
    n = nodes.size
    if n == 1:
        return np.array([float(y0)])
    z = rate * h
    growth = np.exp(z)
    phi1, phi2 = _phi(z, 2)
    if interpolation == "constant":
        inc = h * phi1 * forcing[:-1]
    elif interpolation == "linear":
        inc = h * ((phi1 - phi2) * forcing[:-1] + phi2 * forcing[1:])
    else:
        raise InvalidParameter(f"unknown interpolation {interpolation!r}")
    if np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        c = float(growth[0])
        out = lfilter([1.0], [1.0, -c], inc, zi=[c * y0])[0]
    else:
        out = np.empty(n - 1)
        y = float(y0)
        for i in range(n - 1):
            y = growth[i] * y + inc[i]
            out[i] = y
    return np.concatenate([[float(y0)], out])


def rk4(rhs: Callable[[float, np.ndarray], np.ndarray], y0, t_grid: np.ndarray) -> np.ndarray:
    """Classical fourth-order Runge-Kutta on an arbitrary increasing grid."""
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    out = np.empty((t_grid.size, y.size))
    out[0] = y
    for i in range(t_grid.size - 1):
        t, h = t_grid[i], t_grid[i + 1] - t_grid[i]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return out
