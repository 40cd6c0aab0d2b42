"""Grid solver for the integral form of the kinetic equation.

Writing the transport as characteristics x_c(theta) that relax toward the
mean sentiment, the density solves f = F(f_in) + T f with

    F(t, x)  = e^{(alpha-beta) t} f_in(xi) 1[xi >= 0],   xi = e^{alpha t}(x - U(t))
    T g(t, x) = beta/(1-q) int_0^t e^{(alpha-beta)(t-theta)}
                g(theta, eta) 1[eta >= 0] dtheta,
    eta = (x_c(theta) - q Y(theta)) / (1-q),   x_c(theta) = e^{-alpha theta} xi + U(theta)

where Y = X (1+delta) and U(t) = alpha int_0^t s e^{-alpha(t-theta)} dtheta.
The gain is evaluated along the characteristic through (t, x); for
alpha = 0 the characteristic is the vertical line x_c = x.

For a fixed label xi the time integral is a scalar linear recursion, so each
application of T costs O(time slices x grid points): the integrand is
sampled on a label grid, propagated with exact exponential weights (linear
in time between slices) and interpolated back to the x grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import lfilter

from ..errors import GridTooCoarse, InvalidParameter, NotConverged
from .distribution import GridDistribution, moments_of
from .moments import SentimentPath, sentiment_closed_form
from .params import KineticParams
from .paths import ForcingPath, _phi, propagate_linear


def neumann_norm_bound(params: KineticParams, T: float, n: int) -> float:
    """(beta T / (1-q))^n / n!, the bound on the n-th iterate relative to its seed."""
    if n < 0:
        raise InvalidParameter("n must be nonnegative")
    if T < 0:
        raise InvalidParameter("T must be nonnegative")
    c = params.beta * T / (1.0 - params.q)
    if c == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(c) - math.lgamma(n + 1))


def _drift_center(params: KineticParams, times: np.ndarray, s_values: np.ndarray) -> np.ndarray:
    if params.alpha == 0.0:
        return np.zeros_like(times)
    return propagate_linear(-params.alpha, params.alpha * s_values, times, 0.0)


def _support_width(f: np.ndarray, h: float, rel: float = 1e-6) -> float:
    idx = np.flatnonzero(f > rel * float(np.max(f)))
    return 0.0 if idx.size == 0 else float((idx[-1] - idx[0]) * h)


def transported_initial(
    f_in: GridDistribution, params: KineticParams, s_path: SentimentPath, t: float
) -> GridDistribution:
    """Initial density carried along the drift characteristics to time ``t``.

    ``s_path`` must start at 0 and reach ``t``; the drift center is integrated
    from it with s linear between its nodes.
    """
    if t < 0:
        raise InvalidParameter("t must be nonnegative")
    ts, sv = s_path.t_grid, s_path.s_values
    if ts[0] != 0.0 or t > ts[-1] * (1 + 1e-12):
        raise InvalidParameter("s_path must cover [0, t]")
    nodes = np.union1d(ts[ts < t], [t])
    U = float(_drift_center(params, nodes, np.interp(nodes, ts, sv))[-1])
    x = f_in.x_grid
    _check_resolution(f_in, params, t)
    xi = math.exp(params.alpha * t) * (x - U)
    vals = math.exp((params.alpha - params.beta) * t) * np.interp(xi, x, f_in.f_values, left=0.0, right=0.0)
    return GridDistribution(x, vals, float(t))


def _check_resolution(f_in: GridDistribution, params: KineticParams, t: float) -> None:
    width = _support_width(f_in.f_values, f_in.h)
    if width > 0 and width * math.exp(-params.alpha * t) < 2.0 * f_in.h:
        raise GridTooCoarse(
            f"drift contracts the initial support to {width * math.exp(-params.alpha * t):.3g}, "
            f"below two grid cells ({2 * f_in.h:.3g})"
        )


class GainOperator:
    """The linear gain operator T on stacked time slices (M+1, J)."""

    def __init__(
        self,
        params: KineticParams,
        X: ForcingPath,
        times: np.ndarray,
        x_grid: np.ndarray,
        s_values: np.ndarray,
    ) -> None:
        self.params = params
        self.times = np.asarray(times, dtype=float)
        self.x_grid = np.asarray(x_grid, dtype=float)
        h_t = np.diff(self.times)
        if not np.allclose(h_t, h_t[0], rtol=1e-9, atol=0.0):
            raise InvalidParameter("time slices must be uniform")
        self.dt = float(h_t[0])
        alpha, q = params.alpha, params.q
        self.Y = X(self.times) * (1.0 + params.delta)
        x_max = float(self.x_grid[-1])
        if np.any(self.Y > x_max):
            raise GridTooCoarse("premium-adjusted index exceeds the grid; enlarge x_max")
        self.U = _drift_center(params, self.times, np.asarray(s_values, dtype=float))

        if alpha == 0.0:
            self.labels = self.x_grid
        else:
            grow = np.exp(alpha * self.times)
            lo = float(np.min(grow * (0.0 - self.U)))
            hi = float(np.max(grow * (x_max - self.U)))
            hx = float(self.x_grid[1] - self.x_grid[0])
            n = int(math.ceil((hi - lo) / hx)) + 1
            self.labels = lo + hx * np.arange(n)
        # positions of the label grid at each slice and their gain arguments
        self.positions = np.exp(-alpha * self.times)[:, None] * self.labels[None, :] + self.U[:, None]
        self.eta = (self.positions - q * self.Y[:, None]) / (1.0 - q)

        z = (alpha - params.beta) * self.dt
        self.decay = math.exp(z)
        p1, p2 = (float(v[0]) for v in _phi(np.array([z]), 2))
        self.w0 = self.dt * (p1 - p2)
        self.w1 = self.dt * p2

    def apply(self, g: np.ndarray) -> np.ndarray:
        x = self.x_grid
        gain = self.params.beta / (1.0 - self.params.q)
        psi = np.empty(self.positions.shape)
        for m in range(self.times.size):
            psi[m] = np.interp(self.eta[m], x, g[m], left=0.0, right=0.0)
        psi *= gain
        inc = self.w0 * psi[:-1] + self.w1 * psi[1:]
        G = np.zeros_like(psi)
        G[1:] = lfilter([1.0], [1.0, -self.decay], inc, axis=0)
        if self.params.alpha == 0.0:
            return G
        out = np.empty((self.times.size, x.size))
        for m in range(self.times.size):
            out[m] = np.interp(x, self.positions[m], G[m], left=0.0, right=0.0)
        return out


@dataclass(frozen=True, eq=False)
class NeumannResult:
    times: np.ndarray
    x_grid: np.ndarray
    f: np.ndarray
    forcing: np.ndarray
    term_norms: np.ndarray
    n_terms: int
    converged: bool
    lost_mass: float
    s_path: SentimentPath
    operator: GainOperator

    def slice(self, m: int) -> GridDistribution:
        return GridDistribution(self.x_grid, self.f[m], float(self.times[m]))

    @property
    def final(self) -> GridDistribution:
        return self.slice(self.times.size - 1)

    def masses(self) -> np.ndarray:
        return trapezoid(self.f, self.x_grid, axis=1)


def neumann_solve(
    params: KineticParams,
    X: ForcingPath,
    f_in: GridDistribution,
    T: float,
    tol: float = 1e-8,
    n_max: int = 200,
    n_t: int | None = None,
) -> NeumannResult:
    """Partial sums of sum_n T^n F(f_in) on ``n_t`` + 1 uniform time slices of [0, T].

    Summation stops once the sup-norm of the newest term falls below
    ``tol * ||f_in||_sup``. Raises NotConverged if ``n_max`` terms are not
    enough; ``n_max = 0`` returns the transported initial density.
    """
    if T <= 0:
        raise InvalidParameter("horizon T must be positive")
    if n_max < 0:
        raise InvalidParameter("n_max must be nonnegative")
    if n_t is None:
        n_t = max(50, int(math.ceil(200 * T)))
    if n_t < 1:
        raise InvalidParameter("need at least one time step")
    times = np.linspace(0.0, T, n_t + 1)
    X.check_covers(times)
    mom = moments_of(f_in)
    s_path = sentiment_closed_form(params, X, mom.mean, times)
    _check_resolution(f_in, params, float(T))

    op = GainOperator(params, X, times, f_in.x_grid, s_path.s_values)
    x = f_in.x_grid
    xi = np.exp(params.alpha * times)[:, None] * (x[None, :] - op.U[:, None])
    forcing = np.exp((params.alpha - params.beta) * times)[:, None] * np.interp(
        xi, x, f_in.f_values, left=0.0, right=0.0
    )

    ref = float(np.max(np.abs(f_in.f_values)))
    total = forcing.copy()
    term = forcing
    norms = [float(np.max(np.abs(term)))]
    converged = n_max == 0 or norms[0] < tol * ref
    n = 0
    while not converged and n < n_max:
        term = op.apply(term)
        n += 1
        total += term
        norms.append(float(np.max(np.abs(term))))
        converged = norms[-1] < tol * ref
    if not converged:
        raise NotConverged(f"Neumann series term {n} has norm {norms[-1]:.3g} > {tol * ref:.3g}")

    masses = trapezoid(total, x, axis=1)
    return NeumannResult(
        times=times,
        x_grid=x,
        f=total,
        forcing=forcing,
        term_norms=np.array(norms),
        n_terms=n,
        converged=True,
        lost_mass=float(masses[0] - masses[-1]),
        s_path=s_path,
        operator=op,
    )


def fixed_point_residual(result: NeumannResult) -> float:
    """sup |f - F(f_in) - T f| over all slices."""
    return float(np.max(np.abs(result.f - result.forcing - result.operator.apply(result.f))))
