"""Fit the kinetic mean-sentiment model to an observed consensus series.

The mean sentiment depends on (q, beta) only through k = q*beta, so the
search runs over (k, delta). The reported (q, beta) split fixes q at a
conventional value and is not determined by the data.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import InvalidBudget, InvalidParameter, MaxIterExceeded
from .kinetic.moments import sentiment_closed_form
from .kinetic.params import REFERENCE_Q, KineticParams
from .kinetic.paths import ForcingPath
from .timeseries import DEFAULT_DT, TimeSeries

RIDGE_NOTE = (
    "Only k = q*beta and delta are identified by the mean sentiment; "
    "(q, beta) is reported by fixing q = q_fixed and beta = k / q_fixed."
)
DEFAULT_BOUNDS = {"k": (0.01, 20.0), "delta": (-0.5, 1.0)}


def thread_count() -> int:
    raw = os.environ.get("CONSENSUS_KINETICS_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidParameter(f"CONSENSUS_KINETICS_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


@dataclass(frozen=True, eq=False)
class CalibrationProblem:
    X: TimeSeries
    s_meas: TimeSeries
    s0: float
    dt: float = DEFAULT_DT
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))

    def __post_init__(self) -> None:
        if len(self.X) != len(self.s_meas) or not np.array_equal(self.X.dates, self.s_meas.dates):
            raise InvalidParameter("X and s_meas must share identical dates")
        if not self.s0 > 0:
            raise InvalidParameter("s0 must be positive")
        if not self.dt > 0:
            raise InvalidParameter("dt must be positive")
        b = {**DEFAULT_BOUNDS, **self.bounds}
        (klo, khi), (dlo, dhi) = b["k"], b["delta"]
        if not (0 < klo < khi) or not (-1 < dlo < dhi):
            raise InvalidParameter("bounds need 0 < k_lo < k_hi and -1 < delta_lo < delta_hi")
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "_path", ForcingPath.from_series(self.X, self.dt))

    @property
    def times(self) -> np.ndarray:
        return self._path.times

    def sentiment(self, params: KineticParams) -> np.ndarray:
        return sentiment_closed_form(params, self._path, self.s0, self.times).s_values


@dataclass(frozen=True)
class Candidate:
    k: float
    delta: float
    objective: float


@dataclass(frozen=True)
class CalibrationConfig:
    budget: int = 500
    n_refine: int = 5
    tol: float = 1e-10
    max_iter: int = 2000
    seed: int = 0
    q_fixed: float = REFERENCE_Q

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise InvalidBudget(f"budget must be at least 1, got {self.budget}")
        if self.n_refine < 1:
            raise InvalidParameter("n_refine must be at least 1")
        if not 0 < self.q_fixed < 1:
            raise InvalidParameter("q_fixed must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    params: KineticParams
    k: float
    objective: float
    n_evaluations: int
    converged: bool
    restarts_used: int
    q_fixed: float = REFERENCE_Q

    @property
    def delta(self) -> float:
        return self.params.delta

    def to_dict(self) -> dict:
        return {
            "params": {
                "q": self.params.q,
                "beta": self.params.beta,
                "delta": self.params.delta,
                "k": self.k,
            },
            "objective": self.objective,
            "n_evaluations": self.n_evaluations,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "q_fixed": self.q_fixed,
            "ridge_note": RIDGE_NOTE,
        }


def params_from_k(k: float, delta: float, q_fixed: float = REFERENCE_Q) -> KineticParams:
    return KineticParams(q=q_fixed, beta=k / q_fixed, delta=delta)


def objective(params: KineticParams, problem: CalibrationProblem) -> float:
    """Euclidean distance between modeled and measured sentiment over all dates."""
    r = problem.sentiment(params) - problem.s_meas.values
    return float(math.sqrt(float(r @ r)))


def _objective_kd(problem: CalibrationProblem, k: float, delta: float) -> float:
    return objective(params_from_k(k, delta), problem)


def _evaluate_many(problem: CalibrationProblem, points: list[tuple[float, float]]) -> list[float]:
    workers = min(thread_count(), len(points))
    if workers <= 1:
        return [_objective_kd(problem, k, d) for k, d in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda kd: _objective_kd(problem, *kd), points))


def global_search(problem: CalibrationProblem, budget: int, seed: int = 0) -> list[Candidate]:
    """Latin-hypercube sample of (k, delta), ranked by objective (ascending).

    k is sampled uniformly in log scale across its bounds.
    """
    if budget < 1:
        raise InvalidBudget(f"budget must be at least 1, got {budget}")
    (klo, khi), (dlo, dhi) = problem.bounds["k"], problem.bounds["delta"]
    u = qmc.LatinHypercube(d=2, seed=np.random.default_rng(seed)).random(budget)
    ks = np.exp(math.log(klo) + u[:, 0] * (math.log(khi) - math.log(klo)))
    ds = dlo + u[:, 1] * (dhi - dlo)
    points = [(float(k), float(d)) for k, d in zip(ks, ds)]
    values = _evaluate_many(problem, points)
    order = sorted(range(budget), key=lambda i: (values[i], i))
    return [Candidate(points[i][0], points[i][1], values[i]) for i in order]


def _nelder_mead(fn, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray, step: np.ndarray, tol: float, max_iter: int):
    """Bounded simplex descent; returns (best point, best value, evaluations, converged)."""

    def proj(x):
        return np.minimum(np.maximum(x, lo), hi)

    n = x0.size
    simplex = [proj(x0)]
    for i in range(n):
        v = x0.copy()
        v[i] += step[i]
        if v[i] > hi[i]:
            v[i] = x0[i] - step[i]
        simplex.append(proj(v))
    simplex = np.array(simplex)
    fvals = np.array([fn(v) for v in simplex])
    n_eval = n + 1
    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        diam = max(float(np.max(np.abs(simplex[i] - simplex[0]))) for i in range(1, n + 1))
        if diam < tol:
            return simplex[0], float(fvals[0]), n_eval, True
        centroid = simplex[:-1].mean(axis=0)
        xr = proj(centroid + (centroid - simplex[-1]))
        fr = fn(xr)
        n_eval += 1
        if fr < fvals[0]:
            xe = proj(centroid + 2.0 * (centroid - simplex[-1]))
            fe = fn(xe)
            n_eval += 1
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = proj(centroid + 0.5 * (xr - centroid))
            else:
                xc = proj(centroid + 0.5 * (simplex[-1] - centroid))
            fc = fn(xc)
            n_eval += 1
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = proj(simplex[0] + 0.5 * (simplex[i] - simplex[0]))
                    fvals[i] = fn(simplex[i])
                n_eval += n
    best = int(np.argmin(fvals))
    return simplex[best], float(fvals[best]), n_eval, False


def local_refine(
    problem: CalibrationProblem,
    start: Candidate | tuple[float, float],
    tol: float = 1e-10,
    max_iter: int = 2000,
    q_fixed: float = REFERENCE_Q,
) -> CalibrationResult:
    """Nelder-Mead over (ln k, delta) from ``start``, projected onto the bounds.

    Stops when the simplex diameter (sup-norm, in the search coordinates)
    falls below ``tol``. On ``max_iter`` a MaxIterExceeded warning is issued
    and the best point is returned with converged=False.
    """
    k0, d0 = (start.k, start.delta) if isinstance(start, Candidate) else map(float, start)
    (klo, khi), (dlo, dhi) = problem.bounds["k"], problem.bounds["delta"]
    if not (klo <= k0 <= khi and dlo <= d0 <= dhi):
        raise InvalidParameter(f"start ({k0}, {d0}) lies outside the bounds")
    lo = np.array([math.log(klo), dlo])
    hi = np.array([math.log(khi), dhi])

    def fn(v):
        return _objective_kd(problem, math.exp(v[0]), v[1])

    x0 = np.array([math.log(k0), d0])
    f0 = fn(x0)
    best, fbest, n_eval, ok = _nelder_mead(fn, x0, lo, hi, np.array([0.1, 0.05]), tol, max_iter)
    n_eval += 1
    if f0 <= fbest:
        best, fbest = x0, f0
    if not ok:
        warnings.warn(MaxIterExceeded(f"simplex not converged after {max_iter} iterations"), stacklevel=2)
    k = float(math.exp(best[0]))
    params = params_from_k(k, float(best[1]), q_fixed)
    return CalibrationResult(params, k, objective(params, problem), n_eval, ok, 0, q_fixed)


def calibrate(problem: CalibrationProblem, config: CalibrationConfig | None = None) -> CalibrationResult:
    """Global Latin-hypercube search, then simplex refinement of the best few."""
    config = config or CalibrationConfig()
    cands = global_search(problem, config.budget, config.seed)
    n_eval = len(cands)
    best: CalibrationResult | None = None
    tops = cands[: config.n_refine]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MaxIterExceeded)
        for cand in tops:
            res = local_refine(problem, cand, config.tol, config.max_iter, config.q_fixed)
            n_eval += res.n_evaluations
            if best is None or res.objective < best.objective:
                best = res
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    assert best is not None
    return CalibrationResult(
        best.params, best.k, best.objective, n_eval, best.converged, len(tops), config.q_fixed
    )
