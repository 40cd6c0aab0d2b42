"""Two representations of the opinion density f(t, x) and their moments."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from ..errors import EmptyEnsemble, InvalidParameter


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    """Empirical density: one nonnegative forecast per agent."""

    positions: np.ndarray
    time: float = 0.0
    seed_state: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.positions, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise EmptyEnsemble("an ensemble needs at least one particle")
        if np.any(x < 0) or not np.all(np.isfinite(x)):
            raise InvalidParameter("particle positions must be finite and nonnegative")
        object.__setattr__(self, "positions", x)

    def __len__(self) -> int:
        return int(self.positions.size)


@dataclass(frozen=True, eq=False)
class GridDistribution:
    """Density sampled on a uniform grid over [0, x_max]."""

    x_grid: np.ndarray
    f_values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        x = np.asarray(self.x_grid, dtype=float)
        f = np.asarray(self.f_values, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 3:
            raise InvalidParameter("grid and values must be equal-length 1-d arrays (>= 3 points)")
        if x[0] != 0.0 or not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9):
            raise InvalidParameter("x_grid must be uniform and start at 0")
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "f_values", f)

    @property
    def h(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def x_max(self) -> float:
        return float(self.x_grid[-1])


class Moments(NamedTuple):
    m0: float
    m1: float
    m2: float
    mean: float
    variance: float


def moments_of(dist: GridDistribution | ParticleEnsemble) -> Moments:
    """Zeroth to second moments plus mean and variance.

    Grids use the trapezoid rule. Ensembles count each particle with unit
    mass, so m0 is the particle count and the variance is the population one.
    """
    if isinstance(dist, ParticleEnsemble):
        x = dist.positions
        if x.size == 0:
            raise EmptyEnsemble("empty ensemble")
        mean = float(x.mean())
        return Moments(float(x.size), float(x.sum()), float(np.dot(x, x)), mean, float(np.mean((x - mean) ** 2)))
    x, f = dist.x_grid, dist.f_values
    m0 = float(trapezoid(f, x))
    if m0 <= 0:
        raise EmptyEnsemble("grid distribution carries no mass")
    m1 = float(trapezoid(x * f, x))
    m2 = float(trapezoid(x * x * f, x))
    mean = m1 / m0
    variance = float(trapezoid((x - mean) ** 2 * f, x)) / m0
    return Moments(m0, m1, m2, mean, variance)


def make_grid(x_max: float, n_points: int = 2048) -> np.ndarray:
    if x_max <= 0 or n_points < 3:
        raise InvalidParameter("need x_max > 0 and at least 3 grid points")
    return np.linspace(0.0, x_max, n_points)


def default_x_max(X_values, delta: float) -> float:
    return 4.0 * float(np.max(X_values)) * (1.0 + delta)


def _lognormal_shape(mean: float, rel_width: float) -> tuple[float, float]:
    if mean <= 0 or rel_width <= 0:
        raise InvalidParameter("lognormal needs positive mean and relative width")
    sigma2 = math.log1p(rel_width**2)
    return math.log(mean) - 0.5 * sigma2, math.sqrt(sigma2)


def lognormal_density(x_grid: np.ndarray, mean: float, rel_width: float = 0.1, mass: float = 1.0) -> GridDistribution:
    """Lognormal density with the given mean and coefficient of variation."""
    mu, sigma = _lognormal_shape(mean, rel_width)
    x = np.asarray(x_grid, dtype=float)
    f = np.zeros_like(x)
    pos = x > 0
    lx = np.log(x[pos])
    f[pos] = mass * np.exp(-((lx - mu) ** 2) / (2 * sigma**2)) / (x[pos] * sigma * math.sqrt(2 * math.pi))
    return GridDistribution(x, f, 0.0)


def lognormal_ensemble(n: int, mean: float, rel_width: float = 0.1, seed: int = 0) -> ParticleEnsemble:
    if n < 1:
        raise EmptyEnsemble("need at least one particle")
    mu, sigma = _lognormal_shape(mean, rel_width)
    rng = np.random.Generator(np.random.Philox(seed))
    return ParticleEnsemble(rng.lognormal(mu, sigma, n), 0.0, seed)


def write_snapshot(path: str | Path, values: np.ndarray, index: np.ndarray, index_name: str, meta: dict) -> Path:
    """CSV of (index, value) plus a JSON sidecar ``<path>.json`` with ``meta``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([index_name, "value"])
        for i, v in zip(index, values):
            w.writerow([repr(i.item() if hasattr(i, "item") else i), repr(float(v))])
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return path
