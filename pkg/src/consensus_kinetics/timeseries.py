"""Dated scalar series: ingestion, transforms, alignment, splitting, and
synthetic generators.

Dates are treated as opaque ordered labels (``numpy.datetime64[D]``). Model
time between consecutive observations is a constant ``dt`` in years, one
trading day (1/252) by default.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import (
    BoundaryOutOfRange,
    EmptyIntersection,
    InvalidParameter,
    MissingColumn,
    NonFiniteValue,
    NonMonotoneDates,
    NonPositiveValue,
    SeriesTooShort,
    UnparsableDate,
)

if TYPE_CHECKING:
    from .kinetic.params import KineticParams

TRADING_DAYS_PER_YEAR = 252
DEFAULT_DT = 1.0 / TRADING_DAYS_PER_YEAR
DEFAULT_START = "2009-05-26"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    dates: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        if dates.ndim != 1 or values.ndim != 1:
            raise InvalidParameter("dates and values must be one-dimensional")
        if dates.size != values.size:
            raise InvalidParameter(
                f"dates ({dates.size}) and values ({values.size}) differ in length"
            )
        if dates.size == 0:
            raise SeriesTooShort("a TimeSeries needs at least one observation")
        if np.any(np.diff(dates).astype(np.int64) <= 0):
            raise NonMonotoneDates("dates must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise NonFiniteValue("values must be finite")
        dates.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.values, other.values)
        )

    def with_values(self, values: np.ndarray, label: str | None = None) -> "TimeSeries":
        return TimeSeries(self.dates, values, self.label if label is None else label)

    def times(self, dt: float = DEFAULT_DT) -> np.ndarray:
        """Model time in years of each observation, starting at 0."""
        return np.arange(len(self), dtype=float) * dt


@dataclass(frozen=True)
class SplitSpec:
    boundary_date: np.datetime64 = field()

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary_date", _parse_date(self.boundary_date))


def _parse_date(raw) -> np.datetime64:
    try:
        if isinstance(raw, str):
            raw = raw.strip()
        return np.datetime64(raw, "D")
    except (ValueError, TypeError) as exc:
        raise UnparsableDate(f"cannot parse date {raw!r}") from exc


# -- I/O --------------------------------------------------------------------


def load_csv(
    path: str | Path, date_col: str = "date", value_col: str = "value", label: str | None = None
) -> TimeSeries:
    """Read a ``date,value`` CSV (ISO-8601 dates) into a TimeSeries."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (date_col, value_col):
            if col not in header:
                raise MissingColumn(f"{path}: column {col!r} not in header {header}")
        dates, values = [], []
        for lineno, row in enumerate(reader, start=2):
            dates.append(_parse_date(row[date_col]))
            try:
                v = float(row[value_col])
            except (TypeError, ValueError) as exc:
                raise NonFiniteValue(f"{path}:{lineno}: bad value {row[value_col]!r}") from exc
            if not math.isfinite(v):
                raise NonFiniteValue(f"{path}:{lineno}: non-finite value {row[value_col]!r}")
            values.append(v)
    if not dates:
        raise SeriesTooShort(f"{path}: no rows")
    d = np.array(dates, dtype="datetime64[D]")
    if np.any(np.diff(d).astype(np.int64) <= 0):
        raise NonMonotoneDates(f"{path}: dates are not strictly increasing (or repeat)")
    return TimeSeries(d, np.array(values), label if label is not None else path.stem)


def write_csv(ts: TimeSeries, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "value"])
        for d, v in zip(ts.dates, ts.values):
            writer.writerow([str(d), repr(float(v))])
    return path


# -- transforms -------------------------------------------------------------


def log_series(ts: TimeSeries) -> TimeSeries:
    if np.any(ts.values <= 0):
        raise NonPositiveValue("log of a series with non-positive values")
    return ts.with_values(np.log(ts.values))


def diff_series(ts: TimeSeries, lag: int = 1) -> TimeSeries:
    if lag < 1:
        raise InvalidParameter("lag must be a positive integer")
    if len(ts) <= lag:
        raise SeriesTooShort(f"series of length {len(ts)} cannot be differenced at lag {lag}")
    return TimeSeries(ts.dates[lag:], ts.values[lag:] - ts.values[:-lag], ts.label)


def align(a: TimeSeries, b: TimeSeries) -> tuple[TimeSeries, TimeSeries]:
    """Inner join on dates."""
    common, ia, ib = np.intersect1d(a.dates, b.dates, assume_unique=True, return_indices=True)
    if common.size == 0:
        raise EmptyIntersection("series share no dates")
    return (
        TimeSeries(common, a.values[ia], a.label),
        TimeSeries(common, b.values[ib], b.label),
    )


def split(ts: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries]:
    """Train = dates <= boundary, test = dates > boundary; both must be nonempty."""
    mask = ts.dates <= spec.boundary_date
    n_train = int(mask.sum())
    if n_train == 0 or n_train == len(ts):
        raise BoundaryOutOfRange(
            f"boundary {spec.boundary_date} leaves an empty side "
            f"(range {ts.dates[0]}..{ts.dates[-1]})"
        )
    return (
        TimeSeries(ts.dates[:n_train], ts.values[:n_train], ts.label),
        TimeSeries(ts.dates[n_train:], ts.values[n_train:], ts.label),
    )


def business_dates(n: int, start: str = DEFAULT_START) -> np.ndarray:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(n), roll="forward")


# -- synthetic generators ---------------------------------------------------


def synth_gbm(
    x0: float,
    mu: float,
    sigma: float,
    n: int,
    dt: float = DEFAULT_DT,
    seed: int = 0,
    start: str = DEFAULT_START,
    label: str = "index",
) -> TimeSeries:
    """Geometric Brownian motion sampled every ``dt`` years, ``n`` points."""
    if not (x0 > 0 and sigma >= 0 and n >= 1 and dt > 0):
        raise InvalidParameter("synth_gbm needs x0 > 0, sigma >= 0, n >= 1, dt > 0")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n - 1)
    steps = (mu - 0.5 * sigma**2) * dt + sigma * math.sqrt(dt) * z
    log_path = math.log(x0) + np.concatenate([[0.0], np.cumsum(steps)])
    return TimeSeries(business_dates(n, start), np.exp(log_path), label)


def synth_cointegrated_pair(
    slope: float,
    intercept: float,
    rho: float,
    sigma_u: float,
    sigma_z: float,
    n: int,
    seed: int = 0,
    z0: float = 0.0,
    start: str = DEFAULT_START,
) -> tuple[TimeSeries, TimeSeries]:
    """z is a driftless random walk; y = slope*z + intercept + u, u ~ AR(1)(rho).

    ``sigma_u = 0`` is accepted and gives an exact linear relation.
    """
    if not (-1.0 < rho < 1.0):
        raise InvalidParameter("rho must lie in (-1, 1)")
    if sigma_u < 0 or sigma_z <= 0 or n < 2:
        raise InvalidParameter("need sigma_u >= 0, sigma_z > 0, n >= 2")
    rng = np.random.default_rng(seed)
    dz = rng.standard_normal(n) * sigma_z
    eps = rng.standard_normal(n) * sigma_u
    z = z0 + np.cumsum(dz)
    u = np.empty(n)
    # stationary start for u
    u[0] = eps[0] / math.sqrt(1.0 - rho * rho)
    for t in range(1, n):
        u[t] = rho * u[t - 1] + eps[t]
    y = slope * z + intercept + u
    dates = business_dates(n, start)
    return TimeSeries(dates, y, "y"), TimeSeries(dates, z, "z")


def synth_ecm_pair(
    gamma: float,
    slope: float = 1.0,
    intercept: float = 0.0,
    own_lags: Sequence[float] = (),
    cross_lags: Sequence[float] = (),
    sigma_y: float = 0.01,
    sigma_x: float = 0.01,
    n: int = 1000,
    seed: int = 0,
    burn: int = 200,
    start: str = DEFAULT_START,
) -> tuple[TimeSeries, TimeSeries]:
    """Pair from a known error-correction model.

    x is a driftless random walk; y follows

        dy_t = gamma*(y_{t-1} - slope*x_{t-1} - intercept)
               + sum_i own_lags[i]*dy_{t-1-i} + sum_j cross_lags[j]*dx_{t-1-j} + e_t
    """
    if not (-2.0 < gamma < 0.0):
        raise InvalidParameter("gamma must lie in (-2, 0) for a stable error correction")
    if sigma_y <= 0 or sigma_x <= 0 or n < 10:
        raise InvalidParameter("need positive noise scales and n >= 10")
    rng = np.random.default_rng(seed)
    total = n + burn
    ex = rng.standard_normal(total) * sigma_x
    ey = rng.standard_normal(total) * sigma_y
    a = np.asarray(own_lags, dtype=float)
    b = np.asarray(cross_lags, dtype=float)
    x = np.zeros(total)
    y = np.full(total, intercept)
    dx = np.zeros(total)
    dy = np.zeros(total)
    for t in range(1, total):
        dx[t] = ex[t]
        x[t] = x[t - 1] + dx[t]
        acc = gamma * (y[t - 1] - slope * x[t - 1] - intercept) + ey[t]
        for i, ai in enumerate(a):
            if t - 1 - i >= 0:
                acc += ai * dy[t - 1 - i]
        for j, bj in enumerate(b):
            if t - 1 - j >= 0:
                acc += bj * dx[t - 1 - j]
        dy[t] = acc
        y[t] = y[t - 1] + dy[t]
    dates = business_dates(n, start)
    return TimeSeries(dates, y[burn:], "y"), TimeSeries(dates, x[burn:], "x")


def synth_sentiment(
    params: "KineticParams",
    X: TimeSeries,
    s0: float,
    noise_sigma: float = 0.0,
    seed: int = 0,
    dt: float = DEFAULT_DT,
    relative: bool = False,
    label: str = "consensus",
) -> TimeSeries:
    """Noiseless consensus from the closed-form sentiment, plus Gaussian noise.

    With ``relative=True`` the noise standard deviation is ``noise_sigma``
    times the noiseless level at each date.
    """
    from .kinetic.moments import sentiment_closed_form
    from .kinetic.paths import ForcingPath

    if s0 <= 0 or noise_sigma < 0:
        raise InvalidParameter("need s0 > 0 and noise_sigma >= 0")
    path = ForcingPath.from_series(X, dt)
    s = sentiment_closed_form(params, path, s0, path.times).s_values
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        scale = noise_sigma * s if relative else noise_sigma
        s = s + scale * rng.standard_normal(s.size)
    return TimeSeries(X.dates, s, label)
