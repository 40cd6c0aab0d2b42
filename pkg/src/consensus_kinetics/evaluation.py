"""Out-of-sample accuracy of the sentiment forecast against a cointegration baseline."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .calibration import CalibrationResult
from .econometrics.cointegration import EngleGrangerResult
from .errors import EmptySeries, NonPositiveValue, ZeroDenominator
from .timeseries import TimeSeries, align, write_csv


@dataclass(frozen=True)
class ErrorSummary:
    mean: float
    median: float
    std_error: float
    n: int
    max_abs: float

    def to_dict(self) -> dict:
        return asdict(self)


def relative_error_series(forecast: TimeSeries, measured: TimeSeries) -> TimeSeries:
    """Signed (forecast - measured) / measured on the common dates."""
    f, m = align(forecast, measured)
    if np.any(m.values == 0):
        raise ZeroDenominator("measured series contains zeros")
    return TimeSeries(f.dates, (f.values - m.values) / m.values, "relative_error")


def error_summary(err: TimeSeries | np.ndarray) -> ErrorSummary:
    """Mean, median, standard error of the mean (n-1 normalization) and max |e|.

    A single observation has standard error 0.
    """
    e = err.values if isinstance(err, TimeSeries) else np.asarray(err, dtype=float)
    n = int(e.size)
    if n == 0:
        raise EmptySeries("no errors to summarize")
    se = float(np.std(e, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ErrorSummary(float(np.mean(e)), float(np.median(e)), se, n, float(np.max(np.abs(e))))


def baseline_cointegration_forecast(eg: EngleGrangerResult | tuple[float, float], X: TimeSeries) -> TimeSeries:
    """exp(slope * ln X + intercept), the long-run relation fitted in logs."""
    slope, intercept = (
        (eg.longrun_slope, eg.longrun_intercept) if isinstance(eg, EngleGrangerResult) else map(float, eg)
    )
    if np.any(X.values <= 0):
        raise NonPositiveValue("index must be positive for the log-linear baseline")
    return TimeSeries(X.dates, np.exp(slope * np.log(X.values) + intercept), "baseline")


def report(
    calib: CalibrationResult,
    measured: TimeSeries,
    forecast: TimeSeries | None = None,
    baseline: TimeSeries | None = None,
    out_dir: str | Path | None = None,
) -> dict:
    """Report document; with ``out_dir`` also writes report.json and one CSV per curve.

    ``model_errors`` / ``baseline_errors`` are present only when the
    corresponding forecast is supplied. File paths are relative to ``out_dir``.
    """
    p = calib.params
    doc: dict = {"params": {"q": p.q, "beta": p.beta, "delta": p.delta, "k": calib.k}}
    curves: list[tuple[str, TimeSeries]] = [("measured", measured)]
    if forecast is not None:
        err = relative_error_series(forecast, measured)
        doc["model_errors"] = error_summary(err).to_dict()
        curves += [("model_forecast", forecast), ("model_relative_error", err)]
    if baseline is not None:
        err = relative_error_series(baseline, measured)
        doc["baseline_errors"] = error_summary(err).to_dict()
        curves += [("baseline_forecast", baseline), ("baseline_relative_error", err)]
    files = [f"{name}.csv" for name, _ in curves]
    doc["files"] = files
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for (_, ts), fname in zip(curves, files):
            write_csv(ts, out / fname)
        (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return doc
