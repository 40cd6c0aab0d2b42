"""Kinetic model of analysts' consensus sentiment and its econometric benchmarks."""

__version__ = "0.1.0"

from .calibration import (
    CalibrationConfig,
    CalibrationProblem,
    CalibrationResult,
    Candidate,
    calibrate,
    global_search,
    local_refine,
    objective,
)
from .evaluation import (
    ErrorSummary,
    baseline_cointegration_forecast,
    error_summary,
    relative_error_series,
    report,
)
from .kinetic import (
    ForcingPath,
    GridDistribution,
    KineticParams,
    ParticleEnsemble,
    neumann_norm_bound,
    neumann_solve,
    particle_simulate,
    sentiment_closed_form,
    sentiment_rk4,
    variance_solve,
)
from .timeseries import TimeSeries, load_csv, write_csv
