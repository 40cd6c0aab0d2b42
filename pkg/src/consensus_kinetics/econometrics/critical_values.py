"""Hard-coded critical values for the tests reported at fixed levels."""

from __future__ import annotations

from ..errors import InvalidParameter

LEVELS = ("1%", "5%", "10%")

# Dickey-Fuller tau, asymptotic
DF_CRITICAL = {
    "none": {"1%": -2.58, "5%": -1.95, "10%": -1.62},
    "constant": {"1%": -3.43, "5%": -2.86, "10%": -2.57},
    "trend": {"1%": -3.96, "5%": -3.41, "10%": -3.12},
}

# bivariate Johansen rank test, restricted constant; keyed by hypothesis.
# The r=0 row is the maximum-eigenvalue quantile, the r<=1 row serves both
# statistics (they coincide for the last eigenvalue).
JOHANSEN_TRACE_CRITICAL = {
    "r=0": {"10%": 13.75, "5%": 15.67, "1%": 20.20},
    "r<=1": {"10%": 7.52, "5%": 9.24, "1%": 12.97},
}


def level_key(level) -> str:
    """Normalize 0.05, 5, '5%' or '0.05' to '5%'."""
    if isinstance(level, str):
        s = level.strip()
        if s in LEVELS:
            return s
        try:
            level = float(s.rstrip("%")) / (100.0 if s.endswith("%") else 1.0)
        except ValueError as exc:
            raise InvalidParameter(f"unknown significance level {level!r}") from exc
    level = float(level)
    if level >= 1.0:
        level /= 100.0
    for key in LEVELS:
        if abs(float(key[:-1]) / 100.0 - level) < 1e-12:
            return key
    raise InvalidParameter(f"significance level must be one of {LEVELS}, got {level}")
