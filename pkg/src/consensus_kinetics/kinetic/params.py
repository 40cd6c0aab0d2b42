from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import InvalidParameter
from ..timeseries import DEFAULT_DT

# Calibrated values reported for the S&P 500 training window (2009-2016).
REFERENCE_Q = 0.28
REFERENCE_BETA = 6.05
REFERENCE_DELTA = 0.143


@dataclass(frozen=True)
class KineticParams:
    """Constants of the kinetic opinion model.

    q      attractiveness weight of the premium-adjusted index in one jump, in (0, 1)
    beta   jump rate per year (> 0)
    delta  relative premium applied to the index level (> -1)
    alpha  strength of the drift toward the population mean, per year (>= 0)
    """

    q: float
    beta: float
    delta: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        for name in ("q", "beta", "delta", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if not 0.0 < self.q < 1.0:
            raise InvalidParameter(f"q must lie in (0, 1), got {self.q}")
        if self.beta <= 0.0:
            raise InvalidParameter(f"beta must be positive, got {self.beta}")
        if self.alpha < 0.0:
            raise InvalidParameter(f"alpha must be nonnegative, got {self.alpha}")
        if self.delta <= -1.0:
            raise InvalidParameter(f"delta must exceed -1, got {self.delta}")

    @property
    def k(self) -> float:
        """Relaxation rate q*beta of the mean sentiment."""
        return self.q * self.beta

    @classmethod
    def reference(cls, alpha: float = 0.0) -> "KineticParams":
        return cls(REFERENCE_Q, REFERENCE_BETA, REFERENCE_DELTA, alpha)

    def to_dict(self, dt_per_observation: float = DEFAULT_DT) -> dict:
        d = asdict(self)
        d["dt_per_observation"] = dt_per_observation
        return d


def params_from_dict(doc: dict) -> tuple[KineticParams, float]:
    try:
        params = KineticParams(
            q=float(doc["q"]),
            beta=float(doc["beta"]),
            delta=float(doc["delta"]),
            alpha=float(doc.get("alpha", 0.0)),
        )
    except KeyError as exc:
        raise InvalidParameter(f"parameter document lacks {exc.args[0]!r}") from exc
    return params, float(doc.get("dt_per_observation", DEFAULT_DT))


def save_params(path: str | Path, params: KineticParams, dt: float = DEFAULT_DT) -> Path:
    path = Path(path)
    path.write_text(json.dumps(params.to_dict(dt), indent=2) + "\n", encoding="utf-8")
    return path


def load_params(path: str | Path) -> tuple[KineticParams, float]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    # a calibration result nests the parameters
    if "params" in doc and isinstance(doc["params"], dict):
        inner = dict(doc["params"])
        inner.setdefault("dt_per_observation", doc.get("dt_per_observation", DEFAULT_DT))
        doc = inner
    return params_from_dict(doc)
