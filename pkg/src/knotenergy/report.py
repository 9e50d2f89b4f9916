"""Result record shared by every integral estimator."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class FunctionalReport:
    """A computed functional with its error estimate and configuration echo.

    ``error`` is a Richardson difference for grid quadratures and a standard
    error for Monte Carlo estimates; ``method`` says which.
    """

    value: float
    error: float
    method: str
    n: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.error) or self.error < 0:
            raise ValueError(f"error estimate must be finite and >= 0, got {self.error}")

    def to_json(self) -> dict:
        return {"value": self.value, "error": self.error, "method": self.method,
                "n": self.n, "config": self.config}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def combined_error(*reports_or_errors) -> float:
    """Root-sum-square of independent error estimates."""
    total = 0.0
    for r in reports_or_errors:
        e = r.error if isinstance(r, FunctionalReport) else float(r)
        total += e * e
    return math.sqrt(total)
