"""Least-squares fits used by the experiment drivers.

All rate claims are checked through the same two helpers so that the
acceptance suite and the CLI cannot disagree about what "the slope" means:
`fit_loglog` for power laws (log-log axes) and `fit_exponential` for
geometric tails (log counts against n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["LineFit", "fit_loglog", "fit_exponential", "FitReport"]


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float
    slope_se: float


def _fit_line(x: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None) -> LineFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    if sxx == 0.0:
        raise ValueError("degenerate fit: all x identical")
    slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    ss_res = (w * resid**2).sum()
    ss_tot = (w * (y - ybar) ** 2).sum()
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    dof = max(x.size - 2, 1)
    slope_se = float(np.sqrt(max(ss_res, 0.0) / dof / sxx))
    return LineFit(float(slope), float(intercept), float(r2), slope_se)


def fit_loglog(x, y) -> LineFit:
    """Fit log y = slope * log x + intercept.  All x, y must be positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    return _fit_line(np.log(x), np.log(y))


def fit_exponential(n, counts, weights=None) -> LineFit:
    """Fit log counts = slope * n + intercept; exp(slope) is the geometric ratio."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts <= 0):
        raise ValueError("exponential fit needs positive counts")
    return _fit_line(np.asarray(n, dtype=float), np.log(counts), weights)


@dataclass
class FitReport:
    """One verified rate claim: fitted statistic against its manifest target.

    `passed` must equal |slope - target| <= tolerance; `slope` holds the
    checked statistic (a log-log slope for power laws, a scalar for
    non-slope claims), with intercept/r_squared zero when not meaningful.
    """

    claim_id: str
    slope: float
    intercept: float
    r_squared: float
    range: list = field(default_factory=list)
    target: float = 0.0
    tolerance: float = 0.0
    passed: bool = False

    @classmethod
    def from_statistic(cls, claim_id: str, value: float, target: float,
                       tolerance: float, range_: list | None = None,
                       intercept: float = 0.0, r_squared: float = 0.0) -> "FitReport":
        return cls(
            claim_id=claim_id,
            slope=float(value),
            intercept=float(intercept),
            r_squared=float(r_squared),
            range=list(range_ or []),
            target=float(target),
            tolerance=float(tolerance),
            passed=bool(abs(value - target) <= tolerance),
        )

    def to_json(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "range": list(self.range),
            "target": self.target,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
