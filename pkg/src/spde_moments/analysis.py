"""Growth-exponent fits for moment curves.

Moments grow like ``exp(c n^rho_n t^rho_t)``; a least-squares line through
``(log x, log log m)`` recovers the exponent.  Only points with ``m > e``
(``log m > 1``) are admissible so the double logarithm is well defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .model import ExponentPrediction

LOG_THRESHOLD = 1.0


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentFit:
    rho_hat: float
    c_hat: float
    r_squared: float
    points_used: int
    rho_stderr: float = math.nan
    ci95: tuple = (math.nan, math.nan)
    predicted: Optional[ExponentPrediction] = None


def _fit(samples: Iterable[Sequence[float]], what: str, threshold: float,
         predicted: Optional[ExponentPrediction]) -> ExponentFit:
    pts = [(float(x), float(lm)) for x, lm in samples]
    adm = [(x, lm) for x, lm in pts if x > 0 and math.isfinite(lm) and lm > threshold]
    if len(adm) < 3:
        raise FitError(
            f"need at least 3 admissible points (log moment > {threshold:g}), got {len(adm)}"
        )
    xs = np.log([x for x, _ in adm])
    if len(set(xs.tolist())) != len(xs):
        raise FitError(f"{what} values must be distinct")
    ys = np.log([lm for _, lm in adm])
    if np.ptp(ys) == 0:
        raise FitError("log moment is constant: no growth to fit")
    res = stats.linregress(xs, ys)
    n = len(adm)
    q = stats.t.ppf(0.975, n - 2)
    ci = (res.slope - q * res.stderr, res.slope + q * res.stderr)
    return ExponentFit(float(res.slope), float(res.intercept), float(res.rvalue**2), n,
                       float(res.stderr), ci, predicted)


def fit_time_exponent(samples, threshold: float = LOG_THRESHOLD,
                      predicted: Optional[ExponentPrediction] = None) -> ExponentFit:
    """Fit ``log m ~ c t^rho`` from ``(t, log m)`` pairs."""
    return _fit(samples, "t", threshold, predicted)


def fit_order_exponent(samples, threshold: float = LOG_THRESHOLD,
                       predicted: Optional[ExponentPrediction] = None) -> ExponentFit:
    """Fit ``log m ~ c n^rho`` from ``(n, log m)`` pairs at a fixed time."""
    return _fit(samples, "n", threshold, predicted)


@dataclass(frozen=True)
class Comparison:
    passed: bool
    rho_hat: float
    predicted: float
    tol: float

    @property
    def difference(self) -> float:
        return self.rho_hat - self.predicted


def compare_exponents(fit: ExponentFit, pred: ExponentPrediction, tol: float,
                      mode: str = "time") -> Comparison:
    target = pred.rho_t if mode == "time" else pred.rho_n
    return Comparison(abs(fit.rho_hat - target) <= tol, fit.rho_hat, target, tol)
