import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spde_moments import analysis
from spde_moments.model import ExponentPrediction


@given(st.floats(0.2, 3.0), st.floats(0.5, 5.0))
def test_recovers_power_law(rho, c):
    ts = [2.0, 4.0, 8.0, 16.0]
    samples = [(t, c * t**rho) for t in ts if c * t**rho > 1.0]
    if len(samples) < 3:
        return
    fit = analysis.fit_time_exponent(samples)
    assert fit.rho_hat == pytest.approx(rho, abs=1e-9)
    assert fit.c_hat == pytest.approx(math.log(c), abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)


def test_threshold_drops_points():
    samples = [(0.1, 0.5), (1.0, 2.0), (2.0, 4.0), (4.0, 8.0)]
    fit = analysis.fit_time_exponent(samples)
    assert fit.points_used == 3 and fit.rho_hat == pytest.approx(1.0)


def test_fit_errors():
    with pytest.raises(analysis.FitError):
        analysis.fit_time_exponent([(1.0, 2.0), (2.0, 4.0)])
    with pytest.raises(analysis.FitError):
        analysis.fit_order_exponent([(2, 3.0), (2, 3.0), (4, 9.0)])
    with pytest.raises(analysis.FitError):
        analysis.fit_time_exponent([(1.0, 3.0), (2.0, 3.0), (3.0, 3.0)])
    with pytest.raises(analysis.FitError):
        analysis.fit_time_exponent([(1.0, math.nan), (2.0, 4.0), (3.0, math.inf)])


def test_confidence_interval_covers_noisy_slope():
    gen = np.random.default_rng(0)
    ts = np.linspace(1, 20, 12)
    lm = 1.3 * ts**1.5 * np.exp(gen.normal(0, 0.02, ts.size))
    fit = analysis.fit_time_exponent(list(zip(ts, lm)))
    assert fit.ci95[0] < 1.5 < fit.ci95[1]
    assert fit.rho_stderr > 0


def test_compare():
    fit = analysis.fit_time_exponent([(1.0, 2.0), (2.0, 2.0 * 2**1.42), (4.0, 2.0 * 4**1.42)])
    cmp = analysis.compare_exponents(fit, ExponentPrediction(1.4, 2.0), 0.05)
    assert cmp.passed and cmp.difference == pytest.approx(0.02)
    assert not analysis.compare_exponents(fit, ExponentPrediction(1.4, 2.0), 0.05, "order").passed
