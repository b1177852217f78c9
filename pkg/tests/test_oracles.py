import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spde_moments import oracles
from spde_moments.model import DO, Bounded, Fractional, Generalized, NoiseSpec, WhiteTime
from spde_moments.specfun import beta_fn


def test_closed_forms():
    assert oracles.heat_renewal_closed(1.0, 0.5, 1.0) == pytest.approx(math.e)
    assert oracles.heat_renewal_closed(2.0, 0.7, 0.0, u0=3.0) == 9.0
    assert oracles.nth_closed_constant_f(2, 1.0, 0.75, 1.3) == pytest.approx(
        oracles.heat_renewal_closed(1.0, 0.75, 1.3))
    assert oracles.nth_closed_constant_f(4, 1.0, 0.5, 1.0) == pytest.approx(math.exp(6))
    assert oracles.log_nth_closed_constant_f(1000, 1.0, 0.5, 10.0) == pytest.approx(4995000.0)


@given(st.floats(0.4, 0.95), st.floats(0.05, 3.0), st.floats(0.1, 2.0))
@settings(max_examples=25, deadline=None)
def test_heat_volterra_matches_closed_form(H, t, A0):
    # below H = 0.4 the t^(2H) cusp of the solution slows convergence
    grid = oracles.volterra_solve("heat", A0, H, t, 1024, check=False)
    ref = oracles.heat_renewal_closed(A0, H, t)
    assert grid.moment()[-1] == pytest.approx(ref, rel=1e-4)


def test_heat_volterra_whole_grid():
    grid = oracles.volterra_solve("heat", 1.0, 0.7, 2.0, 2048)
    ref = np.exp(grid.t_values ** 1.4 / 1.4)
    assert np.max(np.abs(grid.moment() / ref - 1)) < 1e-6
    assert grid.doubling_residual < 1e-6


def test_volterra_doubling_check():
    with pytest.raises(oracles.VolterraNonConvergence):
        oracles.volterra_solve("heat", 1.0, 0.3, 5.0, 16)
    with pytest.raises(ValueError):
        oracles.volterra_solve("heat", 1.0, 0.5, 1.0, 8)


def test_wave_volterra_against_jump_count():
    for H in (0.5, 0.6, 0.75):
        js = oracles.wave_jump_count_oracle(2, 1.0, H, 0.3)
        v, _ = oracles.constant_f_reference("wave", 2, 1.0, H, 0.3)
        assert abs(v - js.value) <= js.tail_bound
        assert js.tail_bound < 1e-4


def test_wave_first_jump_term():
    # J_1 = nu t^(2H+2) B(2H, 3): one jump, factor s^2 (t-s)^(2H-1) on [0, t]
    js = oracles.wave_jump_count_oracle(3, 0.5, 0.5, 0.4)
    assert js.terms[1] == pytest.approx(0.5 * 3 * 0.4**3 * beta_fn(1.0, 3.0))


def test_wave_velocity_shifts_moment_up():
    a, _ = oracles.constant_f_reference("wave", 2, 1.0, 0.6, 0.8)
    b, _ = oracles.constant_f_reference("wave", 2, 1.0, 0.6, 0.8, v0=0.5)
    assert b > a and b > (1 + 0.8 * 0.5) ** 2


def test_wave_volterra_zero_noise():
    grid = oracles.volterra_solve("wave", 0.0, 0.6, 1.5, 256, u0=2.0, v0=1.0)
    assert grid.moment(2.0)[-1] == pytest.approx((2.0 + 1.5) ** 2, rel=1e-12)


def test_chaos_series():
    noise = NoiseSpec(DO(0.7), Bounded(1.0))
    s = oracles.chaos_series_constant_f(noise, 1.0, 1.5, 40)
    assert s.value == pytest.approx(oracles.heat_renewal_closed(1.0, 0.7, 1.5), rel=1e-12)
    noise = NoiseSpec(Generalized(0.25, -0.5), Bounded(1.0))
    ref = math.exp(2 * beta_fn(1.25, 0.5) / 2)
    assert oracles.chaos_series_constant_f(noise, 1.0, 1.0, 40).value == pytest.approx(ref, rel=1e-12)


def test_time_variance_families():
    assert oracles.time_variance(NoiseSpec(WhiteTime(), Bounded(1.0)), 2.0) == pytest.approx(2.0)
    frac = NoiseSpec(Fractional(0.7), Bounded(1.0))
    # alpha_H int int |s-r|^(2H-2) = t^(2H)
    assert oracles.time_variance(frac, 1.7) == pytest.approx(1.7**1.4, rel=1e-12)
