import math

import numpy as np
import pytest

from spde_moments import moment_mc, oracles
from spde_moments.model import (
    DO,
    Bounded,
    EquationSpec,
    Fractional,
    Generalized,
    NoiseSpec,
    Riesz,
    SpaceWhite,
    WhiteTime,
)
from spde_moments.specfun import beta_fn

HEAT = EquationSpec("heat")
CONST = Bounded(1.0)


def test_white_time_constant_f_is_exact():
    # H = 1/2: every jump carries weight 1, so each replica equals exp(t)
    est = moment_mc.second_moment_heat_mc(HEAT, NoiseSpec(WhiteTime(), CONST), 1.3, 0.0, 0.0,
                                          1000, seed=1)
    assert est.mean == pytest.approx(math.exp(1.3), rel=1e-12)
    assert est.stderr < 1e-12 * est.mean


def test_heat_second_moment(backend):
    est = moment_mc.second_moment_heat_mc(HEAT, NoiseSpec(DO(0.7), CONST), 1.0, 0.0, 0.0,
                                          20_000, seed=4, backend=backend)
    assert est.within(oracles.heat_renewal_closed(1.0, 0.7, 1.0))


def test_u0_scaling():
    noise = NoiseSpec(DO(0.6), Bounded(1.0, "gaussian-bump", 1.0))
    a = moment_mc.nth_moment_heat_mc(HEAT, noise, 0.8, 0.0, 3, 2000, seed=3)
    b = moment_mc.nth_moment_heat_mc(EquationSpec("heat", 1, 2.0), noise, 0.8, 0.0, 3, 2000, seed=3)
    assert b.mean == pytest.approx(8 * a.mean, rel=1e-12)


def test_zero_time_is_exact():
    est = moment_mc.nth_moment_heat_mc(EquationSpec("heat", 2, 1.5), NoiseSpec(DO(0.3), CONST),
                                       0.0, 0.0, 3, 10, seed=0)
    assert est.mean == 1.5**3 and est.stderr == 0


def test_worker_count_does_not_change_result():
    noise = NoiseSpec(DO(0.6), Riesz(0.5))
    eq = EquationSpec("heat", 2)
    a = moment_mc.nth_moment_heat_mc(eq, noise, 1.0, 0.0, 3, 3000, seed=8, workers=1)
    b = moment_mc.nth_moment_heat_mc(eq, noise, 1.0, 0.0, 3, 3000, seed=8, workers=4)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)


def test_prefix_property():
    # replica r depends only on (seed, r): a longer run extends a shorter one
    noise = NoiseSpec(DO(0.6), Bounded(1.0, "gaussian-bump", 0.5))
    a = moment_mc.nth_moment_heat_mc(HEAT, noise, 1.0, 0.0, 2, 100, seed=5, keep_trace=True)
    b = moment_mc.nth_moment_heat_mc(HEAT, noise, 1.0, 0.0, 2, 300, seed=5, keep_trace=True)
    assert np.array_equal(a.trace.log_abs, b.trace.log_abs[:100])


def test_bump_below_constant():
    # f <= A0 pointwise, so the moment is below the constant-f moment
    bump = NoiseSpec(DO(0.7), Bounded(1.0, "gaussian-bump", 0.3))
    est = moment_mc.second_moment_heat_mc(HEAT, bump, 1.0, 0.0, 0.0, 5000, seed=2)
    assert 1.0 < est.mean < oracles.heat_renewal_closed(1.0, 0.7, 1.0)


def test_separated_points_correlate_less():
    noise = NoiseSpec(DO(0.7), Bounded(1.0, "gaussian-bump", 0.5))
    near = moment_mc.second_moment_heat_mc(HEAT, noise, 1.0, 0.0, 0.0, 5000, seed=2)
    far = moment_mc.second_moment_heat_mc(HEAT, noise, 1.0, 0.0, 4.0, 5000, seed=2)
    assert far.mean < near.mean


def test_wave_small_time_against_jump_oracle():
    eq = EquationSpec("wave", 1)
    ref = oracles.wave_jump_count_oracle(3, 1.0, 0.6, 0.3)
    est = moment_mc.nth_moment_wave_mc(eq, NoiseSpec(DO(0.6), CONST), 0.3, 0.0, 3, 40_000, seed=3)
    assert abs(est.mean - ref.value) <= 3 * est.stderr + ref.tail_bound


def test_wave_velocity(backend):
    eq = EquationSpec("wave", 3, 1.0, 0.5)
    ref, _ = oracles.constant_f_reference("wave", 2, 1.0, 0.6, 0.5, 1.0, 0.5)
    est = moment_mc.second_moment_wave_mc(eq, NoiseSpec(DO(0.6), CONST), 0.5, 0.0, 0.0,
                                          40_000, seed=11, backend=backend)
    assert est.within(ref)


@pytest.mark.parametrize("eq,noise", [
    (HEAT, NoiseSpec(Fractional(0.7), CONST)),
    (HEAT, NoiseSpec(Generalized(0.1, -0.5), CONST)),
    (HEAT, NoiseSpec(DO(0.7), SpaceWhite())),
])
def test_incompatible(eq, noise):
    with pytest.raises(moment_mc.IncompatibleMethod):
        moment_mc.nth_moment_heat_mc(eq, noise, 1.0, 0.0, 2, 10, seed=0)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        moment_mc.nth_moment_heat_mc(EquationSpec("heat", 1), NoiseSpec(DO(0.7), Riesz(1.2)),
                                     1.0, 0.0, 2, 10, seed=0)
    with pytest.raises(ValueError):
        moment_mc.nth_moment_wave_mc(EquationSpec("wave", 4), NoiseSpec(DO(0.7), CONST),
                                     1.0, 0.0, 2, 10, seed=0)
    with pytest.raises(moment_mc.IncompatibleMethod):
        moment_mc.second_moment_wave_mc(HEAT, NoiseSpec(DO(0.7), CONST), 1.0, 0, 0, 10, seed=0)


def test_summarize_overflow_safe():
    log_abs = np.array([800.0, 801.0, 799.0])
    est = moment_mc.summarize(log_abs, np.ones(3), seed=0)
    assert est.mean == math.inf and est.log_mean == pytest.approx(800 + math.log(
        (1 + math.e + math.exp(-1)) / 3))


def test_heavy_tail_flag():
    log_abs = np.zeros(1000)
    log_abs[:5] = 10.0
    assert moment_mc.summarize(log_abs, np.ones(1000), seed=0).heavy_tail
    assert not moment_mc.summarize(np.zeros(1000), np.ones(1000), seed=0).heavy_tail


# Feynman-Kac ----------------------------------------------------------------

def test_fk_weights_total():
    for a1, a2 in [(0.0, -0.5), (0.3, -0.2), (0.0, 0.0)]:
        V = moment_mc.fk_weights(a1, a2, 1.7, 64)
        exact = 2 * beta_fn(a1 + 1, a2 + 1) * 1.7 ** (2 * a1 + a2 + 2) / (2 * a1 + a2 + 2)
        assert V.sum() == pytest.approx(exact, rel=1e-3 if a1 else 1e-12)


def test_fk_constant_f_matches_closed_form():
    noise = NoiseSpec(Generalized(0.0, -0.5), CONST)
    est = moment_mc.fk_moment_generalized_mc(noise, 3, 1.0, 10, 64, seed=0)
    H = 0.75
    ref = math.exp(3 * 2 * beta_fn(1, 0.5) / (2 * H))
    assert est.mean == pytest.approx(ref, rel=1e-12) and est.stderr == 0


def test_fk_fractional_matches_do_exponent():
    est = moment_mc.fk_moment_generalized_mc(NoiseSpec(Fractional(0.7), CONST), 2, 1.2, 10, 64, 0)
    assert est.mean == pytest.approx(math.exp(1.2**1.4), rel=1e-12)


def test_fk_bump_between_bounds(backend):
    noise = NoiseSpec(Generalized(0.2, -0.4), Bounded(1.0, "gaussian-bump", 1.0))
    est = moment_mc.fk_moment_generalized_mc(noise, 2, 1.0, 4000, 32, seed=6, backend=backend)
    upper = moment_mc.fk_moment_generalized_mc(NoiseSpec(noise.time, CONST), 2, 1.0, 10, 32, 0)
    assert 1.0 < est.mean < upper.mean


def test_fk_rejects():
    with pytest.raises(moment_mc.IncompatibleMethod):
        moment_mc.fk_moment_generalized_mc(NoiseSpec(DO(0.7), CONST), 2, 1.0, 10, 32, 0)
    with pytest.raises(ValueError):
        moment_mc.fk_moment_generalized_mc(NoiseSpec(Generalized(0, -0.5), CONST), 2, 1.0, 10, 8, 0)


def test_observed_order_and_labels():
    assert moment_mc.observed_order(1.0 + 1 / 4, 1.0 + 1 / 16, 1.0 + 1 / 64) == pytest.approx(2.0)
    assert moment_mc.pair_labels(3) == [(0, 1), (0, 2), (1, 2)]
