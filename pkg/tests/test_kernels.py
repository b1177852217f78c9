import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from spde_moments import kernels
from spde_moments.model import Bounded, EquationSpec, Riesz, SpaceWhite


def test_heat_kernel_values():
    assert kernels.heat_kernel(1.0, 0.0, 1) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert kernels.heat_kernel(1.0, [0.0, 0.0], 2) == pytest.approx(1 / (2 * math.pi))
    with pytest.raises(ValueError):
        kernels.heat_kernel(0.0, 0.0, 1)


def test_heat_kernel_mass():
    v, _ = integrate.quad(lambda x: kernels.heat_kernel(0.7, x, 1), -np.inf, np.inf)
    assert v == pytest.approx(1.0, abs=1e-8)


def test_semigroup():
    y = np.linspace(-12, 12, 4801)
    for x in (0.0, 0.8, -1.7):
        conv = integrate.simpson(kernels.heat_kernel(0.5, x - y, 1) * kernels.heat_kernel(0.5, y, 1), x=y)
        assert conv == pytest.approx(kernels.heat_kernel(1.0, x, 1), abs=1e-6)


def test_heat_ft_matches_numeric_transform():
    assert kernels.heat_kernel_ft(2.0, 0.0) == 1.0
    assert kernels.heat_kernel_ft(2.0, 1.0) == pytest.approx(math.exp(-1))
    x = np.linspace(-15, 15, 6001)
    for xi in (0.5, 1.0, 2.0):
        num = integrate.simpson(np.cos(xi * x) * kernels.heat_kernel(1.0, x, 1), x=x)
        assert num == pytest.approx(kernels.heat_kernel_ft(1.0, xi), rel=1e-4)


def test_wave_ft():
    assert kernels.wave_ft(3.0, 0.0) == 3.0
    assert kernels.wave_ft(3.0, 1e-12) == pytest.approx(3.0)
    assert abs(kernels.wave_ft(math.pi, 1.0)) < 1e-12
    # sin(2)/2 from its Taylor series
    ref = math.fsum((-1) ** k * 2 ** (2 * k + 1) / math.factorial(2 * k + 1) for k in range(30)) / 2
    assert kernels.wave_ft(1.0, 2.0) == pytest.approx(ref, rel=1e-14)
    assert kernels.wave_ft(1.0, [0.0, 2.0]) == pytest.approx(ref)


@given(st.floats(1e-3, 50), st.floats(-1e3, 1e3))
def test_wave_ft_bounded(t, xi):
    assert abs(kernels.wave_ft(t, xi) * abs(xi)) <= 1 + 1e-12


def test_wave_mass_and_deterministic():
    assert kernels.wave_mass(1.0, 1) == 1.0
    assert kernels.wave_mass(2.5, 3) == 2.5
    assert kernels.wave_mass(0.0, 2) == 0.0
    with pytest.raises(ValueError):
        kernels.wave_mass(1.0, 4)
    assert kernels.deterministic_solution(EquationSpec("heat", 1, 1.0), 5.0) == 1.0
    assert kernels.deterministic_solution(EquationSpec("wave", 1, 1.0, 0.5), 2.0) == 2.0
    assert kernels.deterministic_solution(EquationSpec("wave", 2, 1.3), 7.0) == 1.3


def test_wave_displacement_laws():
    N = 10**6
    x1 = kernels.sample_wave_displacement(2.0, 1, N, seed=1)[:, 0]
    se = np.std(x1**2) / math.sqrt(N)
    assert abs(np.mean(x1**2) - 4 / 3) < 3 * se
    assert abs(x1.mean()) < 3 * x1.std() / math.sqrt(N)
    assert np.all(np.abs(x1) <= 2.0)

    x3 = kernels.sample_wave_displacement(1.5, 3, 1000, seed=2)
    assert np.allclose(np.linalg.norm(x3, axis=1), 1.5)

    x2 = kernels.sample_wave_displacement(1.0, 2, N, seed=3)
    r = np.linalg.norm(x2, axis=1)
    p = 1 - math.sqrt(3) / 2
    hit = np.mean(r <= 0.5)
    assert abs(hit - p) < 3 * math.sqrt(p * (1 - p) / N)
    assert np.all(r <= 1.0)
    assert np.all(np.abs(x2.mean(axis=0)) < 3 / math.sqrt(N))


def test_displacement_streams_are_positional():
    full = kernels.sample_wave_displacement(1.0, 3, 100, seed=9)
    tail = kernels.sample_wave_displacement(1.0, 3, 40, seed=9, start=60)
    assert np.array_equal(full[60:], tail)


def test_covariance_eval():
    assert kernels.covariance_eval(Riesz(0.5), 4.0) == pytest.approx(0.5)
    assert kernels.covariance_eval(Bounded(3.0), [1.0, 2.0]) == 3.0
    assert kernels.covariance_eval(Riesz(1.0), 0.01) == pytest.approx(100)
    assert kernels.covariance_eval(Bounded(2.0, "gaussian-bump", 0.5), 0.5) == pytest.approx(2 / math.e)
    with pytest.raises(kernels.Singularity):
        kernels.covariance_eval(Riesz(0.5), 0.0)
    with pytest.raises(ValueError):
        kernels.covariance_eval(SpaceWhite(), 1.0)
