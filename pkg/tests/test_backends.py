import numpy as np
import pytest

from spde_moments import _backend, _pycore

cython_only = pytest.mark.skipif("cython" not in _backend.available(),
                                 reason="compiled kernels not built")


def _pair(mod, wave, n, d, cov_kind, A0, param, R=300):
    x0 = np.ascontiguousarray(np.linspace(-0.3, 0.3, n * d).reshape(n, d))
    out = (np.empty(R), np.empty(R), np.empty(R, dtype=np.int64))
    mod.pair_ensemble(wave, n, d, 1.2, 0.65, x0, cov_kind, A0, param, 1e-6, 1.0, 0.3 * wave,
                      12345, 7, *out)
    return out


@cython_only
@pytest.mark.parametrize("wave,d", [(0, 1), (0, 2), (1, 1), (1, 2), (1, 3)])
@pytest.mark.parametrize("cov", [(_pycore.COV_CONST, 1.0, 0.0), (_pycore.COV_BUMP, 1.5, 0.7),
                                 (_pycore.COV_RIESZ, 1.0, 0.5)])
def test_pair_ensemble_agrees(wave, d, cov):
    a = _pair(_backend.get("cython"), wave, 3, d, *cov)
    b = _pair(_backend.get("python"), wave, 3, d, *cov)
    assert np.array_equal(a[2], b[2])
    assert np.array_equal(a[1], b[1])
    assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-12)


@cython_only
@pytest.mark.parametrize("cov", [(_pycore.COV_BUMP, 1.0, 0.8), (_pycore.COV_RIESZ, 1.0, 0.4)])
def test_fk_agrees(cov):
    from spde_moments.moment_mc import fk_weights
    steps = 32
    V = np.ascontiguousarray(fk_weights(0.2, -0.4, 1.0, steps))
    outs = []
    for name in ("cython", "python"):
        out = np.empty(200)
        _backend.get(name).fk_exponents(3, 2, steps, 1 / steps, V, *cov, 1e-6, 99, 5, out)
        outs.append(out)
    assert np.allclose(outs[0], outs[1], rtol=1e-12)


@cython_only
def test_fill_normals_identical():
    outs = []
    for name in ("cython", "python"):
        z = np.empty((50, 7))
        _backend.get(name).fill_normals(3, 10, 21, z)
        outs.append(z)
    assert np.array_equal(outs[0], outs[1])


def test_offsets_are_replica_positions(backend):
    mod = _backend.get(backend)
    full = _pair(mod, 0, 3, 1, _pycore.COV_BUMP, 1.0, 1.0, R=40)
    part = (np.empty(10), np.empty(10), np.empty(10, dtype=np.int64))
    x0 = np.ascontiguousarray(np.linspace(-0.3, 0.3, 3).reshape(3, 1))
    mod.pair_ensemble(0, 3, 1, 1.2, 0.65, x0, _pycore.COV_BUMP, 1.0, 1.0, 1e-6, 1.0, 0.0,
                      12345, 7 + 25, *part)
    assert np.array_equal(full[0][25:35], part[0])


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")
