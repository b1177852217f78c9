"""Monte Carlo moment estimators.

Heat and wave moments use the Poisson pair representation: a merged Poisson
process of rate ``nu_n = n(n-1)/2`` whose jumps carry uniformly chosen index
pairs; each index moves by fresh heat or wave displacements between its own
jumps.  Generalized noise uses the Feynman-Kac exponential functional of
``k`` Brownian paths.

Every replica draws from its own counter-based stream, so estimates depend
only on ``(params, seed, n_rep)`` and not on how replicas are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _backend, _pycore
from .model import (
    DO,
    Bounded,
    EquationSpec,
    Fractional,
    Generalized,
    NoiseSpec,
    Riesz,
    SpaceWhite,
    WhiteTime,
    validate,
)

CLIP = 1e-6
HEAVY_TAIL_TOP = 0.01
HEAVY_TAIL_MASS = 0.5
MIN_QUAD_STEPS = 16


class IncompatibleMethod(ValueError):
    """The requested estimator does not cover this equation or noise."""


@dataclass(frozen=True)
class ReplicaTrace:
    log_abs: np.ndarray
    sign: np.ndarray
    jumps: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    n_rep: int
    seed: int
    log_mean: float
    heavy_tail: bool = False
    trace: Optional[ReplicaTrace] = field(default=None, compare=False, repr=False)

    def within(self, reference: float, k: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.mean - reference) <= k * self.stderr + slack


def summarize(log_abs: np.ndarray, sign: np.ndarray, seed: int,
              keep_trace: bool = False, jumps=None) -> MomentEstimate:
    """Mean and standard error of ``sign * exp(log_abs)`` without overflow."""
    R = log_abs.size
    live = sign != 0
    if not live.any():
        return MomentEstimate(0.0, 0.0, R, seed, -math.inf, False,
                              ReplicaTrace(log_abs, sign, jumps) if keep_trace else None)
    shift = float(np.max(log_abs[live]))
    vals = np.zeros(R)
    vals[live] = sign[live] * np.exp(log_abs[live] - shift)
    m = float(np.mean(vals))
    sd = float(np.std(vals, ddof=1)) if R > 1 else math.nan
    scale = math.exp(shift) if shift < 709.0 else math.inf
    mean = m * scale
    stderr = sd * scale / math.sqrt(R)
    log_mean = shift + math.log(m) if m > 0 else math.nan
    mag = np.sort(np.abs(vals))[::-1]
    total = float(np.sum(mag))
    top = max(1, int(math.ceil(HEAVY_TAIL_TOP * R)))
    heavy = total > 0 and R >= 100 and float(np.sum(mag[:top])) > HEAVY_TAIL_MASS * total
    return MomentEstimate(mean, stderr, R, int(seed), log_mean, bool(heavy),
                          ReplicaTrace(log_abs, sign, jumps) if keep_trace else None)


def _exact(value: float, n_rep: int, seed: int) -> MomentEstimate:
    log_mean = math.log(value) if value > 0 else (-math.inf if value == 0 else math.nan)
    return MomentEstimate(float(value), 0.0, int(n_rep), int(seed), log_mean, False)


def _chunks(n_rep: int, workers: int) -> list[tuple[int, int]]:
    pieces = max(1, workers * 4)
    size = max(1, -(-n_rep // pieces))
    return [(lo, min(n_rep, lo + size)) for lo in range(0, n_rep, size)]


def _run_chunked(fn, n_rep: int, workers: int):
    spans = _chunks(n_rep, workers)
    if workers <= 1:
        for lo, hi in spans:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda s: fn(*s), spans))


def _kernels(backend: Optional[str]):
    return _backend.kernels if backend is None else _backend.get(backend)


def _cov_args(spatial) -> tuple[int, float, float]:
    if isinstance(spatial, Bounded):
        if spatial.is_constant:
            return _pycore.COV_CONST, float(spatial.A0), 0.0
        return _pycore.COV_BUMP, float(spatial.A0), float(spatial.width)
    if isinstance(spatial, Riesz):
        return _pycore.COV_RIESZ, 1.0, float(spatial.alpha)
    raise IncompatibleMethod("spatial white noise cannot be evaluated pointwise by the sampler")


def _points(x_vec, n: int, d: int) -> np.ndarray:
    x = np.asarray(x_vec, dtype=float)
    if x.ndim == 0:
        x = np.full((n, d), float(x))
    elif x.ndim == 1 and d == 1 and x.size == n:
        x = x.reshape(n, 1)
    elif x.ndim == 1 and x.size == d:
        x = np.repeat(x[None, :], n, axis=0)
    if x.shape != (n, d):
        raise ValueError(f"expected {n} points in R^{d}, got shape {np.shape(x_vec)}")
    return np.ascontiguousarray(x)


def _pair_estimate(eq: EquationSpec, noise: NoiseSpec, t: float, x_vec, n: int,
                   n_rep: int, seed: int, workers: int = 1, clip: float = CLIP,
                   keep_trace: bool = False, backend: Optional[str] = None) -> MomentEstimate:
    if n < 2:
        raise ValueError(f"moment order must be >= 2, got {n}")
    if n_rep < 2:
        raise ValueError("need at least two replicas")
    if not isinstance(noise.time, (WhiteTime, DO)):
        raise IncompatibleMethod(
            f"the Poisson representation needs white-in-time or DO noise, not {noise.family}"
        )
    if isinstance(noise.spatial, SpaceWhite):
        raise IncompatibleMethod("spatial white noise is not supported by the Poisson sampler")
    eq.require_wave_dim()
    problems = validate(eq, noise)
    if problems:
        raise ValueError("; ".join(p.message for p in problems))
    wave = eq.kind == "wave"
    if t <= 0:
        return _exact(eq.u0**n, n_rep, seed)
    cov_kind, A0, param = _cov_args(noise.spatial)
    x0 = _points(x_vec, n, eq.d)
    out_log = np.empty(n_rep)
    out_sign = np.empty(n_rep)
    out_jumps = np.empty(n_rep, dtype=np.int64)
    k = _kernels(backend)

    def work(lo, hi):
        k.pair_ensemble(int(wave), n, eq.d, float(t), noise.H, x0, cov_kind, A0, param,
                        float(clip), float(eq.u0), float(eq.v0), int(seed) & (2**64 - 1), lo,
                        out_log[lo:hi], out_sign[lo:hi], out_jumps[lo:hi])

    _run_chunked(work, n_rep, workers)
    return summarize(out_log, out_sign, seed, keep_trace, out_jumps)


def _require(eq: EquationSpec, kind: str):
    if eq.kind != kind:
        raise IncompatibleMethod(f"this estimator is for the {kind} equation, got {eq.kind}")


def second_moment_heat_mc(eq, noise, t, x, y, n_rep, seed, **kw) -> MomentEstimate:
    """``E[u(t,x) u(t,y)]`` for the heat equation."""
    _require(eq, "heat")
    return _pair_estimate(eq, noise, t, _stack2(x, y, eq.d), 2, n_rep, seed, **kw)


def nth_moment_heat_mc(eq, noise, t, x_vec, n, n_rep, seed, **kw) -> MomentEstimate:
    """``E[prod_k u(t, x_k)]`` for the heat equation."""
    _require(eq, "heat")
    return _pair_estimate(eq, noise, t, x_vec, n, n_rep, seed, **kw)


def second_moment_wave_mc(eq, noise, t, x, y, n_rep, seed, **kw) -> MomentEstimate:
    _require(eq, "wave")
    return _pair_estimate(eq, noise, t, _stack2(x, y, eq.d), 2, n_rep, seed, **kw)


def nth_moment_wave_mc(eq, noise, t, x_vec, n, n_rep, seed, **kw) -> MomentEstimate:
    _require(eq, "wave")
    return _pair_estimate(eq, noise, t, x_vec, n, n_rep, seed, **kw)


def _stack2(x, y, d):
    return np.stack([np.broadcast_to(np.asarray(x, float), (d,)),
                     np.broadcast_to(np.asarray(y, float), (d,))])


# ---------------------------------------------------------------------------
# Feynman-Kac for generalized noise


def fk_weights(a1: float, a2: float, t: float, steps: int) -> np.ndarray:
    """Corner weights ``V`` with ``sum V[p,q] g(t_p, t_q) ~ int int (sr)^a1 |s-r|^a2 g``.

    On cell ``(p, q)`` the factor ``|s-r|^a2`` is integrated exactly, ``s^a1``
    and ``r^a1`` are replaced by their exact cell averages and ``g`` by the
    mean of its four corner values.
    """
    dt = t / steps
    k = np.arange(steps, dtype=float)
    e = a2 + 2
    c = (np.abs(k + 1) ** e - 2 * k**e + np.abs(k - 1) ** e) / ((a2 + 1) * (a2 + 2))
    avg = ((k + 1) ** (a1 + 1) - k ** (a1 + 1)) * dt**a1 / (a1 + 1)
    idx = np.abs(np.subtract.outer(np.arange(steps), np.arange(steps)))
    W = dt**e * c[idx] * np.outer(avg, avg)
    V = np.zeros((steps + 1, steps + 1))
    for di in (0, 1):
        for dj in (0, 1):
            V[di:steps + di, dj:steps + dj] += W
    return V / 4


def _fk_params(noise: NoiseSpec) -> tuple[float, float, float]:
    tf = noise.time
    if isinstance(tf, Generalized):
        return tf.a1, tf.a2, 1.0
    if isinstance(tf, Fractional):
        return 0.0, 2 * tf.H - 2, tf.alpha_H
    raise IncompatibleMethod(
        f"the Feynman-Kac estimator needs generalized or fractional noise, not {noise.family}"
    )


def fk_moment_generalized_mc(noise: NoiseSpec, k: int, t: float, n_rep: int, quad_steps: int,
                             seed: int, d: int = 1, u0: float = 1.0, workers: int = 1,
                             clip: float = CLIP, keep_trace: bool = False,
                             backend: Optional[str] = None) -> MomentEstimate:
    """``u0^k E exp(sum_{i<j} int int gamma(s,r) f(B^i_s - B^j_r) ds dr)``.

    With constant covariance the exponent does not depend on the paths and the
    result is exact for the quadrature rule (zero standard error).
    """
    if k < 1:
        raise ValueError(f"moment order must be >= 1, got {k}")
    if quad_steps < MIN_QUAD_STEPS:
        raise ValueError(f"quad_steps must be >= {MIN_QUAD_STEPS}, got {quad_steps}")
    if n_rep < 2:
        raise ValueError("need at least two replicas")
    a1, a2, scale = _fk_params(noise)
    if isinstance(noise.spatial, SpaceWhite):
        raise IncompatibleMethod("spatial white noise is not supported by the path sampler")
    if isinstance(noise.spatial, Riesz) and not noise.spatial.alpha < min(2, d):
        raise ValueError(f"Riesz exponent {noise.spatial.alpha} needs alpha < min(2, d={d})")
    if u0 < 0:
        raise ValueError("u0 must be nonnegative")
    base = k * math.log(u0) if u0 > 0 else -math.inf
    if k == 1 or t <= 0:
        return _exact(u0**k, n_rep, seed)
    if u0 == 0:
        return _exact(0.0, n_rep, seed)
    V = scale * fk_weights(a1, a2, t, quad_steps)
    cov_kind, A0, param = _cov_args(noise.spatial)
    pairs = k * (k - 1) // 2
    if cov_kind == _pycore.COV_CONST:
        S = pairs * A0 * math.fsum(V.ravel())
        est = _exact(math.exp(base + S), n_rep, seed)
        return MomentEstimate(est.mean, 0.0, n_rep, int(seed), base + S, False)
    out = np.empty(n_rep)
    kern = _kernels(backend)
    dt = t / quad_steps
    V = np.ascontiguousarray(V)

    def work(lo, hi):
        kern.fk_exponents(k, d, quad_steps, dt, V, cov_kind, A0, param, float(clip),
                          int(seed) & (2**64 - 1), lo, out[lo:hi])

    _run_chunked(work, n_rep, workers)
    return summarize(base + out, np.ones(n_rep), seed, keep_trace)


def fk_richardson_bias(noise: NoiseSpec, k: int, t: float, n_rep: int, quad_steps: int,
                       seed: int, **kw) -> tuple[MomentEstimate, MomentEstimate, float]:
    """Estimates on ``quad_steps`` and ``quad_steps / 2`` and the first-order bias bound.

    For a first-order rule the error of the fine estimate is about the
    difference between the two.
    """
    fine = fk_moment_generalized_mc(noise, k, t, n_rep, quad_steps, seed, **kw)
    coarse = fk_moment_generalized_mc(noise, k, t, n_rep, quad_steps // 2, seed, **kw)
    return fine, coarse, abs(fine.mean - coarse.mean)


def observed_order(e1: float, e2: float, e4: float) -> float:
    """Convergence order from estimates on grids ``N``, ``2N`` and ``4N``."""
    return math.log2(abs(e1 - e2) / abs(e2 - e4))


def pair_labels(n: int) -> Sequence[tuple[int, int]]:
    """Index pairs in the order used to decode the pair label."""
    return [(a, b) for a in range(n) for b in range(a + 1, n)]
