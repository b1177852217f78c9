"""Pure numpy implementation of the replica kernels.

This is the reference for the counter layout; ``_core.pyx`` follows it.

Pair ensemble.  Jump ``j`` of a replica reads uniforms at counters
``j * stride + slot`` with ``stride = 2 + 4 d``:

* slot 0: exponential gap to the next jump of the merged process
* slot 1: pair label
* slots ``2 .. 2 + 2d - 1``: displacement of the first index of the pair
* slots ``2 + 2d .. 2 + 4d - 1``: displacement of the second index

A Gaussian coordinate ``i`` uses the two uniforms at ``c + 2i`` and
``c + 2i + 1`` (Box-Muller).  Wave displacements use at most the first two.
Replicas advance in lockstep: iteration ``j`` handles the ``j``-th jump of
every replica that is still alive.

Feynman-Kac paths.  Increment ``p`` of coordinate ``c`` of path ``i`` is the
normal at index ``(i * steps + p) * d + c``, i.e. uniforms ``2m`` and ``2m+1``.

Lattice field.  ``fill_normals(seed, rep_start, counter0, out)`` writes
normal ``counter0 + i`` of stream ``rep_start + r`` to ``out[r, i]``; the
field simulator passes ``counter0 = step * rank``.
"""
from __future__ import annotations

import numpy as np

from . import rng

COV_CONST, COV_BUMP, COV_RIESZ = 0, 1, 2
_TWO_PI = 2.0 * np.pi


def _gauss(keys, counter):
    u1 = rng.uniform(keys, counter)
    u2 = rng.uniform(keys, counter + np.uint64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def _displacement(keys, base, d, wave, g):
    out = np.empty((g.size, d))
    if not wave:
        sg = np.sqrt(g)
        for i in range(d):
            out[:, i] = sg * _gauss(keys, base + np.uint64(2 * i))
        return out
    if d == 1:
        out[:, 0] = g * (2.0 * rng.uniform(keys, base) - 1.0)
    elif d == 2:
        u = rng.uniform(keys, base)
        v = rng.uniform(keys, base + np.uint64(1))
        r = g * np.sqrt(u * (2.0 - u))
        out[:, 0] = r * np.cos(_TWO_PI * v)
        out[:, 1] = r * np.sin(_TWO_PI * v)
    else:
        z = 2.0 * rng.uniform(keys, base) - 1.0
        v = rng.uniform(keys, base + np.uint64(1))
        rho = np.sqrt(1.0 - z * z)
        out[:, 0] = g * rho * np.cos(_TWO_PI * v)
        out[:, 1] = g * rho * np.sin(_TWO_PI * v)
        out[:, 2] = g * z
    return out


def _cov(r2, kind, A0, param, clip):
    if kind == COV_CONST:
        return np.full(np.shape(r2), A0)
    if kind == COV_BUMP:
        return A0 * np.exp(-r2 / (param * param))
    return np.maximum(np.sqrt(r2), clip) ** (-param)


def pair_ensemble(wave, n, d, t, H, x0, cov_kind, A0, cov_param, clip, u0, v0,
                  seed, rep_start, out_log, out_sign, out_jumps):
    R = out_log.shape[0]
    nu = n * (n - 1) // 2
    stride = 2 + 4 * d
    expo = 2.0 * H - 1.0
    need_pos = cov_kind != COV_CONST
    pa, pb = np.triu_indices(n, 1)

    keys = rng.stream_keys(seed, np.arange(rep_start, rep_start + R, dtype=np.uint64))
    s = np.zeros(R)
    last = np.zeros((R, n))
    pos = np.repeat(np.asarray(x0, dtype=float)[None, :, :], R, axis=0)
    acc = np.full(R, nu * t)
    zero = np.zeros(R, dtype=bool)
    jumps = np.zeros(R, dtype=np.int64)

    active = np.arange(R)
    j = 0
    while active.size:
        base = np.uint64(j * stride)
        kk = keys[active]
        s_new = s[active] + (-np.log(rng.uniform(kk, base)) / nu)
        alive = s_new < t
        active, kk, sa = active[alive], kk[alive], s_new[alive]
        if not active.size:
            break
        s[active] = sa
        p = (rng.uniform(kk, base + np.uint64(1)) * nu).astype(np.int64)
        np.minimum(p, nu - 1, out=p)
        a, b = pa[p], pb[p]
        ga = sa - last[active, a]
        gb = sa - last[active, b]
        if need_pos:
            pos[active, a] += _displacement(kk, base + np.uint64(2), d, wave, ga)
            pos[active, b] += _displacement(kk, base + np.uint64(2 + 2 * d), d, wave, gb)
            diff = pos[active, a] - pos[active, b]
            fac = _cov(np.sum(diff * diff, axis=1), cov_kind, A0, cov_param, clip)
        else:
            fac = np.full(active.size, float(A0))
        if expo != 0.0:
            fac = fac * (t - sa) ** expo
        if wave:
            fac = fac * ga * gb
        pos_fac = fac > 0
        acc[active[pos_fac]] += np.log(fac[pos_fac])
        zero[active[~pos_fac]] = True
        last[active, a] = sa
        last[active, b] = sa
        jumps[active] += 1
        j += 1

    if wave:
        w = u0 + (t - last) * v0
    else:
        w = np.full((R, n), float(u0))
    zero |= np.any(w == 0.0, axis=1)
    sgn = np.where(np.sum(w < 0, axis=1) % 2 == 1, -1.0, 1.0)
    with np.errstate(divide="ignore"):
        lw = np.log(np.abs(w))
    for k in range(n):
        acc += lw[:, k]
    out_log[:] = np.where(zero, -np.inf, acc)
    out_sign[:] = np.where(zero, 0.0, sgn)
    out_jumps[:] = jumps


def brownian_paths(seed, rep_start, R, k, d, steps, dt):
    """Grid paths of shape (R, k, steps + 1, d) started at the origin."""
    keys = rng.stream_keys(seed, np.arange(rep_start, rep_start + R, dtype=np.uint64))
    idx = np.arange(k * steps * d, dtype=np.uint64)
    z = rng.normal(keys[:, None], idx[None, :]).reshape(R, k, steps, d)
    paths = np.zeros((R, k, steps + 1, d))
    np.cumsum(np.sqrt(dt) * z, axis=2, out=paths[:, :, 1:, :])
    return paths


def fk_exponents(k, d, steps, dt, V, cov_kind, A0, cov_param, clip, seed, rep_start, out):
    R = out.shape[0]
    chunk = max(1, 2_000_000 // ((steps + 1) ** 2 * d))
    for lo in range(0, R, chunk):
        hi = min(R, lo + chunk)
        paths = brownian_paths(seed, rep_start + lo, hi - lo, k, d, steps, dt)
        S = np.zeros(hi - lo)
        for i in range(k):
            for jj in range(i + 1, k):
                diff = paths[:, i, :, None, :] - paths[:, jj, None, :, :]
                F = _cov(np.sum(diff * diff, axis=-1), cov_kind, A0, cov_param, clip)
                S += np.einsum("rpq,pq->r", F, V)
        out[lo:hi] = S


def fill_normals(seed, rep_start, counter0, out):
    R, C = out.shape
    keys = rng.stream_keys(seed, np.arange(rep_start, rep_start + R, dtype=np.uint64))
    idx = np.uint64(counter0) + np.arange(C, dtype=np.uint64)
    out[:, :] = rng.normal(keys[:, None], idx[None, :])
