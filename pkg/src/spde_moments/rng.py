"""Counter-based random streams.

Every random number used by the Monte Carlo estimators is a pure function of
``(seed, replica, counter)``: the replica index selects a stream key and the
counter addresses a position inside that stream.  Nothing is carried between
draws, so any partition of the replicas over workers, and either backend,
produces the same numbers.

The mixing function is the SplitMix64 finalizer.  The same arithmetic is
implemented in ``_core.pyx``; keep the two in sync.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_REPLICA_SALT = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

MASK64 = (1 << 64) - 1


def _fmix(z):
    z = z + GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_keys(seed: int, replicas) -> np.ndarray:
    """Per-replica stream keys (uint64 array)."""
    r = np.asarray(replicas, dtype=np.uint64)
    s = np.uint64(seed & MASK64)
    with np.errstate(over="ignore"):
        return _fmix(_fmix(s) ^ _fmix(r * _REPLICA_SALT))


def raw64(keys: np.ndarray, counter) -> np.ndarray:
    """Raw 64-bit outputs at ``counter`` for each key."""
    c = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _fmix(keys + c * GOLDEN)


def uniform(keys: np.ndarray, counter) -> np.ndarray:
    """Uniform doubles on the open interval (0, 1)."""
    bits = raw64(keys, counter) >> _S11
    return (bits.astype(np.float64) + 0.5) * _INV53


def normal(keys: np.ndarray, counter) -> np.ndarray:
    """Standard normals by Box-Muller, consuming counters ``2c`` and ``2c+1``."""
    c = np.asarray(counter, dtype=np.uint64) * np.uint64(2)
    u1 = uniform(keys, c)
    u2 = uniform(keys, c + np.uint64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


# Scalar reference used by the tests to pin the stream definition.
def uniform_scalar(seed: int, replica: int, counter: int) -> float:
    def fmix(z: int) -> int:
        z = (z + 0x9E3779B97F4A7C15) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    key = fmix(fmix(seed & MASK64) ^ fmix((replica * 0xD1B54A32D192ED03) & MASK64))
    bits = fmix((key + counter * 0x9E3779B97F4A7C15) & MASK64) >> 11
    return (bits + 0.5) * _INV53
