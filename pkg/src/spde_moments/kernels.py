"""Fundamental solutions, their Fourier transforms and related samplers."""
from __future__ import annotations

import math

import numpy as np

from . import rng
from .model import Bounded, EquationSpec, Riesz, SpaceWhite, SpatialCovariance

_SINC_SWITCH = 1e-8


def _norm2(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x * x
    return np.sum(x * x, axis=-1)


def heat_kernel(t: float, x, d: int):
    """Gaussian density ``(2 pi t)^(-d/2) exp(-|x|^2 / 2t)``.

    For ``d = 1``, ``x`` is a scalar or an array of scalars; otherwise points
    lie along the last axis.
    """
    if not t > 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    x = np.asarray(x, dtype=float)
    r2 = x * x if d == 1 else _norm2(x)
    return (2 * math.pi * t) ** (-d / 2) * np.exp(-r2 / (2 * t))


def heat_kernel_ft(t: float, xi):
    """``exp(-t |xi|^2 / 2)``; a scalar ``xi`` or points along the last axis."""
    if not t > 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    xi = np.asarray(xi, dtype=float)
    r2 = xi * xi if xi.ndim == 0 else _norm2(xi)
    return np.exp(-t * r2 / 2)


def wave_ft(t: float, xi):
    """``sin(t|xi|) / |xi|``, continuous at ``xi = 0``."""
    if not t > 0:
        raise ValueError(f"wave kernel needs t > 0, got {t}")
    xi = np.asarray(xi, dtype=float)
    r = np.abs(xi) if xi.ndim == 0 else np.sqrt(_norm2(xi))
    small = r < _SINC_SWITCH
    safe = np.where(small, 1.0, r)
    tr2 = (t * r) ** 2
    taylor = t * (1 - tr2 / 6 + tr2 * tr2 / 120)
    out = np.where(small, taylor, np.sin(t * safe) / safe)
    return out[()] if out.ndim == 0 else out


def wave_mass(t: float, d: int) -> float:
    """Total mass of the wave kernel, equal to ``t`` in dimensions 1 to 3."""
    if d not in (1, 2, 3):
        raise ValueError(f"wave kernel mass is only defined here for d in 1..3, got {d}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return float(t)


def deterministic_solution(eq: EquationSpec, t: float, x=None) -> float:
    """Solution with zero noise for constant initial data (independent of ``x``)."""
    if eq.kind == "heat":
        return float(eq.u0)
    return float(eq.u0 + t * eq.v0)


def sample_wave_displacement(t: float, d: int, size: int, seed: int, start: int = 0) -> np.ndarray:
    """Draws from the normalized wave kernel ``G(t, .) / t``.

    Sample ``i`` uses stream ``start + i`` of ``seed``.  Returns shape
    ``(size, d)``.
    """
    if d not in (1, 2, 3):
        raise ValueError(f"wave displacement needs d in 1..3, got {d}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    keys = rng.stream_keys(seed, np.arange(start, start + size, dtype=np.uint64))
    u = rng.uniform(keys, 0)
    v = rng.uniform(keys, 1)
    out = np.empty((size, d))
    if d == 1:
        out[:, 0] = t * (2 * u - 1)
    elif d == 2:
        r = t * np.sqrt(u * (2 - u))  # = t sqrt(1 - (1-u)^2), inverse CDF of the disk law
        out[:, 0] = r * np.cos(2 * np.pi * v)
        out[:, 1] = r * np.sin(2 * np.pi * v)
    else:
        z = 2 * u - 1
        rho = np.sqrt(1 - z * z)
        out[:, 0] = t * rho * np.cos(2 * np.pi * v)
        out[:, 1] = t * rho * np.sin(2 * np.pi * v)
        out[:, 2] = t * z
    return out


class Singularity(ValueError):
    """Raised when a Riesz kernel is evaluated at the origin."""


def covariance_eval(spatial: SpatialCovariance, x):
    """Evaluate ``f(x)``; ``x`` is a point, or a stack of points on the last axis."""
    x = np.asarray(x, dtype=float)
    r2 = x * x if x.ndim == 0 else _norm2(x)
    if isinstance(spatial, Bounded):
        if spatial.is_constant:
            out = np.full(np.shape(r2), float(spatial.A0))
        else:
            out = spatial.A0 * np.exp(-r2 / spatial.width**2)
    elif isinstance(spatial, Riesz):
        if np.any(r2 == 0):
            raise Singularity("Riesz kernel is singular at x = 0; clip before evaluating")
        out = r2 ** (-spatial.alpha / 2)
    elif isinstance(spatial, SpaceWhite):
        raise ValueError("spatial white noise has no pointwise covariance")
    else:
        raise TypeError(f"not a spatial covariance: {spatial!r}")
    return float(out) if np.ndim(out) == 0 else out
