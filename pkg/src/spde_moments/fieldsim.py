"""Explicit lattice scheme for the heat equation with DO noise in one dimension.

The periodic grid ``x_j = -L + j dx`` carries the update

    u[m+1] = u[m] + (dt/2) lap(u[m]) / dx^2 + u[m] sqrt(w_m) xi[m]

with ``w_m = int_{t_m}^{t_{m+1}} s^(2H-1) ds`` and ``xi[m]`` a Gaussian vector
with covariance ``f(x_j - x_k)``, drawn fresh every step.  Replica ``r``
reads normal number ``m * rank + i`` of its own stream for column ``i`` of
the covariance factor at step ``m``.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .model import Bounded

JITTER = 1e-10


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeConfig:
    L: float
    n_x: int
    t_max: float
    n_t: int
    H: float
    spatial: Bounded
    n_rep: int
    seed: int
    u0: float = 1.0

    def __post_init__(self):
        if not isinstance(self.spatial, Bounded):
            raise ValueError("the lattice simulator supports bounded covariances only")
        if self.n_x < 8:
            raise ValueError(f"need n_x >= 8, got {self.n_x}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not 0 < self.H < 1:
            raise ValueError(f"H must lie in (0, 1), got {self.H}")
        if self.t_max < 0 or self.n_t < 1:
            raise ValueError("need t_max >= 0 and n_t >= 1")
        if self.n_rep < 2:
            raise ValueError("need at least two replicas")
        if self.t_max > 0 and self.dt > self.dx**2 * (1 + 1e-12):
            raise StabilityError(
                f"explicit step unstable: dt = {self.dt:.3g} > dx^2 = {self.dx**2:.3g}"
            )

    @property
    def dx(self) -> float:
        return 2 * self.L / self.n_x

    @property
    def dt(self) -> float:
        return self.t_max / self.n_t

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n_x)

    @property
    def center(self) -> int:
        """Grid index of ``x = 0``."""
        return self.n_x // 2


def default_half_width(t_max: float, minimum: float = 1.0) -> float:
    """Half-width ``6 sqrt(t_max)``, so wrap-around stays below sampling noise."""
    return max(minimum, 6 * math.sqrt(t_max))


def covariance_matrix(cfg: LatticeConfig) -> np.ndarray:
    """Periodized covariance ``sum_m f(x_j - x_k + 2 L m)`` on the grid.

    Summing over periodic images keeps the matrix positive semi-definite on
    the torus.  The constant profile needs no images.
    """
    sp = cfg.spatial
    if sp.is_constant:
        return np.full((cfg.n_x, cfg.n_x), float(sp.A0))
    diff = np.subtract.outer(cfg.x, cfg.x)
    period = 2 * cfg.L
    reach = int(math.ceil(8 * sp.width / period)) + 1
    C = np.zeros_like(diff)
    for m in range(-reach, reach + 1):
        C += np.exp(-((diff + m * period) ** 2) / sp.width**2)
    return sp.A0 * C


def spatial_noise_factor(cfg: LatticeConfig) -> np.ndarray:
    """Factor ``F`` of shape ``(n_x, rank)`` with ``F F^T`` equal to the grid covariance.

    Constant covariance gives the rank-one column ``sqrt(A0) * ones``;
    otherwise a Cholesky factor of the covariance plus a ``1e-10`` ridge.
    """
    sp = cfg.spatial
    if sp.is_constant:
        return np.full((cfg.n_x, 1), math.sqrt(sp.A0))
    C = covariance_matrix(cfg)
    ridge = JITTER * max(float(np.max(np.diag(C))), 1.0)
    try:
        return np.linalg.cholesky(C + ridge * np.eye(cfg.n_x))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "grid covariance is not positive definite after ridge jitter"
        ) from exc


@dataclass(frozen=True)
class FieldResult:
    """Empirical moments ``E u(t_max, x_j)^p`` for ``p = 1, 2, 3`` at every site."""

    x: np.ndarray
    moments: dict
    stderr: dict
    final: np.ndarray = field(repr=False)
    snapshots: dict = field(default_factory=dict, repr=False)

    def at(self, p: int, j: Optional[int] = None) -> tuple[float, float]:
        j = len(self.x) // 2 if j is None else j
        return float(self.moments[p][j]), float(self.stderr[p][j])


def _step_weights(cfg: LatticeConfig) -> np.ndarray:
    tg = cfg.dt * np.arange(cfg.n_t + 1)
    e = 2 * cfg.H
    return (tg[1:] ** e - tg[:-1] ** e) / e


def _simulate_block(cfg, factor, weights, lo, hi, snap_steps):
    R = hi - lo
    rank = factor.shape[1]
    u = np.full((R, cfg.n_x), float(cfg.u0))
    lam = 0.5 * cfg.dt / cfg.dx**2
    z = np.empty((R, rank))
    kern = _backend.kernels
    snaps = {}
    if 0 in snap_steps:
        snaps[0] = u.copy()
    for m in range(cfg.n_t):
        kern.fill_normals(int(cfg.seed) & (2**64 - 1), lo, m * rank, z)
        xi = z @ factor.T
        lap = np.roll(u, 1, axis=1) - 2 * u + np.roll(u, -1, axis=1)
        u = u + lam * lap + u * math.sqrt(weights[m]) * xi
        if m + 1 in snap_steps:
            snaps[m + 1] = u.copy()
    return u, snaps


def simulate_do_field(cfg: LatticeConfig, workers: int = 1,
                      snapshot_every: Optional[int] = None) -> FieldResult:
    """Run ``cfg.n_rep`` replicas and return per-site moments at ``t_max``."""
    R = cfg.n_rep
    if cfg.t_max == 0:
        final = np.full((R, cfg.n_x), float(cfg.u0))
        moments = {p: np.full(cfg.n_x, float(cfg.u0) ** p) for p in (1, 2, 3)}
        stderr = {p: np.zeros(cfg.n_x) for p in (1, 2, 3)}
        return FieldResult(cfg.x, moments, stderr, final, {0: final} if snapshot_every else {})
    factor = spatial_noise_factor(cfg)
    weights = _step_weights(cfg)
    snap_steps = set()
    if snapshot_every:
        snap_steps = set(range(0, cfg.n_t + 1, snapshot_every)) | {cfg.n_t}
    pieces = max(1, workers * 4)
    size = max(1, -(-R // pieces))
    spans = [(lo, min(R, lo + size)) for lo in range(0, R, size)]
    run = lambda s: _simulate_block(cfg, factor, weights, s[0], s[1], snap_steps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(s) for s in spans]
    final = np.concatenate([p[0] for p in parts], axis=0)
    snaps = {k: np.concatenate([p[1][k] for p in parts], axis=0) for k in sorted(snap_steps)}
    moments, stderr = {}, {}
    for p in (1, 2, 3):
        v = final**p
        moments[p] = v.mean(axis=0)
        stderr[p] = v.std(axis=0, ddof=1) / math.sqrt(R)
    return FieldResult(cfg.x, moments, stderr, final, snaps)


def dump_fields(path: str, cfg: LatticeConfig, result: FieldResult) -> None:
    """CSV of ``(replica, step, x, u)`` for every stored snapshot (final step if none)."""
    snaps = result.snapshots or {cfg.n_t: result.final}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replica", "step", "x", "u"])
        for step in sorted(snaps):
            block = snaps[step]
            for r in range(block.shape[0]):
                for j, xj in enumerate(result.x):
                    w.writerow([r, step, f"{xj:.17g}", f"{block[r, j]:.17g}"])
