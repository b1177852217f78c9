"""Exact and semi-exact reference values for constant spatial covariance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy import integrate

from .model import DO, Fractional, Generalized, NoiseSpec, WhiteTime
from .specfun import SeriesEval, beta_fn, gamma_time_integral

MIN_STEPS = 16
DOUBLING_TOL = 1e-3


def pair_rate(n: int) -> int:
    return n * (n - 1) // 2


def heat_renewal_closed(A0: float, H: float, t: float, u0: float = 1.0) -> float:
    """Second moment ``u0^2 exp(A0 t^(2H) / 2H)`` of the heat equation with ``f = A0``."""
    if not 0 < H < 1:
        raise ValueError(f"H must lie in (0, 1), got {H}")
    if t <= 0:
        return u0 * u0
    return u0 * u0 * math.exp(A0 * t ** (2 * H) / (2 * H))


def nth_closed_constant_f(n: int, A0: float, H: float, t: float, u0: float = 1.0) -> float:
    """``u0^n exp(nu_n A0 t^(2H) / 2H)`` with ``nu_n = n(n-1)/2``."""
    if n < 1:
        raise ValueError(f"moment order must be >= 1, got {n}")
    if not 0 < H < 1:
        raise ValueError(f"H must lie in (0, 1), got {H}")
    if t <= 0:
        return u0**n
    return u0**n * math.exp(pair_rate(n) * A0 * t ** (2 * H) / (2 * H))


def log_nth_closed_constant_f(n: int, A0: float, H: float, t: float, u0: float = 1.0) -> float:
    """Logarithm of :func:`nth_closed_constant_f`, safe for large ``n`` and ``t``."""
    base = n * math.log(u0) if u0 != 1.0 else 0.0
    if t <= 0:
        return base
    return base + pair_rate(n) * A0 * t ** (2 * H) / (2 * H)


# ---------------------------------------------------------------------------
# renewal equation


class VolterraNonConvergence(ArithmeticError):
    pass


@dataclass(frozen=True)
class VolterraGrid:
    t_max: float
    steps: int
    h_values: np.ndarray
    doubling_residual: float = math.nan

    @property
    def dt(self) -> float:
        return self.t_max / self.steps

    @property
    def t_values(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)

    def moment(self, u0: float = 1.0) -> np.ndarray:
        """Second moment ``u0^2 e^t h(t)`` on the grid."""
        return u0 * u0 * np.exp(self.t_values) * self.h_values


def _power_weights(beta: float, steps: int, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Hat-function weights of ``r^beta`` on each cell ``[j dt, (j+1) dt]``."""
    j = np.arange(steps, dtype=float)
    i0 = ((j + 1) ** (beta + 1) - j ** (beta + 1)) / (beta + 1)
    i1 = ((j + 1) ** (beta + 2) - j ** (beta + 2)) / (beta + 2)
    scale = dt ** (beta + 1)
    left = ((j + 1) * i0 - i1) * scale
    right = (i1 - j * i0) * scale
    return left, right


def _volterra_once(kind, A0, H, t_max, steps, v_ratio):
    dt = t_max / steps
    tg = np.arange(steps + 1) * dt
    left, right = _power_weights(2 * H - 1, steps, dt)
    # c_j: total weight of node j when it is not the upper end point
    c = left.copy()
    c[1:] += right[:-1]
    phi = np.exp(-tg)
    if kind == "wave":
        phi = phi * tg * tg
    forcing = np.exp(-tg) * (1 + tg * v_ratio) ** 2
    h = np.empty(steps + 1)
    h[0] = forcing[0]
    ch = np.empty(steps + 1)
    ch[0] = c[0] * h[0]
    for m in range(1, steps + 1):
        # sum_{j<m} c_j h_j phi(t_m - t_j)
        conv = np.dot(ch[:m], phi[m:0:-1])
        h[m] = (forcing[m] + A0 * conv) / (1.0 - A0 * right[m - 1] * phi[0])
        if m < steps:
            ch[m] = c[m] * h[m]
    return h


def volterra_solve(
    kind: Literal["heat", "wave"],
    A0: float,
    H: float,
    t_max: float,
    steps: int,
    u0: float = 1.0,
    v0: float = 0.0,
    check: bool = True,
) -> VolterraGrid:
    """Renewal equation ``h(t) = F(t) + A0 int_0^t e^{-s} K(t,s) h(t-s) ds``.

    ``K = (t-s)^(2H-1)`` for heat and ``s^2 (t-s)^(2H-1)`` for wave;
    ``F(t) = e^{-t} (1 + t v0/u0)^2``.  The factor ``r^(2H-1)`` (with
    ``r = t - s``) is integrated exactly against piecewise-linear
    interpolation of the rest of the integrand.  With ``check`` the solve is
    repeated on a doubled grid and :class:`VolterraNonConvergence` is raised
    if ``h(t_max)`` moves by more than 1e-3.
    """
    if kind not in ("heat", "wave"):
        raise ValueError(f"unknown equation kind {kind!r}")
    if steps < MIN_STEPS:
        raise ValueError(f"need at least {MIN_STEPS} steps, got {steps}")
    if not 0 < H <= 1:
        raise ValueError(f"H must lie in (0, 1], got {H}")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if v0 != 0 and u0 == 0:
        raise ValueError("v0 != 0 needs u0 != 0 for the normalized renewal form")
    if kind == "heat" and v0 != 0:
        raise ValueError("the heat equation takes no initial velocity")
    ratio = v0 / u0 if v0 else 0.0
    h = _volterra_once(kind, A0, H, t_max, steps, ratio)
    resid = math.nan
    if check:
        h2 = _volterra_once(kind, A0, H, t_max, 2 * steps, ratio)
        resid = abs(h2[-1] - h[-1])
        if resid > DOUBLING_TOL:
            raise VolterraNonConvergence(
                f"h(t_max) changed by {resid:.3g} when doubling {steps} steps"
            )
    return VolterraGrid(float(t_max), int(steps), h, resid)


# ---------------------------------------------------------------------------
# chaos series


def time_variance(noise: NoiseSpec, t: float) -> float:
    """Exponent ``x(t)`` in ``E u(t)^2 = u0^2 exp(A0 x(t))`` for ``f = A0``.

    ``t^(2H) / 2H`` for white and DO noise; the full double integral of the
    time covariance for generalized and fractional noise.
    """
    tf = noise.time
    if isinstance(tf, (WhiteTime, DO)):
        return t ** (2 * tf.H) / (2 * tf.H)
    if isinstance(tf, Generalized):
        return gamma_time_integral(tf.a1, tf.a2, t)
    if isinstance(tf, Fractional):
        return tf.alpha_H * gamma_time_integral(0.0, 2 * tf.H - 2, t)
    raise TypeError(f"unsupported time family {tf!r}")


def chaos_series_constant_f(noise: NoiseSpec, A0: float, t: float, n_terms: int) -> SeriesEval:
    """Partial sum ``sum_{n <= N} (A0 v(t))^n / n!`` of the normalized second moment."""
    if n_terms < 0:
        raise ValueError("number of terms must be nonnegative")
    x = A0 * time_variance(noise, t) if t > 0 else 0.0
    terms = [1.0]
    for k in range(1, n_terms + 1):
        terms.append(terms[-1] * x / k)
    value = math.fsum(terms)
    tail = terms[-1] * x / (n_terms + 1) * math.exp(x)
    return SeriesEval(value, n_terms + 1, tail, math.log(value))


# ---------------------------------------------------------------------------
# wave moments by jump count


@dataclass(frozen=True)
class TruncatedSum:
    value: float
    terms: tuple
    tail_bound: float


def _simplex2(beta, t, poly):
    # int_{0<s1<s2<t} (t-s1)^beta (t-s2)^beta poly(s1, s2) ds2 ds1
    def inner(s1):
        if s1 >= t:
            return 0.0
        v, _ = integrate.quad(lambda s2: poly(s1, s2), s1, t, weight="alg",
                              wvar=(0.0, beta), epsabs=1e-15, epsrel=1e-12)
        return v

    v, _ = integrate.quad(inner, 0.0, t, weight="alg", wvar=(0.0, beta),
                          epsabs=1e-15, epsrel=1e-12)
    return v


def wave_jump_count_oracle(n: int, A0: float, H: float, t: float, u0: float = 1.0) -> TruncatedSum:
    """``E u(t)^n`` of the wave equation with ``f = A0``, ``v0 = 0``, summed over at most two jumps.

    ``J_k`` sums, over the ordered pair labels of ``k`` jumps, the simplex
    integral of ``prod (t - s_i)^(2H-1)`` times each jump's two gaps since
    the previous jump of the same index.  For two jumps the labels are equal,
    share one index, or are disjoint.
    """
    if n < 2:
        raise ValueError("wave moment oracle needs n >= 2")
    nu = pair_rate(n)
    beta = 2 * H - 1
    j1 = nu * t ** (2 * H + 2) * beta_fn(2 * H, 3)
    same = nu
    share = n * (n - 1) * (n - 2)
    disjoint = nu * nu - same - share
    j2 = same * _simplex2(beta, t, lambda a, b: a * a * (b - a) ** 2)
    j2 += share * _simplex2(beta, t, lambda a, b: a * a * (b - a) * b)
    if disjoint:
        j2 += disjoint * _simplex2(beta, t, lambda a, b: a * a * b * b)
    x = nu * A0 * t * t * t ** (2 * H) / (2 * H)
    tail = math.exp(x) - 1 - x - x * x / 2
    scale = u0**n
    terms = (scale, scale * A0 * j1, scale * A0 * A0 * j2)
    return TruncatedSum(math.fsum(terms), terms, scale * tail)


def constant_f_reference(kind: str, n: int, A0: float, H: float, t: float,
                         u0: float = 1.0, v0: float = 0.0,
                         steps: int = 4096) -> tuple[float, Optional[VolterraGrid]]:
    """Reference moment for constant covariance: closed form (heat) or renewal solve (wave, n = 2)."""
    if kind == "heat":
        return nth_closed_constant_f(n, A0, H, t, u0), None
    if n != 2:
        raise ValueError("renewal reference for the wave equation covers n = 2 only")
    if t <= 0:
        return u0 * u0, None
    grid = volterra_solve("wave", A0, H, t, steps, u0=u0, v0=v0)
    return float(grid.moment(u0)[-1]), grid
