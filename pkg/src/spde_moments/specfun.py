"""Special functions of fractional type.

Series are summed in log space: each term is computed as a logarithm,
shifted by the running maximum and accumulated with ``math.fsum``.  The
stopping rule uses a geometric bound on the tail from an upper bound on the
ratio of consecutive terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate, optimize, special

TERM_CAP = 100_000


class SeriesCapReached(ArithmeticError):
    """The term cap was hit before the tail bound met the tolerance."""


@dataclass(frozen=True)
class SeriesEval:
    """A truncated series.

    ``truncation_bound`` bounds the absolute error of ``value``; the
    stopping tolerance is relative to the sum.
    """

    value: float
    terms_used: int
    truncation_bound: float
    log_value: float = math.nan


def _log_series(
    log_term: Callable[[int], float],
    ratio_bound: Callable[[int], float],
    tol: float,
    cap: int = TERM_CAP,
) -> tuple[float, int, float]:
    """Sum ``exp(log_term(m))`` for m = 0, 1, ...

    ``ratio_bound(m)`` must bound term(k+1)/term(k) for every k >= m and be
    nonincreasing in m.  Returns ``(log_sum, terms, log_tail_bound)``.
    """
    logs: list[float] = []
    for m in range(cap):
        lt = log_term(m)
        logs.append(lt)
        q = ratio_bound(m)
        if q < 1.0:
            lmax = max(logs)
            if lmax == -math.inf:
                return -math.inf, m + 1, -math.inf
            log_tail = lt + math.log(q) - math.log1p(-q) if q > 0 else -math.inf
            if log_tail - lmax < math.log(tol) - math.log(len(logs) + 1.0):
                s = math.fsum(math.exp(x - lmax) for x in logs)
                return lmax + math.log(s), m + 1, log_tail
    raise SeriesCapReached(f"series did not converge within {cap} terms")


def _pack(log_sum: float, terms: int, log_tail: float) -> SeriesEval:
    value = math.exp(log_sum) if log_sum < 709.0 else math.inf
    tail = math.exp(log_tail) if log_tail < 709.0 else math.inf
    return SeriesEval(value, terms, tail, log_sum)


def incomplete_gamma_star(nu: float, z: float, tol: float = 1e-12) -> SeriesEval:
    """``gamma*(nu, z) = exp(-z) sum_m z^m / Gamma(nu + m + 1)``."""
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if not z >= 0:
        raise ValueError(f"z must be nonnegative, got {z}")
    if z == 0:
        v = 1.0 / math.gamma(nu + 1)
        return SeriesEval(v, 1, 0.0, math.log(v))
    lz = math.log(z)

    def log_term(m):
        return -z + m * lz - math.lgamma(nu + m + 1)

    def ratio(m):
        return z / (nu + m + 2)

    return _pack(*_log_series(log_term, ratio, tol))


def beta_fn(x: float, y: float) -> float:
    if not (x > 0 and y > 0):
        raise ValueError(f"Beta function needs positive arguments, got ({x}, {y})")
    return float(special.beta(x, y))


def _frac_int_log(nu, H, beta, gamma_exp, t, tol):
    # m-th term: beta^m/m! t^(g m + 2H - 1 + nu) B(g m + 2H, nu) / Gamma(nu)
    lt = math.log(t)
    lg_nu = math.lgamma(nu)
    lb = math.log(beta) if beta > 0 else -math.inf
    btg = beta * t**gamma_exp

    def log_term(m):
        if m > 0 and beta == 0:
            return -math.inf
        a = gamma_exp * m + 2 * H
        return (
            (m * lb if m else 0.0)
            - math.lgamma(m + 1)
            + (a - 1 + nu) * lt
            + float(special.betaln(a, nu))
            - lg_nu
        )

    def ratio(m):
        # B(x, nu) decreases in x, so the Beta factor ratio is at most 1
        return btg / (m + 2)

    return _log_series(log_term, ratio, tol)


def frac_int_series(
    nu: float, H: float, beta: float, gamma_exp: float, t: float, tol: float = 1e-14
) -> SeriesEval:
    """Riemann-Liouville integral ``I^nu (s^(2H-1) exp(beta s^gamma))(t)``.

    Expanding the exponential gives
    ``sum_m beta^m / m! t^(gamma m + 2H - 1 + nu) B(gamma m + 2H, nu) / Gamma(nu)``.
    """
    if not nu > 0:
        raise ValueError(f"fractional order must be positive, got nu = {nu}")
    if not H > 0:
        raise ValueError(f"need 2H > 0, got H = {H}")
    if not beta >= 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if not gamma_exp > 0:
        raise ValueError(f"gamma exponent must be positive, got {gamma_exp}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return _pack(*_frac_int_log(nu, H, beta, gamma_exp, t, tol))


def upsilon_order(kind: Literal["heat", "wave"], alpha: float) -> float:
    """Fractional order of the integral behind the discounted quantity."""
    if kind == "heat":
        if not alpha < 2:
            raise ValueError(f"heat case needs alpha < 2, got {alpha}")
        return 1 - alpha / 2
    if kind == "wave":
        if not alpha < 3:
            raise ValueError(f"wave case needs alpha < 3, got {alpha}")
        return 3 - alpha
    raise ValueError(f"unknown equation kind {kind!r}")


def upsilon_discounted(
    kind: Literal["heat", "wave"], alpha: float, H: float, beta: float, gamma_exp: float, t: float
) -> float:
    """``exp(-beta t^gamma) I^kappa(s^(2H-1) exp(beta s^gamma))(t)`` with unit constant."""
    kappa = upsilon_order(kind, alpha)
    if t <= 0:
        return 0.0
    log_sum, _, _ = _frac_int_log(kappa, H, beta, gamma_exp, t, 1e-14)
    return math.exp(log_sum - beta * t**gamma_exp)


def gamma_time_integral(a1: float, a2: float, t: float) -> float:
    """``int_0^t int_0^t (sr)^a1 |s-r|^a2 ds dr = 2 B(a1+1, a2+1) t^(2H) / (2H)``."""
    _check_generalized(a1, a2)
    h2 = 2 * a1 + a2 + 2
    return 2 * beta_fn(a1 + 1, a2 + 1) * t**h2 / h2


def _check_generalized(a1, a2):
    if not a1 >= 0:
        raise ValueError(f"a1 must be >= 0, got {a1}")
    if not -1 < a2 <= 0:
        raise ValueError(f"a2 must lie in (-1, 0], got {a2}")


def _gamma_slice(a1, a2, t, s):
    # s^a1 [ int_0^s r^a1 (s-r)^a2 dr + int_s^t r^a1 (r-s)^a2 dr ]
    left = s ** (2 * a1 + a2 + 1) * beta_fn(a1 + 1, a2 + 1)
    if s >= t:
        right = 0.0
    elif a2 == 0:
        right = (t ** (a1 + 1) - s ** (a1 + 1)) / (a1 + 1)
    else:
        right, _ = integrate.quad(lambda r: r**a1, s, t, weight="alg", wvar=(a2, 0.0), epsabs=1e-13)
    return s**a1 * (left + right)


def sup_gamma_slice(a1: float, a2: float, t: float) -> float:
    """``sup_{0<s<t} int_0^t (sr)^a1 |s-r|^a2 dr`` by grid search and local refinement."""
    _check_generalized(a1, a2)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    g = lambda s: _gamma_slice(a1, a2, t, s)
    grid = np.linspace(0, t, 201)
    vals = np.array([g(s) for s in grid])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda s: -g(s), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10 * t})
    return float(max(vals[i], -res.fun))


def series_sum_lemma_a1(a_exp: float, x: float, tol: float = 1e-10) -> float:
    """``sum_n x^n / (n!)^a``."""
    if not a_exp > 0:
        raise ValueError(f"exponent must be positive, got {a_exp}")
    if not x >= 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0:
        return 1.0
    lx = math.log(x)
    log_sum, _, _ = _log_series(
        lambda n: n * lx - a_exp * math.lgamma(n + 1),
        lambda n: x / (n + 2) ** a_exp,
        tol,
    )
    return math.exp(log_sum)
