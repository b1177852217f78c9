"""Domain types, admissibility checks and predicted growth exponents."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Union

from scipy import integrate

# ---------------------------------------------------------------------------
# spatial covariance


@dataclass(frozen=True)
class Bounded:
    """Bounded spatial covariance with ``f(0) = A0``.

    ``profile="constant"`` gives ``f == A0``; ``profile="gaussian-bump"``
    gives ``A0 * exp(-|x|^2 / width^2)``.
    """

    A0: float
    profile: Literal["constant", "gaussian-bump"] = "constant"
    width: Optional[float] = None

    def __post_init__(self):
        if not self.A0 >= 0:
            raise ValueError(f"A0 must be nonnegative, got {self.A0}")
        if self.profile == "constant":
            if self.width is not None:
                raise ValueError("constant profile takes no width")
        elif self.profile == "gaussian-bump":
            if self.width is None or not self.width > 0:
                raise ValueError("gaussian-bump profile needs a positive width")
        else:
            raise ValueError(f"unknown bounded profile {self.profile!r}")

    @property
    def is_constant(self) -> bool:
        return self.profile == "constant"


@dataclass(frozen=True)
class Riesz:
    """Riesz kernel ``|x|^-alpha``.  ``alpha < d`` is checked by :func:`validate`."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"Riesz exponent must be positive, got {self.alpha}")

    is_constant = False


@dataclass(frozen=True)
class SpaceWhite:
    """Spatial white noise, ``f = delta_0``; only meaningful in d = 1."""

    is_constant = False


SpatialCovariance = Union[Bounded, Riesz, SpaceWhite]


def a_param(spatial: SpatialCovariance) -> float:
    """Roughness index of the spatial covariance (0, alpha or 1)."""
    if isinstance(spatial, Bounded):
        return 0.0
    if isinstance(spatial, Riesz):
        return float(spatial.alpha)
    if isinstance(spatial, SpaceWhite):
        return 1.0
    raise TypeError(f"not a spatial covariance: {spatial!r}")


# ---------------------------------------------------------------------------
# time structure


@dataclass(frozen=True)
class WhiteTime:
    @property
    def H(self) -> float:
        return 0.5


@dataclass(frozen=True)
class DO:
    """Dobric-Ojeda weighting ``s^(H-1/2)`` of a white-in-time noise."""

    H: float

    def __post_init__(self):
        if not 0 < self.H < 1:
            raise ValueError(f"DO noise needs H in (0, 1), got {self.H}")


@dataclass(frozen=True)
class Fractional:
    H: float

    def __post_init__(self):
        if not 0.5 < self.H < 1:
            raise ValueError(f"fractional noise needs H in (1/2, 1), got {self.H}")

    @property
    def alpha_H(self) -> float:
        return self.H * (2 * self.H - 1)


@dataclass(frozen=True)
class Generalized:
    """Time covariance ``(st)^a1 |s-t|^a2``; the Hurst index is derived."""

    a1: float
    a2: float

    def __post_init__(self):
        if not self.a1 >= 0:
            raise ValueError(f"a1 must be >= 0, got {self.a1}")
        if not -1 < self.a2 <= 0:
            raise ValueError(f"a2 must lie in (-1, 0], got {self.a2}")
        if self.H > 1:
            raise ValueError(f"a1={self.a1}, a2={self.a2} give H={self.H} > 1")

    @property
    def H(self) -> float:
        return self.a1 + self.a2 / 2 + 1


TimeFamily = Union[WhiteTime, DO, Fractional, Generalized]


@dataclass(frozen=True)
class NoiseSpec:
    time: TimeFamily
    spatial: SpatialCovariance

    @property
    def H(self) -> float:
        return float(self.time.H)

    @property
    def a(self) -> float:
        return a_param(self.spatial)

    @property
    def family(self) -> str:
        return {
            WhiteTime: "white",
            DO: "do",
            Fractional: "fractional",
            Generalized: "generalized",
        }[type(self.time)]

    @property
    def alpha_H(self) -> Optional[float]:
        if isinstance(self.time, Fractional):
            return self.time.alpha_H
        return None

    def time_weight_exponent(self) -> float:
        """Exponent of the white-noise time weight ``s^(H-1/2)``."""
        if isinstance(self.time, (WhiteTime, DO)):
            return self.H - 0.5
        raise ValueError(f"{self.family} noise has no white-in-time weight")


def hurst_of(noise: NoiseSpec) -> float:
    return noise.H


# ---------------------------------------------------------------------------
# equations


@dataclass(frozen=True)
class EquationSpec:
    """Heat or wave equation with constant initial data.

    Wave equations with ``d >= 4`` can be constructed but are reported by
    :func:`validate` and rejected by every wave operation.
    """

    kind: Literal["heat", "wave"]
    d: int = 1
    u0: float = 1.0
    v0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("heat", "wave"):
            raise ValueError(f"unknown equation kind {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        if self.kind == "heat" and self.v0 != 0:
            raise ValueError("the heat equation takes no initial velocity")

    def require_wave_dim(self):
        if self.kind == "wave" and self.d not in (1, 2, 3):
            raise ValueError(f"wave kernel is not a function for d={self.d}")


@dataclass(frozen=True)
class ExponentPrediction:
    rho_t: float
    rho_n: float


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str


def validate(eq: EquationSpec, noise: NoiseSpec) -> list[Violation]:
    """Every violated admissibility condition; empty list when all pass."""
    out: list[Violation] = []
    H, a, d = noise.H, noise.a, eq.d
    if eq.kind == "heat" and not H > a / 4:
        out.append(Violation("H > a/4", f"heat equation needs H > a/4 = {a / 4:g}, got H = {H:g}"))
    if eq.kind == "wave" and not H > (a - 2) / 2:
        out.append(
            Violation("H > (a-2)/2", f"wave equation needs H > (a-2)/2 = {(a - 2) / 2:g}, got H = {H:g}")
        )
    if not H < 1:
        out.append(Violation("H < 1", f"H = {H:g} is outside (0, 1)"))
    if isinstance(noise.spatial, Riesz) and not noise.spatial.alpha < min(2, d):
        out.append(
            Violation(
                "alpha < min(2,d)",
                f"Riesz exponent {noise.spatial.alpha:g} violates Dalang's condition in d = {d}",
            )
        )
    if isinstance(noise.spatial, SpaceWhite) and d != 1:
        out.append(Violation("d = 1", f"spatial white noise needs d = 1, got d = {d}"))
    if eq.kind == "wave" and d >= 4:
        out.append(Violation("d <= 3", f"wave equation supported only for d <= 3, got d = {d}"))
    if eq.u0 < 0:
        out.append(Violation("u0 >= 0", f"moment representations assume u0 >= 0, got {eq.u0:g}"))
    return out


@dataclass(frozen=True)
class DalangResult:
    value: float
    finite: bool
    failing_tail: Optional[str] = None


def _sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def dalang_integral(spatial: SpatialCovariance, d: int) -> DalangResult:
    """``int mu(dxi) / (1 + |xi|^2)`` with the normalization ``C_{alpha,d} = 1``.

    For Riesz kernels ``mu(dxi) = |xi|^(alpha-d) dxi``; in radial form the
    integrand is ``S_{d-1} r^(alpha-1) / (1 + r^2)``.  Bounded covariances have
    a finite spectral measure and report ``value = nan``.
    """
    if isinstance(spatial, Bounded):
        return DalangResult(math.nan, True)
    if isinstance(spatial, SpaceWhite):
        if d != 1:
            return DalangResult(math.inf, False, "xi -> inf")
        return DalangResult(math.pi, True)
    alpha = spatial.alpha
    if alpha >= min(2, d):
        # alpha >= 2: radial integrand decays no faster than 1/r.
        # alpha >= d: |x|^-alpha is not locally integrable, no tempered spectral density.
        return DalangResult(math.inf, False, "xi -> inf")
    g = lambda r: r ** (alpha - 1) / (1 + r * r)
    head, _ = integrate.quad(g, 0, 1, epsabs=1e-13, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(g, 1, math.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return DalangResult(_sphere_area(d) * (head + tail), True)


def predicted_exponents(eq: EquationSpec, noise: NoiseSpec) -> ExponentPrediction:
    """Stretched-exponential growth orders ``E u^n ~ exp(c n^rho_n t^rho_t)``."""
    H, a = noise.H, noise.a
    if eq.kind == "heat":
        if not a < 2:
            raise ValueError(f"heat prediction needs a < 2, got a = {a}")
        return ExponentPrediction((4 * H - a) / (2 - a), (4 - a) / (2 - a))
    if not a < 3:
        raise ValueError(f"wave prediction needs a < 3, got a = {a}")
    return ExponentPrediction((2 * H + 2 - a) / (3 - a), (4 - a) / (3 - a))
