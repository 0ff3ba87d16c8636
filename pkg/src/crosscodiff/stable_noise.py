"""Alpha-stable scalars and bivariate Gaussian / sub-Gaussian innovations.

Stable laws use the parameterisation S_alpha(sigma, beta, mu) whose
characteristic function for alpha != 1 is

    exp(-sigma^alpha |t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)) + i mu t)

A sub-Gaussian pair is (A^(1/2) G1, A^(1/2) G2) where (G1, G2) is a zero-mean
Gaussian pair and A is a positive alpha/2-stable subordinator with scale
cos(pi alpha / 4)^(2 / alpha).  With that scale the pair has log-CF

    -(1/2)^(alpha/2) |t1^2 R11 + 2 t1 t2 R12 + t2^2 R22|^(alpha/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from crosscodiff.errors import ParameterDomainError

# Relative determinant threshold below which a covariance is treated as rank one.
RANK_ONE_RTOL = 1e-12
_PSD_RTOL = 1e-12


@dataclass(frozen=True)
class StableParams:
    alpha: float
    sigma: float = 1.0
    beta: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterDomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.sigma > 0.0:
            raise ParameterDomainError(f"sigma must be positive, got {self.sigma}")
        if not (-1.0 <= self.beta <= 1.0):
            raise ParameterDomainError(f"beta must lie in [-1, 1], got {self.beta}")
        if not math.isfinite(self.mu):
            raise ParameterDomainError(f"mu must be finite, got {self.mu}")

    @classmethod
    def subordinator(cls, alpha: float) -> "StableParams":
        """The totally skewed alpha/2-stable law that mixes a sub-Gaussian vector."""
        if not (0.0 < alpha < 2.0):
            raise ParameterDomainError(f"subordinator needs alpha in (0, 2), got {alpha}")
        return cls(
            alpha=alpha / 2.0,
            sigma=math.cos(math.pi * alpha / 4.0) ** (2.0 / alpha),
            beta=1.0,
            mu=0.0,
        )


@dataclass(frozen=True)
class CovMatrix2:
    """Covariance (r11, r12, r22) of a zero-mean Gaussian pair."""

    r11: float
    r12: float
    r22: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.r11, self.r12, self.r22)):
            raise ParameterDomainError("covariance entries must be finite")
        if self.r11 < 0.0 or self.r22 < 0.0:
            raise ParameterDomainError(
                f"variances must be non-negative, got r11={self.r11}, r22={self.r22}"
            )
        bound = self.r11 * self.r22
        if self.r12 * self.r12 > bound * (1.0 + _PSD_RTOL) + 1e-300:
            raise ParameterDomainError(
                f"covariance is not positive semidefinite: r12^2={self.r12 ** 2} > r11*r22={bound}"
            )

    @property
    def det(self) -> float:
        return self.r11 * self.r22 - self.r12 * self.r12

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r12, self.r22]])

    def quadratic_form(self, theta1, theta2):
        """theta1^2 r11 + 2 theta1 theta2 r12 + theta2^2 r22, clamped at zero.

        The form is analytically non-negative; clamping removes rounding
        noise of order 1e-17 that would otherwise poison fractional powers.
        """
        t1 = np.asarray(theta1, dtype=float)
        t2 = np.asarray(theta2, dtype=float)
        q = t1 * t1 * self.r11 + 2.0 * t1 * t2 * self.r12 + t2 * t2 * self.r22
        return np.maximum(q, 0.0)


@dataclass(frozen=True)
class GaussianNoise:
    cov: CovMatrix2
    kind = "gaussian"


@dataclass(frozen=True)
class SubGaussianNoise:
    alpha: float
    cov: CovMatrix2
    kind = "subgaussian"

    def __post_init__(self):
        # alpha = 2 is the Gaussian variant; alpha <= 1 lacks the covariation norm.
        if not (1.0 < self.alpha < 2.0):
            raise ParameterDomainError(f"sub-Gaussian noise needs alpha in (1, 2), got {self.alpha}")


NoiseSpec = Union[GaussianNoise, SubGaussianNoise]


# ---------------------------------------------------------------- CF evaluators


def stable_log_cf(params: StableParams, theta):
    """Complex log-characteristic function of S_alpha(sigma, beta, mu)."""
    t = np.asarray(theta, dtype=float)
    a, s, b, m = params.alpha, params.sigma, params.beta, params.mu
    abs_t = np.abs(t)
    if a != 1.0:
        skew = 1.0 - 1j * b * np.sign(t) * math.tan(math.pi * a / 2.0)
        out = -(s ** a) * abs_t ** a * skew + 1j * m * t
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            log_t = np.where(abs_t > 0.0, np.log(np.where(abs_t > 0.0, abs_t, 1.0)), 0.0)
        out = -s * abs_t * (1.0 + 1j * b * np.sign(t) * (2.0 / math.pi) * log_t) + 1j * m * t
    return out[()] if out.ndim == 0 else out


def gaussian_log_cf(cov: CovMatrix2, theta1, theta2):
    return -0.5 * cov.quadratic_form(theta1, theta2)


def subgaussian_log_cf(alpha: float, cov: CovMatrix2, theta1, theta2):
    """Sub-Gaussian log-CF for any alpha in (0, 2]; at alpha = 2 it is Gaussian."""
    half_alpha = alpha / 2.0
    return -(0.5 ** half_alpha) * cov.quadratic_form(theta1, theta2) ** half_alpha


def noise_log_cf(spec: NoiseSpec, theta1, theta2):
    """log phi_Z(theta1, theta2); real, non-positive, vectorised over theta."""
    if isinstance(spec, GaussianNoise):
        out = gaussian_log_cf(spec.cov, theta1, theta2)
    elif isinstance(spec, SubGaussianNoise):
        out = subgaussian_log_cf(spec.alpha, spec.cov, theta1, theta2)
    else:
        raise ParameterDomainError(f"unknown noise specification {spec!r}")
    return float(out) if np.ndim(out) == 0 else out


# -------------------------------------------------------------------- samplers


def sample_stable(params: StableParams, rng: np.random.Generator, size=None):
    """Draw from S_alpha(sigma, beta, mu) by the Chambers-Mallows-Stuck transform."""
    a, s, b, m = params.alpha, params.sigma, params.beta, params.mu
    v = math.pi * (rng.random(size) - 0.5)
    w = rng.standard_exponential(size)
    if a == 2.0:
        # beta is irrelevant at alpha = 2; this branch is N(mu, 2 sigma^2).
        x = 2.0 * np.sin(v) * np.sqrt(w)
        return s * x + m
    if a != 1.0:
        tan_term = b * math.tan(math.pi * a / 2.0)
        shift = math.atan(tan_term) / a
        scale = (1.0 + tan_term * tan_term) ** (1.0 / (2.0 * a))
        av = a * (v + shift)
        x = (
            scale
            * np.sin(av)
            / np.cos(v) ** (1.0 / a)
            * (np.cos(v - av) / w) ** ((1.0 - a) / a)
        )
        return s * x + m
    half_pi = math.pi / 2.0
    bv = half_pi + b * v
    x = (bv * np.tan(v) - b * np.log(half_pi * w * np.cos(v) / bv)) / half_pi
    return s * x + (2.0 / math.pi) * b * s * math.log(s) + m


def _gaussian_factor(cov: CovMatrix2, n1, n2):
    r11, r12, r22 = cov.r11, cov.r12, cov.r22
    if r11 == 0.0:
        # r12 must be zero by PSD; the second component is independent.
        return np.zeros_like(n1), math.sqrt(r22) * n2
    g1 = math.sqrt(r11) * n1
    if cov.det <= RANK_ONE_RTOL * r11 * r22:
        return g1, (r12 / r11) * g1
    l21 = r12 / math.sqrt(r11)
    l22 = math.sqrt(cov.det / r11)
    return g1, l21 * n1 + l22 * n2


def sample_gaussian_pair(cov: CovMatrix2, rng: np.random.Generator, size=None):
    """Zero-mean Gaussian pair with covariance ``cov``.

    Uses the closed-form lower-triangular square root of the 2x2 matrix; a
    rank-one covariance makes the second component an exact multiple of
    the first.
    """
    n = rng.standard_normal((2,) if size is None else (2,) + tuple(np.atleast_1d(size)))
    g1, g2 = _gaussian_factor(cov, n[0], n[1])
    if size is None:
        return float(g1), float(g2)
    return g1, g2


def sample_subgaussian_pair(alpha: float, cov: CovMatrix2, rng: np.random.Generator, size=None):
    """Sub-Gaussian pair sharing one subordinator draw per pair."""
    if not (1.0 < alpha < 2.0):
        raise ParameterDomainError(f"sub-Gaussian noise needs alpha in (1, 2), got {alpha}")
    a = sample_stable(StableParams.subordinator(alpha), rng, size)
    g1, g2 = sample_gaussian_pair(cov, rng, size)
    root = np.sqrt(a)
    if size is None:
        return float(root * g1), float(root * g2)
    return root * g1, root * g2


def sample_noise(spec: NoiseSpec, rng: np.random.Generator, size: int):
    """``size`` i.i.d. innovation pairs as two arrays."""
    if isinstance(spec, GaussianNoise):
        return sample_gaussian_pair(spec.cov, rng, size)
    if isinstance(spec, SubGaussianNoise):
        return sample_subgaussian_pair(spec.alpha, spec.cov, rng, size)
    raise ParameterDomainError(f"unknown noise specification {spec!r}")
