"""Theoretical cross-codifference CD(X1(t), X2(t+h)) of a VAR(1) model.

Four evaluation routes are provided and cross-check each other:

* :func:`codiff_general` sums log-CF terms of the innovation law over the
  MA(infinity) weights and knows nothing about the noise family;
* :func:`codiff_gaussian` and :func:`codiff_subgaussian` are the
  family-specific closed series;
* :func:`codiff_from_definition` evaluates the three log-CFs of the
  definition on the full (uncancelled) linear combinations;
* :func:`codiff_example_closed_form` gives the geometric closed forms for
  diagonal Theta.

Negative ``h`` means CD(X1(t), X2(t - |h|)).  Series are truncated at
``j_trunc`` inclusive, i.e. terms j = 0..j_trunc.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from crosscodiff.errors import ParameterDomainError
from crosscodiff.stable_noise import (
    CovMatrix2,
    GaussianNoise,
    NoiseSpec,
    SubGaussianNoise,
    noise_log_cf,
)
from crosscodiff.var_process import DEFAULT_TRUNCATION, Theta, fixed_powers, require_stationary


@dataclass(frozen=True, eq=False)
class CodiffSeries:
    """Cross-codifference values over consecutive signed lags h_min..h_max."""

    lags: np.ndarray
    values: np.ndarray
    imag: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if lags.ndim != 1 or lags.shape != values.shape:
            raise ValueError("lags and values must be 1-D arrays of equal length")
        if lags.size == 0 or 0 not in lags:
            raise ValueError("a codifference series must contain lag 0")
        if np.any(np.diff(lags) != 1):
            raise ValueError("lags must be consecutive and ascending")
        if not np.all(np.isfinite(values)):
            raise ValueError("codifference values must be finite")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        if self.imag is not None:
            object.__setattr__(self, "imag", np.asarray(self.imag, dtype=float))

    @property
    def h_min(self) -> int:
        return int(self.lags[0])

    @property
    def h_max(self) -> int:
        return int(self.lags[-1])

    def __len__(self):
        return self.lags.size

    def __eq__(self, other):
        if not isinstance(other, CodiffSeries):
            return NotImplemented
        return np.array_equal(self.lags, other.lags) and np.array_equal(self.values, other.values)

    def at(self, h: int) -> float:
        if not self.h_min <= h <= self.h_max:
            raise KeyError(f"lag {h} outside [{self.h_min}, {self.h_max}]")
        return float(self.values[h - self.h_min])

    def window(self, lags) -> np.ndarray:
        return np.array([self.at(int(h)) for h in lags])


def _aligned_weights(theta: Theta, h: int, j_trunc: int):
    """Rows (a1, a2) and (a3, a4) of matching MA weights for lag h.

    For h >= 0 pairs Theta^j row 1 with Theta^(j+h) row 2; for h < 0 pairs
    Theta^(j+|h|) row 1 with Theta^j row 2.  j runs 0..j_trunc.
    """
    if j_trunc < 1:
        raise ValueError(f"j_trunc must be at least 1, got {j_trunc}")
    require_stationary(theta)
    m = abs(int(h))
    powers = fixed_powers(theta, j_trunc + m)
    if h >= 0:
        first = powers[: j_trunc + 1, 0, :]
        second = powers[m : m + j_trunc + 1, 1, :]
    else:
        first = powers[m : m + j_trunc + 1, 0, :]
        second = powers[: j_trunc + 1, 1, :]
    return first, second


def codiff_general_terms(theta: Theta, noise: NoiseSpec, h: int, j_trunc: int = DEFAULT_TRUNCATION):
    first, second = _aligned_weights(theta, h, j_trunc)
    diff = first - second
    return (
        noise_log_cf(noise, diff[:, 0], diff[:, 1])
        - noise_log_cf(noise, first[:, 0], first[:, 1])
        - noise_log_cf(noise, -second[:, 0], -second[:, 1])
    )


def codiff_general(theta: Theta, noise: NoiseSpec, h: int, j_trunc: int = DEFAULT_TRUNCATION) -> float:
    """Cross-codifference from the innovation log-CF alone (any symmetric noise law)."""
    return float(np.sum(codiff_general_terms(theta, noise, h, j_trunc)))


def codiff_gaussian_terms(theta: Theta, cov: CovMatrix2, h: int, j_trunc: int = DEFAULT_TRUNCATION):
    first, second = _aligned_weights(theta, h, j_trunc)
    p1, p2 = first[:, 0], first[:, 1]
    q1, q2 = second[:, 0], second[:, 1]
    return cov.r11 * p1 * q1 + cov.r22 * p2 * q2 + cov.r12 * p1 * q2 + cov.r12 * p2 * q1


def codiff_gaussian(theta: Theta, cov: CovMatrix2, h: int, j_trunc: int = DEFAULT_TRUNCATION) -> float:
    """Closed series for Gaussian noise; it coincides with the cross-covariance."""
    return float(np.sum(codiff_gaussian_terms(theta, cov, h, j_trunc)))


def codiff_subgaussian_terms(
    theta: Theta, alpha: float, cov: CovMatrix2, h: int, j_trunc: int = DEFAULT_TRUNCATION
):
    if not (0.0 < alpha <= 2.0):
        raise ParameterDomainError(f"alpha must lie in (0, 2], got {alpha}")
    first, second = _aligned_weights(theta, h, j_trunc)
    p, q = first, second
    half = alpha / 2.0
    qa = cov.quadratic_form(p[:, 0], p[:, 1]) ** half
    qb = cov.quadratic_form(q[:, 0], q[:, 1]) ** half
    qd = cov.quadratic_form(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1]) ** half
    return 0.5 ** half * (qa + qb - qd)


def codiff_subgaussian(
    theta: Theta, alpha: float, cov: CovMatrix2, h: int, j_trunc: int = DEFAULT_TRUNCATION
) -> float:
    """Closed series for sub-Gaussian noise.  ``alpha = 2`` is accepted and reproduces the Gaussian case."""
    return float(np.sum(codiff_subgaussian_terms(theta, alpha, cov, h, j_trunc)))


def codiff_theoretical(theta: Theta, noise: NoiseSpec, h: int, j_trunc: int = DEFAULT_TRUNCATION) -> float:
    """Dispatch to the closed series matching ``noise``."""
    if isinstance(noise, GaussianNoise):
        return codiff_gaussian(theta, noise.cov, h, j_trunc)
    if isinstance(noise, SubGaussianNoise):
        return codiff_subgaussian(theta, noise.alpha, noise.cov, h, j_trunc)
    raise ParameterDomainError(f"unknown noise specification {noise!r}")


def theoretical_series(
    theta: Theta, noise: NoiseSpec, h_max: int, j_trunc: int = DEFAULT_TRUNCATION
) -> CodiffSeries:
    lags = np.arange(-h_max, h_max + 1)
    values = [codiff_theoretical(theta, noise, int(h), j_trunc) for h in lags]
    return CodiffSeries(lags, values)


def codiff_from_definition(
    theta: Theta, noise: NoiseSpec, h: int, j_trunc: int = DEFAULT_TRUNCATION
) -> float:
    """CD = log E e^{i(X1(t) - X2(t+h))} - log E e^{i X1(t)} - log E e^{-i X2(t+h)}.

    Each term is the sum of innovation log-CFs over every shock that enters
    the corresponding linear combination, including shocks that affect only
    one of the two components.  Nothing is cancelled analytically, so this
    is an independent check of :func:`codiff_general`.  Shocks are indexed by
    their lag s relative to time t (Z(t - s)).
    """
    require_stationary(theta)
    m = abs(int(h))
    powers = fixed_powers(theta, j_trunc + m)

    def x1_weight(s):
        # X1(t) loads Z(t - s) with row 1 of Theta^s, s >= 0
        return powers[s, 0, :] if 0 <= s <= j_trunc + (m if h < 0 else 0) else np.zeros(2)

    def x2_weight(s):
        # X2(t + h) loads Z(t - s) with row 2 of Theta^(s + h)
        k = s + h
        limit = j_trunc + (m if h >= 0 else 0)
        return powers[k, 1, :] if 0 <= k <= limit else np.zeros(2)

    shocks = range(-m if h >= 0 else 0, j_trunc + m + 1)
    log_x1 = log_x2 = log_diff = 0.0
    for s in shocks:
        w1 = x1_weight(s)
        w2 = x2_weight(s)
        log_x1 += noise_log_cf(noise, w1[0], w1[1])
        log_x2 += noise_log_cf(noise, -w2[0], -w2[1])
        log_diff += noise_log_cf(noise, w1[0] - w2[0], w1[1] - w2[1])
    return float(log_diff - log_x1 - log_x2)


# ------------------------------------------------------------- closed forms

EXAMPLE_KINDS = ("gauss_indep", "gauss_diag", "subgauss_diag")


def _check_diag_params(a1: float, a4: float):
    if not (abs(a1) < 1.0 and abs(a4) < 1.0):
        raise ParameterDomainError(f"closed forms need |a1| < 1 and |a4| < 1, got a1={a1}, a4={a4}")


def codiff_example_closed_form(
    kind: str,
    a1: float,
    a4: float,
    cov: CovMatrix2,
    h: int,
    alpha: float | None = None,
    tol: float = 1e-16,
    max_terms: int = 100_000,
) -> float:
    """Closed forms for diagonal Theta (a2 = a3 = 0).

    ``gauss_indep`` requires r12 = 0 and is identically zero; ``gauss_diag``
    is r12 a4^h / (1 - a1 a4) for h >= 0 and r12 a1^|h| / (1 - a1 a4) for
    h < 0; ``subgauss_diag`` sums the two geometric series analytically and
    evaluates the remaining series until its terms drop below ``tol``.
    """
    _check_diag_params(a1, a4)
    if kind == "gauss_indep":
        if cov.r12 != 0.0:
            raise ParameterDomainError("gauss_indep requires r12 = 0")
        return 0.0
    m = abs(int(h))
    if kind == "gauss_diag":
        lead = a4 ** m if h >= 0 else a1 ** m
        return cov.r12 * lead / (1.0 - a1 * a4)
    if kind != "subgauss_diag":
        raise ParameterDomainError(f"unknown closed-form kind {kind!r}; expected one of {EXAMPLE_KINDS}")
    if alpha is None or not (0.0 < alpha <= 2.0):
        raise ParameterDomainError(f"subgauss_diag needs alpha in (0, 2], got {alpha}")
    half = alpha / 2.0
    abs1 = abs(a1) ** alpha
    abs4 = abs(a4) ** alpha
    if h >= 0:
        geo = cov.r11 ** half / (1.0 - abs1) + cov.r22 ** half * abs4 ** m / (1.0 - abs4)
    else:
        geo = cov.r11 ** half * abs1 ** m / (1.0 - abs1) + cov.r22 ** half / (1.0 - abs4)
    residual = 0.0
    for j in range(max_terms):
        p = a1 ** (j + (m if h < 0 else 0))
        q = a4 ** (j + (m if h >= 0 else 0))
        term = max(p * p * cov.r11 - 2.0 * p * q * cov.r12 + q * q * cov.r22, 0.0) ** half
        residual += term
        if term < tol and j > 0:
            break
    return 0.5 ** half * (geo - residual)


@dataclass(frozen=True)
class DecayRates:
    rate_pos: float
    rate_neg: float


def codiff_asymptotic_rate(theta: Theta, alpha: float, cov: CovMatrix2) -> DecayRates:
    """Geometric decay rates of CD at large |h| for diagonal Theta.

    Positive lags decay like a4^h, negative lags like a1^h.  Amplitudes are
    left as free parameters.
    """
    if not theta.is_diagonal:
        raise ParameterDomainError("asymptotic rates need a2 = a3 = 0")
    if not (0.0 < theta.a1 < 1.0 and 0.0 < theta.a4 < 1.0):
        raise ParameterDomainError(f"asymptotic rates need 0 < a1, a4 < 1, got {theta.a1}, {theta.a4}")
    if not (1.0 < alpha <= 2.0):
        raise ParameterDomainError(f"asymptotic rates need alpha > 1, got {alpha}")
    return DecayRates(rate_pos=theta.a4, rate_neg=theta.a1)
