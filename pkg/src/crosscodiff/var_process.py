"""Bidimensional VAR(1) model X(t) = Theta X(t-1) + Z(t).

Theta is stored row-major as [[a1, a2], [a3, a4]], so that
X1(t) = a1 X1(t-1) + a2 X2(t-1) + Z1(t).  Entry names of the matrix power
Theta^j follow the same layout: [[a1^(j), a2^(j)], [a3^(j), a4^(j)]].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from crosscodiff.errors import ModelDomainError
from crosscodiff.stable_noise import NoiseSpec, sample_noise

STATIONARITY_MARGIN = 1e-9
DEFAULT_BURN_IN = 1000
DEFAULT_TRUNCATION = 50
DEFAULT_TAIL_TOL = 1e-12
DEFAULT_J_MAX_CAP = 100_000


@dataclass(frozen=True)
class Theta:
    a1: float
    a2: float
    a3: float
    a4: float

    @classmethod
    def from_matrix(cls, m) -> "Theta":
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ModelDomainError(f"Theta must be 2x2, got shape {m.shape}")
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def diagonal(cls, a1: float, a4: float) -> "Theta":
        return cls(a1, 0.0, 0.0, a4)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a1, self.a2], [self.a3, self.a4]])

    @property
    def is_diagonal(self) -> bool:
        return self.a2 == 0.0 and self.a3 == 0.0


@dataclass(frozen=True)
class StationarityReport:
    stationary: bool
    spectral_radius: float


@dataclass(frozen=True)
class ThetaPowers:
    """Matrix powers Theta^0 .. Theta^order stacked along axis 0."""

    powers: np.ndarray
    order: int
    truncated: bool = False

    def __len__(self):
        return len(self.powers)

    def entry(self, name: str) -> np.ndarray:
        """Sequence a1^(j) (or a2, a3, a4) for j = 0..order."""
        r, c = {"a1": (0, 0), "a2": (0, 1), "a3": (1, 0), "a4": (1, 1)}[name]
        return self.powers[:, r, c]


@dataclass(frozen=True)
class VarModel:
    theta: Theta
    noise: NoiseSpec

    def __post_init__(self):
        report = check_stationarity(self.theta)
        if not report.stationary:
            raise ModelDomainError(
                f"model is not stationary: spectral radius {report.spectral_radius:.6g} >= 1"
            )


@dataclass(frozen=True, eq=False)
class BiTrajectory:
    x1: np.ndarray
    x2: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x1 = np.ascontiguousarray(self.x1, dtype=float)
        x2 = np.ascontiguousarray(self.x2, dtype=float)
        if x1.ndim != 1 or x2.ndim != 1:
            raise ValueError("trajectory components must be one-dimensional")
        if x1.shape != x2.shape:
            raise ValueError(f"component lengths differ: {x1.size} vs {x2.size}")
        if x1.size < 2:
            raise ValueError(f"trajectory needs at least 2 points, got {x1.size}")
        if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
            raise ValueError("trajectory contains non-finite values")
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    def __len__(self):
        return self.x1.size

    def __eq__(self, other):
        if not isinstance(other, BiTrajectory):
            return NotImplemented
        return np.array_equal(self.x1, other.x1) and np.array_equal(self.x2, other.x2)

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.x1, self.x2])


def theta_power(theta: Theta, j: int) -> np.ndarray:
    if j < 0:
        raise ValueError(f"power must be non-negative, got {j}")
    out = np.eye(2)
    m = theta.matrix
    for _ in range(j):
        out = out @ m
    return out


def spectral_radius(theta: Theta) -> float:
    """Largest eigenvalue modulus from the 2x2 characteristic polynomial."""
    tr = theta.a1 + theta.a4
    det = theta.a1 * theta.a4 - theta.a2 * theta.a3
    disc = 0.25 * tr * tr - det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return max(abs(0.5 * tr + root), abs(0.5 * tr - root))
    # complex conjugate pair: |lambda|^2 = det
    return math.sqrt(det)


def check_stationarity(theta: Theta, margin: float = STATIONARITY_MARGIN) -> StationarityReport:
    rho = spectral_radius(theta)
    return StationarityReport(stationary=rho < 1.0 - margin, spectral_radius=rho)


def require_stationary(theta: Theta) -> None:
    report = check_stationarity(theta)
    if not report.stationary:
        raise ModelDomainError(
            f"Theta is not stationary: spectral radius {report.spectral_radius:.6g} >= 1"
        )


def fixed_powers(theta: Theta, order: int) -> np.ndarray:
    """Theta^0 .. Theta^order by repeated multiplication, shape (order+1, 2, 2)."""
    out = np.empty((order + 1, 2, 2))
    out[0] = np.eye(2)
    m = theta.matrix
    for j in range(1, order + 1):
        out[j] = out[j - 1] @ m
    return out


def ma_weights(
    theta: Theta,
    tail_tol: float | None = DEFAULT_TAIL_TOL,
    j_max_cap: int = DEFAULT_J_MAX_CAP,
) -> ThetaPowers:
    """MA(infinity) weights Theta^j up to the first power whose entries are all below ``tail_tol``.

    ``tail_tol=None`` gives the fixed truncation at j = 50.  Reaching
    ``j_max_cap`` first emits a warning and flags the result as truncated.
    """
    require_stationary(theta)
    if tail_tol is None:
        return ThetaPowers(fixed_powers(theta, DEFAULT_TRUNCATION), DEFAULT_TRUNCATION)
    if not tail_tol > 0.0:
        raise ValueError(f"tail_tol must be positive, got {tail_tol}")
    m = theta.matrix
    powers = [np.eye(2)]
    current = powers[0]
    for j in range(1, j_max_cap + 1):
        current = current @ m
        powers.append(current)
        if np.max(np.abs(current)) < tail_tol:
            return ThetaPowers(np.array(powers), j)
    warnings.warn(
        f"MA truncation cap {j_max_cap} reached before tail tolerance {tail_tol}",
        RuntimeWarning,
        stacklevel=2,
    )
    return ThetaPowers(np.array(powers), j_max_cap, truncated=True)


def filter_noise(theta: Theta, z1, z2) -> BiTrajectory:
    """Run X(t) = Theta X(t-1) + Z(t) from a zero state over the given innovations.

    The recursion is evaluated as the rational filter adj(I - Theta L) / det(I - Theta L),
    which is the same linear map with zero initial conditions.
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    a1, a2, a3, a4 = theta.a1, theta.a2, theta.a3, theta.a4
    if theta.is_diagonal:
        x1 = lfilter([1.0], [1.0, -a1], z1)
        x2 = lfilter([1.0], [1.0, -a4], z2)
    else:
        den = [1.0, -(a1 + a4), a1 * a4 - a2 * a3]
        x1 = lfilter([1.0, -a4], den, z1) + lfilter([0.0, a2], den, z2)
        x2 = lfilter([0.0, a3], den, z1) + lfilter([1.0, -a1], den, z2)
    return BiTrajectory(x1, x2)


def simulate(
    model: VarModel,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    rng: np.random.Generator | None = None,
    return_noise: bool = False,
):
    """Simulate ``n`` points of the stationary VAR(1) after ``burn_in`` discarded steps.

    With ``return_noise`` the innovations aligned with the returned points
    are returned as a second trajectory.
    """
    if n < 2:
        raise ValueError(f"trajectory length must be at least 2, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be non-negative, got {burn_in}")
    require_stationary(model.theta)
    if rng is None:
        rng = np.random.default_rng()
    z1, z2 = sample_noise(model.noise, rng, n + burn_in)
    full = filter_noise(model.theta, z1, z2)
    traj = BiTrajectory(full.x1[burn_in:], full.x2[burn_in:])
    if return_noise:
        return traj, BiTrajectory(z1[burn_in:], z2[burn_in:])
    return traj
