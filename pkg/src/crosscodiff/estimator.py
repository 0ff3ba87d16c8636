"""Empirical cross-codifference from a single bivariate trajectory.

For lag k the empirical characteristic function averages
exp(i(u x1[t] + v x2[t+k])) over the overlapping index range, and

    CD_hat(k) = log phi_hat(1, -1, k) - log phi_hat(1, 0, k) - log phi_hat(0, -1, k)

with principal logarithms.  The real part is the estimate; the imaginary
part is sampling noise for symmetric laws and is kept as a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crosscodiff.errors import DegenerateCFError, LagRangeError
from crosscodiff.theory import CodiffSeries
from crosscodiff.var_process import BiTrajectory

MODULUS_FLOOR = 1e-3
# (u, v) arguments of the three characteristic functions, in order.
CF_ARGUMENTS = ((1.0, -1.0), (1.0, 0.0), (0.0, -1.0))


@dataclass(frozen=True)
class EcfPoint:
    re: float
    im: float
    k: int
    u: float
    v: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def modulus(self) -> float:
        return abs(self.value)


def _check_lag(n: int, k: int):
    if abs(k) > n - 2:
        raise LagRangeError(f"|k| = {abs(k)} exceeds N - 2 = {n - 2}")


def _overlap(traj: BiTrajectory, k: int):
    n = len(traj)
    if k >= 0:
        return traj.x1[: n - k], traj.x2[k:]
    return traj.x1[-k:], traj.x2[: n + k]


def empirical_cf(traj: BiTrajectory, u: float, v: float, k: int) -> EcfPoint:
    _check_lag(len(traj), k)
    x, y = _overlap(traj, k)
    value = np.mean(np.exp(1j * (u * x + v * y)))
    return EcfPoint(float(value.real), float(value.imag), int(k), float(u), float(v))


def _combine(values, k: int, floor: float) -> complex:
    for (u, v), val in zip(CF_ARGUMENTS, values):
        if abs(val) <= floor:
            raise DegenerateCFError(
                f"empirical CF at (u, v) = ({u:g}, {v:g}), lag {k} has modulus {abs(val):.3g} "
                f"<= {floor:g}; the trajectory is too short or too heavy-tailed",
                u=u,
                v=v,
                k=k,
                modulus=abs(val),
            )
    joint, first, second = (np.log(complex(val)) for val in values)
    return joint - first - second


def empirical_codiff_complex(traj: BiTrajectory, k: int, modulus_floor: float = MODULUS_FLOOR) -> complex:
    """Complex-valued estimate; its imaginary part is a noise diagnostic."""
    values = [empirical_cf(traj, u, v, k).value for u, v in CF_ARGUMENTS]
    return _combine(values, k, modulus_floor)


def empirical_codiff(traj: BiTrajectory, k: int, modulus_floor: float = MODULUS_FLOOR) -> float:
    return empirical_codiff_complex(traj, k, modulus_floor).real


def empirical_codiff_series(
    traj: BiTrajectory, h_max: int, modulus_floor: float = MODULUS_FLOOR
) -> CodiffSeries:
    """Estimates for k = -h_max..h_max; phases are precomputed once for all lags."""
    n = len(traj)
    if h_max < 0:
        raise LagRangeError(f"h_max must be non-negative, got {h_max}")
    _check_lag(n, h_max)
    e1 = np.exp(1j * traj.x1)
    e2 = np.exp(-1j * traj.x2)
    lags = np.arange(-h_max, h_max + 1)
    re = np.empty(lags.size)
    im = np.empty(lags.size)
    for i, k in enumerate(lags):
        k = int(k)
        if k >= 0:
            a, b = e1[: n - k], e2[k:]
        else:
            a, b = e1[-k:], e2[: n + k]
        m = a.size
        values = (np.dot(a, b) / m, a.sum() / m, b.sum() / m)
        cd = _combine(values, k, modulus_floor)
        re[i] = cd.real
        im[i] = cd.imag
    return CodiffSeries(lags, re, imag=im)
