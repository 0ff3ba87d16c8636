"""Parameter estimation for diagonal sub-Gaussian VAR(1) models.

Pipeline:

1. estimate the empirical cross-codifference on lags 1..H on both sides;
2. fit CD(h) ~ c a4^h on positive lags and CD(-h) ~ c a1^h on negative lags
   by profile least squares (the amplitude has a closed form for fixed rate);
3. recover innovations with the inverse filter z(t) = x(t) - Theta_hat x(t-1);
4. fit (alpha, R) by minimising the squared distance between the empirical
   and sub-Gaussian characteristic functions on a grid of arguments.

:func:`run_mc_study` repeats the pipeline over seeded replications and
reports per-length medians.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from crosscodiff.errors import CrossCodiffError, FitError
from crosscodiff.estimator import MODULUS_FLOOR, empirical_codiff_series
from crosscodiff.rng import substream
from crosscodiff.stable_noise import CovMatrix2, GaussianNoise, SubGaussianNoise
from crosscodiff.theory import CodiffSeries
from crosscodiff.var_process import DEFAULT_BURN_IN, BiTrajectory, Theta, VarModel, simulate

logger = logging.getLogger(__name__)

RATE_BOUNDS = (0.01, 0.99)
PRESCAN_POINTS = 20
RATE_XATOL = 1e-10
ALPHA_BOUNDS = (1.01, 1.99)
CORR_CLAMP = 0.999
VAR_FLOOR = 1e-8
# segments whose values are all below this are treated as identically zero
SEGMENT_ZERO_ATOL = 1e-12


@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    sse: float
    lags_used: tuple[int, int]
    side: str = "positive"


@dataclass(frozen=True)
class ThetaDiagonalFit:
    a1_hat: float
    a4_hat: float
    positive: DecayFit
    negative: DecayFit
    mode: str = "separate"

    @property
    def tied(self) -> bool:
        return self.mode != "separate"

    @property
    def theta(self) -> Theta:
        return Theta.diagonal(self.a1_hat, self.a4_hat)


@dataclass(frozen=True)
class NoiseFit:
    alpha_hat: float
    cov_hat: CovMatrix2
    objective: float
    evaluations: int = 0
    converged: bool = True

    def as_vector(self) -> np.ndarray:
        c = self.cov_hat
        return np.array([self.alpha_hat, c.r11, c.r12, c.r22])


@dataclass(frozen=True)
class FitResult:
    theta: ThetaDiagonalFit
    noise: NoiseFit

    def to_dict(self) -> dict:
        t, z = self.theta, self.noise
        return {
            "a1_hat": t.a1_hat,
            "a4_hat": t.a4_hat,
            "diagonal_mode": t.mode,
            "decay_positive": _decay_dict(t.positive),
            "decay_negative": _decay_dict(t.negative),
            "alpha_hat": z.alpha_hat,
            "r11_hat": z.cov_hat.r11,
            "r12_hat": z.cov_hat.r12,
            "r22_hat": z.cov_hat.r22,
            "cf_objective": z.objective,
            "cf_evaluations": z.evaluations,
            "cf_converged": z.converged,
        }


def _decay_dict(fit: DecayFit) -> dict:
    return {
        "rate": fit.rate,
        "amplitude": fit.amplitude,
        "sse": fit.sse,
        "lags_used": list(fit.lags_used),
        "side": fit.side,
    }


# ------------------------------------------------------------------ decay fit


def profile_amplitude(rate: float, lags, values) -> float:
    """Least-squares amplitude c*(a) = sum g v / sum g^2 with g = a^h."""
    g = rate ** np.asarray(lags, dtype=float)
    return float(np.dot(g, values) / np.dot(g, g))


def decay_sse(rate: float, amplitude: float, lags, values) -> float:
    g = rate ** np.asarray(lags, dtype=float)
    r = amplitude * g - np.asarray(values, dtype=float)
    return float(np.dot(r, r))


def _profiled_sse(rate: float, blocks) -> float:
    total = 0.0
    for lags, values in blocks:
        c = profile_amplitude(rate, lags, values)
        total += decay_sse(rate, c, lags, values)
    return total


def _minimise_rate(blocks, bounds=RATE_BOUNDS) -> float:
    lo, hi = bounds
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    scan = np.array([_profiled_sse(a, blocks) for a in grid])
    i = int(np.argmin(scan))
    bracket = (grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)])
    res = minimize_scalar(
        _profiled_sse,
        bounds=bracket,
        args=(blocks,),
        method="bounded",
        options={"xatol": RATE_XATOL},
    )
    if res.fun <= scan[i]:
        return float(res.x)
    return float(grid[i])


def _side_block(series: CodiffSeries, side: str, h_min: int, h_max: int):
    if side not in ("positive", "negative"):
        raise ValueError(f"side must be 'positive' or 'negative', got {side!r}")
    if h_min < 1 or h_max < h_min:
        raise ValueError(f"need 1 <= h_min <= h_max, got [{h_min}, {h_max}]")
    lags = np.arange(h_min, h_max + 1)
    sign = 1 if side == "positive" else -1
    try:
        values = series.window(sign * lags)
    except KeyError as exc:
        raise ValueError(f"series lacks requested lags: {exc}") from None
    if np.max(np.abs(values)) <= SEGMENT_ZERO_ATOL:
        raise FitError(
            f"all {side} codifference values on lags {h_min}..{h_max} are zero; the fit is underdetermined"
        )
    return lags, values


def fit_decay(series: CodiffSeries, side: str = "positive", h_min: int = 1, h_max: int = 10) -> DecayFit:
    """Fit CD(+-h) ~ c a^h over h = h_min..h_max with a in (0, 1), c unconstrained."""
    lags, values = _side_block(series, side, h_min, h_max)
    rate = _minimise_rate([(lags, values)])
    amp = profile_amplitude(rate, lags, values)
    return DecayFit(rate, amp, decay_sse(rate, amp, lags, values), (h_min, h_max), side)


def fit_decay_pooled(series: CodiffSeries, h_min: int = 1, h_max: int = 10) -> tuple[DecayFit, DecayFit]:
    """One rate shared by both sides, with a separate amplitude per side."""
    pos = _side_block(series, "positive", h_min, h_max)
    neg = _side_block(series, "negative", h_min, h_max)
    rate = _minimise_rate([pos, neg])
    fits = []
    for side, (lags, values) in (("positive", pos), ("negative", neg)):
        amp = profile_amplitude(rate, lags, values)
        fits.append(DecayFit(rate, amp, decay_sse(rate, amp, lags, values), (h_min, h_max), side))
    return fits[0], fits[1]


DIAGONAL_MODES = ("separate", "pooled", "forward")


def fit_theta_diagonal_from_series(
    series: CodiffSeries, h_min: int = 1, h_max: int = 10, diagonal: str = "separate"
) -> ThetaDiagonalFit:
    """Decay fits on an existing series.

    ``diagonal`` selects how a1 and a4 are tied:

    * ``"separate"``: a4 from positive lags, a1 from negative lags;
    * ``"pooled"``: a1 = a4, one rate fitted jointly to both sides with
      separate amplitudes;
    * ``"forward"``: a1 = a4, rate fitted to positive lags only (the
      negative side is still fitted and reported, but not used).
    """
    if diagonal == "pooled":
        pos, neg = fit_decay_pooled(series, h_min, h_max)
        return ThetaDiagonalFit(pos.rate, pos.rate, pos, neg, mode=diagonal)
    pos = fit_decay(series, "positive", h_min, h_max)
    neg = fit_decay(series, "negative", h_min, h_max)
    if diagonal == "forward":
        return ThetaDiagonalFit(pos.rate, pos.rate, pos, neg, mode=diagonal)
    if diagonal != "separate":
        raise ValueError(f"diagonal must be one of {DIAGONAL_MODES}, got {diagonal!r}")
    # forward lags decay with a4, backward lags with a1
    return ThetaDiagonalFit(a1_hat=neg.rate, a4_hat=pos.rate, positive=pos, negative=neg, mode=diagonal)


def fit_theta_diagonal(
    traj: BiTrajectory,
    h_min: int = 1,
    h_max: int = 10,
    diagonal: str = "separate",
    modulus_floor: float = MODULUS_FLOOR,
) -> ThetaDiagonalFit:
    """Estimate (a1, a4) of a diagonal Theta from the empirical cross-codifference."""
    series = empirical_codiff_series(traj, h_max, modulus_floor)
    return fit_theta_diagonal_from_series(series, h_min, h_max, diagonal)


# -------------------------------------------------------------- noise recovery


def extract_noise(traj: BiTrajectory, theta_hat: Theta) -> BiTrajectory:
    """Inverse filter z(t) = x(t) - Theta_hat x(t-1) for t = 2..N."""
    x1, x2 = traj.x1, traj.x2
    t = theta_hat
    z1 = x1[1:] - (t.a1 * x1[:-1] + t.a2 * x2[:-1])
    z2 = x2[1:] - (t.a3 * x1[:-1] + t.a4 * x2[:-1])
    return BiTrajectory(z1, z2)


# ------------------------------------------------------------ CF-distance fit


def default_cf_grid(half_width: float = 1.0, points: int = 5) -> np.ndarray:
    """Uniform points x points grid on [-w, w]^2 without the origin, shape (m, 2)."""
    axis = np.linspace(-half_width, half_width, points)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    grid = np.column_stack([t1.ravel(), t2.ravel()])
    keep = ~np.all(np.isclose(grid, 0.0, atol=1e-15), axis=1)
    return grid[keep]


def empirical_joint_cf(noise: BiTrajectory, grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    phase = np.outer(grid[:, 0], noise.x1) + np.outer(grid[:, 1], noise.x2)
    return np.exp(1j * phase).mean(axis=1)


def project_noise_params(x) -> np.ndarray:
    """Map (alpha, r11, r12, r22) into the feasible box and the PSD cone."""
    alpha = min(max(float(x[0]), ALPHA_BOUNDS[0]), ALPHA_BOUNDS[1])
    r11 = max(float(x[1]), VAR_FLOOR)
    r22 = max(float(x[3]), VAR_FLOOR)
    bound = CORR_CLAMP * math.sqrt(r11 * r22)
    r12 = min(max(float(x[2]), -bound), bound)
    return np.array([alpha, r11, r12, r22])


def cf_distance(params, grid: np.ndarray, ecf: np.ndarray) -> float:
    """Sum over the grid of |phi_hat(theta) - phi_subgauss(theta; alpha, R)|^2."""
    alpha, r11, r12, r22 = params
    q = grid[:, 0] ** 2 * r11 + 2.0 * grid[:, 0] * grid[:, 1] * r12 + grid[:, 1] ** 2 * r22
    model = np.exp(-(0.5 * np.maximum(q, 0.0)) ** (alpha / 2.0))
    diff = ecf - model
    return float(np.sum(diff.real ** 2 + diff.imag ** 2))


def _penalised(x, grid, ecf):
    p = project_noise_params(x)
    return cf_distance(p, grid, ecf) + float(np.sum((np.asarray(x) - p) ** 2))


def initial_noise_guess(noise: BiTrajectory) -> NoiseFit:
    """Moment-free start from marginal and diagonal CF decay.

    For a sub-Gaussian pair -log|phi(t, 0)| = (t^2 r11 / 2)^(alpha/2), so the
    ratio at t = 1 and t = 1/2 gives alpha and the level gives r11; the
    same for r22, and phi(t, t) then gives r12.
    """

    def level(t1, t2):
        val = abs(np.mean(np.exp(1j * (t1 * noise.x1 + t2 * noise.x2))))
        return -math.log(min(max(val, 1e-12), 1.0 - 1e-12))

    y1, y1h = level(1.0, 0.0), level(0.5, 0.0)
    y2, y2h = level(0.0, 1.0), level(0.0, 0.5)
    alphas = [math.log(y / yh, 2.0) for y, yh in ((y1, y1h), (y2, y2h))]
    alpha = float(np.clip(np.mean(alphas), *ALPHA_BOUNDS))
    r11 = 2.0 * y1 ** (2.0 / alpha)
    r22 = 2.0 * y2 ** (2.0 / alpha)
    r_sum = 2.0 * level(1.0, 1.0) ** (2.0 / alpha)
    p = project_noise_params([alpha, r11, 0.5 * (r_sum - r11 - r22), r22])
    return NoiseFit(p[0], CovMatrix2(p[1], p[2], p[3]), objective=math.nan, converged=False)


_RESTART_JITTER = np.array(
    [
        [0.0, 0.0, 0.0, 0.0],
        [0.08, 0.1, 0.05, -0.1],
        [-0.08, -0.1, -0.05, 0.1],
    ]
)


def fit_noise_cf(
    noise: BiTrajectory,
    grid: np.ndarray | None = None,
    init: NoiseFit | None = None,
    restarts: int = 3,
    maxiter: int = 4000,
) -> NoiseFit:
    """Fit (alpha, r11, r12, r22) of i.i.d. sub-Gaussian innovations.

    Nelder-Mead on the projected parameters, restarted from jittered copies
    of ``init`` (relative jitter on R, absolute on alpha); the best restart
    wins.
    """
    grid = default_cf_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape[1] != 2 or grid.shape[0] == 0:
        raise FitError("CF argument grid must be a non-empty (m, 2) array")
    ecf = empirical_joint_cf(noise, grid)
    if init is None:
        init = initial_noise_guess(noise)
    x0 = init.as_vector()
    trace = []
    best = None
    evaluations = 0
    for jitter in _RESTART_JITTER[: max(1, restarts)]:
        start = x0 + jitter * np.array([1.0, abs(x0[1]), abs(x0[1] * x0[3]) ** 0.5, abs(x0[3])])
        start = project_noise_params(start)
        if not math.isfinite(_penalised(start, grid, ecf)):
            trace.append(("non-finite start", start.tolist()))
            continue
        res = minimize(
            _penalised,
            start,
            args=(grid, ecf),
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-14, "maxiter": maxiter, "maxfev": 2 * maxiter},
        )
        evaluations += int(res.nfev)
        trace.append((res.message, res.x.tolist(), float(res.fun)))
        if math.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitError("CF-distance fit produced no finite objective", trace=trace)
    p = project_noise_params(best.x)
    obj = cf_distance(p, grid, ecf)
    if not math.isfinite(obj):
        raise FitError("projected CF-distance fit is not finite", trace=trace)
    try:
        cov = CovMatrix2(p[1], p[2], p[3])
    except CrossCodiffError as exc:
        raise FitError(f"fitted covariance is infeasible: {exc}", trace=trace) from exc
    return NoiseFit(float(p[0]), cov, obj, evaluations, bool(best.success))


def fit_pipeline(
    traj: BiTrajectory,
    h_min: int = 1,
    h_max: int = 10,
    diagonal: str = "separate",
    grid: np.ndarray | None = None,
    modulus_floor: float = MODULUS_FLOOR,
) -> FitResult:
    theta_fit = fit_theta_diagonal(traj, h_min, h_max, diagonal, modulus_floor)
    residuals = extract_noise(traj, theta_fit.theta)
    return FitResult(theta_fit, fit_noise_cf(residuals, grid))


# ------------------------------------------------------------ Monte Carlo study


@dataclass(frozen=True)
class McConfig:
    model: VarModel
    lengths: tuple[int, ...]
    replications: int = 200
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN
    h_min: int = 1
    h_max: int = 10
    diagonal: str = "separate"
    fit_noise: bool = True
    grid_half_width: float = 1.0
    grid_points: int = 5
    workers: int = 1

    def estimator_names(self) -> tuple[str, ...]:
        names = ("a1", "a4") if self.diagonal == "separate" else ("a",)
        if self.fit_noise:
            names += ("alpha", "r11", "r12", "r22")
        return names


@dataclass
class McSummary:
    lengths: list[int]
    estimators: tuple[str, ...]
    medians: dict[int, dict[str, float]]
    replications: int
    failures: dict[int, int]
    seed: int
    estimates: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def median(self, n: int, estimator: str) -> float:
        return self.medians[n][estimator]

    def rows(self):
        for n in self.lengths:
            for name in self.estimators:
                yield n, name, self.medians[n][name], self.failures[n]


def _replicate(config: McConfig, length_index: int, rep: int):
    n = config.lengths[length_index]
    rng = substream(config.seed, length_index, rep)
    traj = simulate(config.model, n, config.burn_in, rng)
    theta_fit = fit_theta_diagonal(traj, config.h_min, config.h_max, config.diagonal)
    row = [theta_fit.a4_hat] if theta_fit.tied else [theta_fit.a1_hat, theta_fit.a4_hat]
    if config.fit_noise:
        residuals = extract_noise(traj, theta_fit.theta)
        grid = default_cf_grid(config.grid_half_width, config.grid_points)
        nf = fit_noise_cf(residuals, grid)
        row += [nf.alpha_hat, nf.cov_hat.r11, nf.cov_hat.r12, nf.cov_hat.r22]
    return row


def _safe_replicate(args):
    config, li, rep = args
    try:
        return _replicate(config, li, rep)
    except (CrossCodiffError, ValueError, ArithmeticError) as exc:
        logger.info("replication n=%d rep=%d failed: %s", config.lengths[li], rep, exc)
        return None


def run_mc_study(config: McConfig, progress=None) -> McSummary:
    """Median estimates per trajectory length over seeded replications.

    Replication ``r`` at length index ``i`` always uses substream (seed, i, r),
    so results do not depend on ``workers`` or scheduling.  Failed
    replications are excluded from the medians and counted.
    """
    if config.replications < 1:
        raise ValueError("replications must be at least 1")
    if list(config.lengths) != sorted(config.lengths) or not config.lengths:
        raise ValueError("lengths must be a non-empty ascending sequence")
    names = config.estimator_names()
    tasks = [(config, li, r) for li in range(len(config.lengths)) for r in range(config.replications)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_safe_replicate, tasks, chunksize=8))
    else:
        results = []
        for task in tasks:
            results.append(_safe_replicate(task))
            if progress is not None:
                progress(len(results), len(tasks))
    medians, failures, estimates = {}, {}, {}
    for li, n in enumerate(config.lengths):
        block = results[li * config.replications : (li + 1) * config.replications]
        ok = [row for row in block if row is not None]
        failures[n] = len(block) - len(ok)
        arr = np.array(ok, dtype=float).reshape(len(ok), len(names))
        estimates[n] = arr
        if ok:
            medians[n] = {name: float(np.median(arr[:, i])) for i, name in enumerate(names)}
        else:
            medians[n] = {name: math.nan for name in names}
    return McSummary(list(config.lengths), names, medians, config.replications, failures, config.seed, estimates)


def true_parameters(model: VarModel, diagonal: str = "separate") -> dict[str, float]:
    """Truth in the same naming as :meth:`McConfig.estimator_names`."""
    th = model.theta
    out = {"a1": th.a1, "a4": th.a4} if diagonal == "separate" else {"a": th.a4}
    noise = model.noise
    alpha = noise.alpha if isinstance(noise, SubGaussianNoise) else 2.0
    if isinstance(noise, (GaussianNoise, SubGaussianNoise)):
        out.update(alpha=alpha, r11=noise.cov.r11, r12=noise.cov.r12, r22=noise.cov.r22)
    return out
