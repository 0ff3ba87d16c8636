"""Experiment configuration: TOML files, built-in presets and resolution.

A config file looks like::

    seed = 2020

    [model]
    a1 = 0.5
    a4 = 0.5          # a2, a3 default to 0
    noise = "subgaussian"
    alpha = 1.5
    r11 = 0.4
    r12 = 0.1
    r22 = 0.8

    [simulate]
    n = 10000
    burn_in = 1000

    [theory]
    h_max = 10
    j_trunc = 50      # or tail_tol = 1e-12 for adaptive truncation

    [fit]
    h_min = 1
    h_max = 10
    diagonal = "forward"   # separate | pooled | forward

    [mc]
    lengths = [1000, 10000, 50000]
    replications = 200
"""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from crosscodiff.errors import ConfigError, CrossCodiffError
from crosscodiff.fitting import DIAGONAL_MODES, McConfig
from crosscodiff.stable_noise import CovMatrix2, GaussianNoise, SubGaussianNoise
from crosscodiff.var_process import DEFAULT_BURN_IN, DEFAULT_TRUNCATION, Theta, VarModel

DEFAULT_SEED = 2020

_SECTIONS = {
    "model": {"a1", "a2", "a3", "a4", "noise", "alpha", "r11", "r12", "r22"},
    "simulate": {"n", "burn_in"},
    "theory": {"h_max", "j_trunc", "tail_tol"},
    "fit": {"h_min", "h_max", "diagonal", "grid_half_width", "grid_points"},
    "mc": {"lengths", "replications", "workers", "burn_in"},
}


def _model(a1, a2, a3, a4, noise, r11, r12, r22, alpha=None):
    m = {"a1": a1, "a2": a2, "a3": a3, "a4": a4, "noise": noise, "r11": r11, "r12": r12, "r22": r22}
    if alpha is not None:
        m["alpha"] = alpha
    return m


# Reference models.  The two mc_* presets also carry the Monte Carlo length
# ladder at desk scale (200 replications).
PRESETS: dict[str, dict] = {
    "traj_gauss_full": {"model": _model(0.6, 0.2, 0.1, 0.9, "gaussian", 0.3, 0.2, 0.3)},
    "traj_gauss_diag": {"model": _model(0.6, 0.0, 0.0, 0.9, "gaussian", 0.3, 0.2, 0.3)},
    "traj_subgauss_full": {"model": _model(0.6, 0.2, 0.1, 0.7, "subgaussian", 0.4, 0.3, 0.3, alpha=1.7)},
    "traj_subgauss_diag": {"model": _model(0.6, 0.0, 0.0, 0.7, "subgaussian", 0.4, 0.3, 0.3, alpha=1.7)},
    "gauss_indep": {"model": _model(0.6, 0.0, 0.0, 0.3, "gaussian", 0.5, 0.0, 0.5)},
    "gauss_diag": {"model": _model(0.6, 0.0, 0.0, 0.3, "gaussian", 0.5, 0.3, 0.5)},
    "gauss_full": {"model": _model(0.6, 0.1, 0.4, 0.3, "gaussian", 0.5, 0.3, 0.5)},
    "subgauss_diag": {"model": _model(0.6, 0.0, 0.0, 0.4, "subgaussian", 0.4, 0.3, 0.3, alpha=1.5)},
    "subgauss_full": {"model": _model(0.6, 0.3, 0.1, 0.4, "subgaussian", 0.4, 0.3, 0.3, alpha=1.5)},
    "mc_equal_rates": {
        "model": _model(0.5, 0.0, 0.0, 0.5, "subgaussian", 0.4, 0.1, 0.8, alpha=1.5),
        "fit": {"diagonal": "forward"},
        "mc": {"lengths": [1000, 10000, 50000], "replications": 200},
    },
    "mc_distinct_rates": {
        "model": _model(0.3, 0.0, 0.0, 0.5, "subgaussian", 0.3, 0.1, 0.4, alpha=1.5),
        "fit": {"diagonal": "separate"},
        "mc": {"lengths": [1000, 10000, 50000], "replications": 200},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: VarModel
    seed: int = DEFAULT_SEED
    n: int = 10_000
    burn_in: int = DEFAULT_BURN_IN
    theory_h_max: int = 10
    j_trunc: int = DEFAULT_TRUNCATION
    tail_tol: float | None = None
    fit_h_min: int = 1
    fit_h_max: int = 10
    diagonal: str = "separate"
    grid_half_width: float = 1.0
    grid_points: int = 5
    lengths: tuple[int, ...] = (1000, 10000, 50000)
    replications: int = 200
    workers: int = 1
    raw: dict = field(default_factory=dict, compare=False)

    def mc_config(self) -> McConfig:
        return McConfig(
            model=self.model,
            lengths=self.lengths,
            replications=self.replications,
            seed=self.seed,
            burn_in=self.burn_in,
            h_min=self.fit_h_min,
            h_max=self.fit_h_max,
            diagonal=self.diagonal,
            grid_half_width=self.grid_half_width,
            grid_points=self.grid_points,
            workers=self.workers,
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("raw")
        theta = self.model.theta
        noise = self.model.noise
        model = {"a1": theta.a1, "a2": theta.a2, "a3": theta.a3, "a4": theta.a4, "noise": noise.kind}
        model.update(r11=noise.cov.r11, r12=noise.cov.r12, r22=noise.cov.r22)
        if isinstance(noise, SubGaussianNoise):
            model["alpha"] = noise.alpha
        out["model"] = model
        out["lengths"] = list(self.lengths)
        return out


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _int(section: dict, key: str, default, minimum: int):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def _float(section: dict, key: str, default=None) -> float:
    value = section.get(key, default)
    if value is None:
        raise ConfigError(f"missing required key {key!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key} must be a finite number, got {value!r}")
    return float(value)


def _build_model(section: dict) -> VarModel:
    if not section:
        raise ConfigError("config has no [model] section")
    theta = Theta(*(_float(section, k, 0.0) for k in ("a1", "a2", "a3", "a4")))
    kind = section.get("noise", "gaussian")
    try:
        cov = CovMatrix2(_float(section, "r11"), _float(section, "r12", 0.0), _float(section, "r22"))
        if kind == "gaussian":
            noise = GaussianNoise(cov)
        elif kind == "subgaussian":
            noise = SubGaussianNoise(_float(section, "alpha"), cov)
        else:
            raise ConfigError(f"noise must be 'gaussian' or 'subgaussian', got {kind!r}")
        return VarModel(theta, noise)
    except ConfigError:
        raise
    except CrossCodiffError as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def resolve(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a raw config mapping and apply CLI overrides.

    ``overrides`` may carry ``seed``, ``n``, ``h_max``, ``fit_h_max``,
    ``j_trunc`` and ``replications``; ``None`` values are ignored.
    """
    raw = copy.deepcopy(raw)
    for key, value in raw.items():
        if key == "seed":
            continue
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"[{key}] must be a table")
        unknown = set(value) - _SECTIONS[key]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{key}]: {', '.join(sorted(unknown))}")
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}
    sim = dict(raw.get("simulate", {}))
    theory = dict(raw.get("theory", {}))
    fit = dict(raw.get("fit", {}))
    mc = dict(raw.get("mc", {}))
    if "n" in ov:
        sim["n"] = ov["n"]
    if "h_max" in ov:
        theory["h_max"] = ov["h_max"]
        fit.setdefault("h_max", ov["h_max"])
    if "fit_h_max" in ov:
        fit["h_max"] = ov["fit_h_max"]
    if "j_trunc" in ov:
        theory["j_trunc"] = ov["j_trunc"]
        theory.pop("tail_tol", None)
    if "replications" in ov:
        mc["replications"] = ov["replications"]
    seed = ov.get("seed", raw.get("seed", DEFAULT_SEED))
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")

    model = _build_model(raw.get("model", {}))
    diagonal = fit.get("diagonal", "separate")
    if diagonal not in DIAGONAL_MODES:
        raise ConfigError(f"fit.diagonal must be one of {DIAGONAL_MODES}, got {diagonal!r}")
    tail_tol = theory.get("tail_tol")
    if tail_tol is not None and not (isinstance(tail_tol, (int, float)) and tail_tol > 0):
        raise ConfigError(f"theory.tail_tol must be positive, got {tail_tol!r}")
    lengths = mc.get("lengths", [1000, 10000, 50000])
    if (
        not isinstance(lengths, list)
        or not lengths
        or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 2 for n in lengths)
    ):
        raise ConfigError(f"mc.lengths must be a non-empty list of integers >= 2, got {lengths!r}")
    if lengths != sorted(lengths):
        raise ConfigError("mc.lengths must be ascending")
    fit_h_max = _int(fit, "h_max", 10, 1)
    cfg = ExperimentConfig(
        model=model,
        seed=seed,
        n=_int(sim, "n", 10_000, 2),
        burn_in=_int(mc if "burn_in" in mc else sim, "burn_in", DEFAULT_BURN_IN, 0),
        theory_h_max=_int(theory, "h_max", 10, 0),
        j_trunc=_int(theory, "j_trunc", DEFAULT_TRUNCATION, 1),
        tail_tol=float(tail_tol) if tail_tol is not None else None,
        fit_h_min=_int(fit, "h_min", 1, 1),
        fit_h_max=fit_h_max,
        diagonal=diagonal,
        grid_half_width=_float(fit, "grid_half_width", 1.0),
        grid_points=_int(fit, "grid_points", 5, 2),
        lengths=tuple(lengths),
        replications=_int(mc, "replications", 200, 1),
        workers=_int(mc, "workers", 1, 1),
        raw=raw,
    )
    if cfg.fit_h_min > cfg.fit_h_max:
        raise ConfigError(f"fit.h_min ({cfg.fit_h_min}) exceeds fit.h_max ({cfg.fit_h_max})")
    if cfg.grid_half_width <= 0:
        raise ConfigError("fit.grid_half_width must be positive")
    return cfg


def load(path=None, preset: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Resolve a preset, a TOML file, or a file layered over a preset."""
    raw: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}")
        raw = copy.deepcopy(PRESETS[preset])
    if path is not None:
        raw = _merge(raw, load_toml(Path(path)))
    if not raw:
        raise ConfigError("no configuration given: pass --config and/or --preset")
    return resolve(raw, overrides)
