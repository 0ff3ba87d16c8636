"""Command-line interface: ``crosscodiff simulate | theory | estimate | fit | mc``.

Exit codes: 0 success, 2 config/validation error, 3 numerical or fit
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import datetime as _dt
import logging
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from crosscodiff import __version__
from crosscodiff import config as cfgmod
from crosscodiff import io
from crosscodiff.errors import (
    ConfigError,
    DegenerateCFError,
    FitError,
    LagRangeError,
    ModelDomainError,
    ParameterDomainError,
)
from crosscodiff.estimator import empirical_codiff_series
from crosscodiff.fitting import (
    FitResult,
    default_cf_grid,
    extract_noise,
    fit_noise_cf,
    fit_theta_diagonal,
    run_mc_study,
)
from crosscodiff.rng import make_rng
from crosscodiff.theory import theoretical_series
from crosscodiff.var_process import ma_weights, simulate

logger = logging.getLogger("crosscodiff")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _versions() -> dict:
    return {
        "crosscodiff": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
    }


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _write_manifest(path: Path, command: str, argv, config, outputs, started: float, extra=None):
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": config.to_dict() if config is not None else None,
        "seed": config.seed if config is not None else None,
        "versions": _versions(),
        "outputs": [str(p) for p in outputs],
        "started_at": _dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat(),
        "wall_clock_s": round(time.time() - started, 6),
    }
    if extra:
        manifest.update(extra)
    io.write_json(manifest, path)
    return path


def _load_config(args) -> cfgmod.ExperimentConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "n": getattr(args, "n", None),
        "h_max": getattr(args, "h_max", None) if args.command != "fit" else None,
        "fit_h_max": getattr(args, "h_max", None) if args.command == "fit" else None,
        "j_trunc": getattr(args, "j_trunc", None),
        "replications": getattr(args, "replications", None),
    }
    noise = getattr(args, "noise", None)
    if noise is None:
        return cfgmod.load(args.config, args.preset, overrides)
    raw = copy.deepcopy(cfgmod.PRESETS[args.preset]) if args.preset else {}
    if args.config:
        raw = cfgmod._merge(raw, cfgmod.load_toml(args.config))
    raw.setdefault("model", {})["noise"] = noise
    return cfgmod.resolve(raw, overrides)


def cmd_simulate(args) -> int:
    started = time.time()
    cfg = _load_config(args)
    rng = make_rng(cfg.seed)
    traj = simulate(cfg.model, cfg.n, cfg.burn_in, rng)
    out = Path(args.out)
    io.write_trajectory(traj, out)
    _write_manifest(_manifest_path(out), "simulate", args.argv, cfg, [out], started)
    logger.info("wrote %d points to %s", len(traj), out)
    return EXIT_OK


def cmd_theory(args) -> int:
    started = time.time()
    cfg = _load_config(args)
    j_trunc = cfg.j_trunc
    if cfg.tail_tol is not None:
        j_trunc = max(1, ma_weights(cfg.model.theta, cfg.tail_tol).order)
    series = theoretical_series(cfg.model.theta, cfg.model.noise, cfg.theory_h_max, j_trunc)
    out = Path(args.out)
    io.write_series(series, out)
    _write_manifest(_manifest_path(out), "theory", args.argv, cfg, [out], started, {"j_trunc_used": j_trunc})
    return EXIT_OK


def cmd_estimate(args) -> int:
    started = time.time()
    traj = io.read_trajectory(args.trajectory)
    series = empirical_codiff_series(traj, args.h_max)
    out = Path(args.out)
    io.write_series(series, out)
    extra = {
        "input": str(args.trajectory),
        "h_max": args.h_max,
        "imag_diagnostic": dict(zip(series.lags.tolist(), series.imag.tolist())),
    }
    _write_manifest(_manifest_path(out), "estimate", args.argv, None, [out], started, extra)
    return EXIT_OK


def cmd_fit(args) -> int:
    started = time.time()
    cfg = _load_config(args)
    traj = io.read_trajectory(args.trajectory)
    try:
        theta_fit = fit_theta_diagonal(traj, cfg.fit_h_min, cfg.fit_h_max, cfg.diagonal)
    except (DegenerateCFError, FitError) as exc:
        raise FitError(f"decay fit: {exc}") from exc
    residuals = extract_noise(traj, theta_fit.theta)
    try:
        noise_fit = fit_noise_cf(residuals, default_cf_grid(cfg.grid_half_width, cfg.grid_points))
    except FitError as exc:
        raise FitError(f"noise CF fit: {exc}") from exc
    result = FitResult(theta_fit, noise_fit)
    out = Path(args.out)
    payload = {"input": str(args.trajectory), "n": len(traj), **result.to_dict()}
    io.write_json(payload, out)
    _write_manifest(_manifest_path(out), "fit", args.argv, cfg, [out], started)
    return EXIT_OK


def cmd_mc(args) -> int:
    started = time.time()
    cfg = _load_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(done, total):
        if done % 50 == 0 or done == total:
            logger.info("replication %d/%d", done, total)

    summary = run_mc_study(cfg.mc_config(), progress=progress)
    csv_path = io.write_mc_summary(summary, out_dir / "summary.csv")
    manifest = out_dir / "manifest.json"
    _write_manifest(manifest, "mc", args.argv, cfg, [csv_path], started, {"failures": summary.failures})
    return EXIT_OK


def _add_config_args(p):
    p.add_argument("--config", type=Path, help="TOML experiment config")
    p.add_argument("--preset", choices=sorted(cfgmod.PRESETS), help="built-in reference configuration")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crosscodiff", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a VAR(1) trajectory to CSV")
    _add_config_args(p)
    p.add_argument("--n", type=int, help="trajectory length (overrides config)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="theoretical cross-codifference to CSV")
    _add_config_args(p)
    p.add_argument("--h-max", type=int)
    p.add_argument("--j-trunc", type=int)
    p.add_argument("--noise", choices=["gaussian", "subgaussian"], help="override the noise family")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("estimate", help="empirical cross-codifference of a trajectory CSV")
    p.add_argument("trajectory", type=Path)
    p.add_argument("--h-max", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("fit", help="fit diagonal Theta and sub-Gaussian noise to a trajectory CSV")
    p.add_argument("trajectory", type=Path)
    _add_config_args(p)
    p.add_argument("--h-max", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mc", help="Monte Carlo median study over a length ladder")
    _add_config_args(p)
    p.add_argument("--replications", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParameterDomainError, LagRangeError) as exc:
        print(f"crosscodiff: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelDomainError, DegenerateCFError, FitError, FloatingPointError) as exc:
        print(f"crosscodiff: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, io.FormatError) as exc:
        print(f"crosscodiff: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
