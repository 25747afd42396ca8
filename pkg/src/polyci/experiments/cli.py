"""Command-line front end for the simulation studies.

Each subcommand reads a JSON config, runs its study, and writes CSV
files plus a manifest into the output directory. Exit codes: 0 on
success, 2 for configuration problems.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ..inference import (
    ci_given_model,
    ci_given_signs,
    estimate_sigma,
    infinite_length_certificate,
)
from ..intervals import IntervalUnion
from ..lasso import LassoProblem, fit
from .config import ScenarioConfig, from_json_dict, to_json_dict
from .harness import (
    compute_floor_curves,
    run_coverage_check,
    run_heatmap,
    run_length_curve,
    run_quantile_study,
    write_coverage_csv,
    write_floorcurves_csv,
    write_heatmap_csv,
    write_lengthcurve_csv,
    write_manifest,
    write_quantiles_csv,
)

_DEFAULT_P_GRID = (20, 50, 100, 150, 200)
_DEFAULT_LAM_GRID = (1.0, 5.0, 10.0, 25.0, 50.0, 100.0)

# default support for the length curve: two rays around a bounded middle
_DEFAULT_CURVE = {
    "pieces": [["-inf", -2.0], [-1.0, 1.0], [2.0, "inf"]],
    "var": 1.0,
    "alpha": 0.05,
    "w_lo": -10.0,
    "w_hi": 10.0,
    "num": 801,
}


class ConfigError(ValueError):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _resolve_seed(cfg: dict, override) -> int:
    if override is not None:
        return int(override)
    if "seed" in cfg:
        return int(cfg["seed"])
    raise ConfigError("a seed is required (config key or --seed)")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario(cfg: dict, seed: int, **defaults) -> ScenarioConfig:
    merged = dict(defaults)
    merged.update(cfg)
    merged["seed"] = seed
    try:
        return from_json_dict(merged)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_lengthcurve(args) -> int:
    cfg = dict(_DEFAULT_CURVE)
    cfg.update(_load_config(args.config))
    seed = int(args.seed) if args.seed is not None else int(cfg.get("seed", 0))
    cfg["seed"] = seed
    try:
        pairs = [
            (float(lo), float(hi)) for lo, hi in cfg["pieces"]
        ]
        t = IntervalUnion.from_pairs(pairs)
        grid = np.linspace(
            float(cfg["w_lo"]), float(cfg["w_hi"]), int(cfg["num"])
        )
        rows, skipped = run_length_curve(
            t, float(cfg["var"]), float(cfg["alpha"]), grid
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad lengthcurve config: {exc}") from None
    out = _out_dir(args)
    write_lengthcurve_csv(out / "lengthcurve.csv", rows)
    write_manifest(out, cfg, seed)
    print(f"wrote {len(rows)} rows ({len(skipped)} grid points off-support)")
    return 0


def _cmd_heatmap(args) -> int:
    raw = _load_config(args.config)
    seed = _resolve_seed(raw, args.seed)
    p_values = [int(v) for v in raw.pop("p_values", _DEFAULT_P_GRID)]
    lam_values = [float(v) for v in raw.pop("lambda_values", _DEFAULT_LAM_GRID)]
    base = _scenario(
        raw,
        seed,
        n=100,
        p=p_values[0],
        reps=500,
        **{"lambda": lam_values[0]},
    )
    cells = run_heatmap(p_values, lam_values, base, workers=args.workers)
    out = _out_dir(args)
    write_heatmap_csv(out / "heatmap.csv", cells)
    resolved = to_json_dict(base)
    resolved["p_values"] = p_values
    resolved["lambda_values"] = lam_values
    write_manifest(out, resolved, seed)
    print(f"wrote {len(cells)} heatmap cells")
    return 0


def _cmd_quantiles(args) -> int:
    raw = _load_config(args.config)
    seed = _resolve_seed(raw, args.seed)
    norms = raw.pop("norms", None)
    base = _scenario(
        raw,
        seed,
        n=100,
        p=14,
        reps=10000,
        **{"lambda": 10.0, "beta_pattern": {"kind": "alternating", "scale": 1.0}},
    )
    studies = run_quantile_study(
        base,
        norms=None if norms is None else tuple(float(v) for v in norms),
        workers=args.workers,
    )
    out = _out_dir(args)
    write_quantiles_csv(out / "quantiles.csv", studies)
    write_floorcurves_csv(out / "floorcurves.csv", compute_floor_curves())
    resolved = to_json_dict(base)
    resolved["norms"] = [s.norm for s in studies]
    write_manifest(out, resolved, seed)
    excluded = {s.label: s.excluded for s in studies}
    print(f"wrote quantile curves for norms {list(excluded)}; "
          f"empty-model exclusions {excluded}")
    return 0


def _cmd_coverage(args) -> int:
    raw = _load_config(args.config)
    seed = _resolve_seed(raw, args.seed)
    estimate_variance = bool(raw.pop("estimate_variance", False))
    include_conditional = bool(raw.pop("include_conditional", True))
    base = _scenario(raw, seed, n=200, p=5, reps=20000, **{"lambda": 10.0})
    rows, _ = run_coverage_check(
        base,
        estimate_variance=estimate_variance,
        include_conditional=include_conditional,
        workers=args.workers,
    )
    out = _out_dir(args)
    write_coverage_csv(out / "coverage.csv", rows)
    resolved = to_json_dict(base)
    resolved["estimate_variance"] = estimate_variance
    resolved["include_conditional"] = include_conditional
    write_manifest(out, resolved, seed)
    for row in rows:
        print(
            f"{row.conditioning}: {row.empirical:.4f} "
            f"(nominal {row.nominal}, reps {row.accepted_reps})"
        )
    return 0


def _cmd_ci(args) -> int:
    raw = _load_config(args.config)
    try:
        X = np.asarray(raw["x"], dtype=float)
        y = np.asarray(raw["y"], dtype=float)
        lam = float(raw["lambda"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad ci config: {exc}") from None
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ConfigError("x must be a matrix and y a matching vector")
    alpha = float(raw.get("alpha", 0.05))
    seed = int(args.seed) if args.seed is not None else int(raw.get("seed", 0))
    res = fit(LassoProblem(X=X, y=y, lam=lam))
    if not res.model:
        raise ConfigError("the fit selected no variables; nothing to report")
    sigma2 = raw.get("sigma2")
    sigma2 = float(sigma2) if sigma2 is not None else estimate_sigma(X, y)
    gamma = raw.get("gamma")
    if gamma is None:
        g = np.zeros(len(res.model))
        g[0] = 1.0
    else:
        g = np.asarray(gamma, dtype=float)
        if g.shape != (len(res.model),):
            raise ConfigError(
                f"gamma must have length {len(res.model)} (the model size)"
            )
    half = alpha / 2.0
    ci_s = ci_given_signs(X, y, lam, g, sigma2, half, half, fit_result=res)
    ci_m = ci_given_model(X, y, lam, g, sigma2, half, half, fit_result=res)
    cert = infinite_length_certificate(X, y, lam, g, fit_result=res)
    payload = {
        "model": list(res.model),
        "signs": list(res.signs),
        "sigma2": sigma2,
        "signs_interval": {"lower": ci_s.lower, "upper": ci_s.upper},
        "model_interval": {
            "lower": ci_m.lower,
            "upper": ci_m.upper,
            "conditioning": ci_m.conditioning[0],
        },
        "certificate": {"verdict": cert.verdict, "side": cert.side},
    }
    out = _out_dir(args)
    with open(out / "ci.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out, {**raw, "seed": seed}, seed)
    print(json.dumps(payload, sort_keys=True))
    return 0


_COMMANDS = {
    "lengthcurve": _cmd_lengthcurve,
    "heatmap": _cmd_heatmap,
    "quantiles": _cmd_quantiles,
    "coverage": _cmd_coverage,
    "ci": _cmd_ci,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyci",
        description="Simulation studies for selective confidence intervals",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="JSON config path")
        cmd.add_argument("--seed", default=None, type=int)
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--workers", default=1, type=int)
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
