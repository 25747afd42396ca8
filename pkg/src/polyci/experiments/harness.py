"""Seeded Monte Carlo studies over the selective-inference pipeline.

Every random quantity is derived from the scenario seed through named
substreams (one per repetition), so results are identical no matter how
work is split across processes. Replications are independent; the
collector sorts by repetition index before any aggregation.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..inference import (
    ci_given_model,
    ci_given_signs,
    empty_model_interval,
    estimate_sigma,
    infinite_length_certificate,
)
from ..intervals import IntervalUnion
from ..lasso import LassoProblem, fit
from ..geometry import make_contrast
from ..truncgauss import ci_location_many, quantile_floor
from .config import ScenarioConfig, beta_vector, config_hash

_MAX_REDRAWS = 50
_REP_CHUNK = 256

# substream tags: (tag, *indices, rep) keys the per-repetition generator
_TAG_HM_DESIGN, _TAG_HM_REP = 10, 11
_TAG_Q_DESIGN, _TAG_Q_REP = 20, 21
_TAG_COV_DESIGN, _TAG_COV_REP = 30, 31


class InsufficientDataError(RuntimeError):
    """A requested conditioning event has too few accepted draws."""


@dataclass(frozen=True)
class RepRecord:
    rep: int
    model_size: int
    verdict: str | None
    signs_lower: float | None
    signs_upper: float | None
    model_lower: float | None
    model_upper: float | None
    length: float | None
    boundary_flag: bool
    redraws: int


@dataclass(frozen=True)
class HeatmapCell:
    p: int
    lam: float
    fraction_certified: float
    min_ratio: float | None
    max_ratio: float | None
    reps: int


@dataclass(frozen=True)
class NormStudy:
    label: str
    norm: float
    kappas: tuple[float, ...]
    quantiles: tuple[float, ...]
    fit_a: float
    fit_b: float
    excluded: int
    records: tuple[RepRecord, ...]


@dataclass(frozen=True)
class CoverageRow:
    conditioning: str
    nominal: float
    empirical: float
    accepted_reps: int


def make_design(n: int, p: int, rho: float, seed) -> np.ndarray:
    """Design matrix with i.i.d. rows from the equicorrelated Gaussian.

    The covariance (1-rho) I + rho 11' has the closed-form square root
    a I + b 11', which is applied to a standard normal draw. ``seed``
    may be an integer, a SeedSequence, or a Generator.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    a = math.sqrt(1.0 - rho)
    b = (math.sqrt(1.0 - rho + p * rho) - a) / p
    Z = rng.standard_normal((n, p))
    return a * Z + b * Z.sum(axis=1, keepdims=True)


def _rep_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))
    )


def _draw_accepted(rng, X, mu, lam):
    """Draw responses until the fit is off the selection boundary."""
    for redraws in range(_MAX_REDRAWS + 1):
        y = mu + rng.standard_normal(mu.shape[0])
        res = fit(LassoProblem(X=X, y=y, lam=lam))
        if not res.boundary_flag:
            return y, res, redraws
    raise RuntimeError("exceeded the boundary redraw budget")


def _pattern_beta(p: int, norm: float) -> np.ndarray:
    """Alternating-support coefficient vector scaled to a given norm."""
    v = np.zeros(p)
    v[0::2] = 1.0
    if norm == 0.0:
        return np.zeros(p)
    return v * (norm / float(np.linalg.norm(v)))


# ------------------------------------------------------------ length curve


def run_length_curve(t: IntervalUnion, var, alpha, w_grid):
    """Interval endpoints over a grid of observed values.

    Grid points outside the support are skipped and returned separately
    so callers can report them.
    """
    inside, skipped = [], []
    for w in w_grid:
        (inside if t.contains(float(w)) else skipped).append(float(w))
    rows = []
    if inside:
        w_arr = np.asarray(inside)
        lower, upper = ci_location_many(
            t, var, w_arr, alpha / 2.0, alpha / 2.0
        )
        rows = [
            (w, float(lo), float(hi), float(hi - lo))
            for w, lo, hi in zip(inside, lower, upper)
        ]
    return rows, skipped


# ---------------------------------------------------------------- heatmap


def _heatmap_cell_task(task) -> HeatmapCell:
    cfg, p, lam, p_idx, lam_idx = task
    X = make_design(
        cfg.n,
        p,
        cfg.rho,
        np.random.SeedSequence(
            entropy=int(cfg.seed), spawn_key=(_TAG_HM_DESIGN, p_idx, lam_idx)
        ),
    )
    beta = np.zeros(p)
    beta[: p // 2] = 1.0 / math.sqrt(cfg.n)
    mu = X @ beta
    certified = 0
    ratios = []
    for rep in range(cfg.reps):
        rng = _rep_rng(cfg.seed, _TAG_HM_REP, p_idx, lam_idx, rep)
        y, res, _ = _draw_accepted(rng, X, mu, lam)
        is_certified = False
        if len(res.model) > 1:
            gamma = np.zeros(len(res.model))
            gamma[0] = 1.0
            cert = infinite_length_certificate(
                X, y, lam, gamma, cap=cfg.cap, fit_result=res
            )
            is_certified = cert.verdict == "certified_infinite"
        if is_certified:
            certified += 1
        else:
            ratios.append(len(res.model) / p)
    return HeatmapCell(
        p=p,
        lam=float(lam),
        fraction_certified=certified / cfg.reps,
        min_ratio=min(ratios) if ratios else None,
        max_ratio=max(ratios) if ratios else None,
        reps=cfg.reps,
    )


def _pool_map(fn, tasks, workers):
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def run_heatmap(p_values, lam_values, base: ScenarioConfig, workers=1):
    """One certificate-frequency cell per (p, lambda) pair.

    ``base`` supplies n, rho, reps, seed, and cap; its own p and lambda
    are ignored in favor of the grid.
    """
    tasks = [
        (base, int(p), float(lam), pi, li)
        for pi, p in enumerate(p_values)
        for li, lam in enumerate(lam_values)
    ]
    return tuple(_pool_map(_heatmap_cell_task, tasks, workers))


# ----------------------------------------------------------- quantile study


def _quantile_chunk_task(task):
    cfg, norm_idx, norm, rep_lo, rep_hi = task
    X = make_design(
        cfg.n,
        cfg.p,
        cfg.rho,
        np.random.SeedSequence(
            entropy=int(cfg.seed), spawn_key=(_TAG_Q_DESIGN,)
        ),
    )
    mu = X @ _pattern_beta(cfg.p, norm)
    half = cfg.alpha / 2.0
    records, excluded = [], 0
    for rep in range(rep_lo, rep_hi):
        rng = _rep_rng(cfg.seed, _TAG_Q_REP, norm_idx, rep)
        y, res, redraws = _draw_accepted(rng, X, mu, cfg.lam)
        if not res.model:
            excluded += 1
            continue
        gamma = np.zeros(len(res.model))
        gamma[0] = 1.0
        ci = ci_given_model(
            X,
            y,
            cfg.lam,
            gamma,
            1.0,
            half,
            half,
            cap=cfg.cap,
            fit_result=res,
        )
        records.append(
            RepRecord(
                rep=rep,
                model_size=len(res.model),
                verdict=None,
                signs_lower=None,
                signs_upper=None,
                model_lower=ci.lower,
                model_upper=ci.upper,
                length=ci.length,
                boundary_flag=False,
                redraws=redraws,
            )
        )
    return norm_idx, records, excluded


_DEFAULT_KAPPAS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10)) + (0.99,)


def run_quantile_study(
    cfg: ScenarioConfig, norms=None, kappas=None, workers=1
):
    """Length quantiles of the model-conditional interval, per signal norm."""
    if norms is None:
        root = math.sqrt(cfg.p / 2.0)
        norms = (0.0, root / 10.0, root)
    kappas = _DEFAULT_KAPPAS if kappas is None else tuple(kappas)
    tasks = []
    for norm_idx, norm in enumerate(norms):
        for lo in range(0, cfg.reps, _REP_CHUNK):
            tasks.append(
                (cfg, norm_idx, float(norm), lo, min(lo + _REP_CHUNK, cfg.reps))
            )
    chunks = _pool_map(_quantile_chunk_task, tasks, workers)
    studies = []
    for norm_idx, norm in enumerate(norms):
        records = []
        excluded = 0
        for idx, recs, exc in chunks:
            if idx == norm_idx:
                records.extend(recs)
                excluded += exc
        records.sort(key=lambda r: r.rep)
        lengths = [r.length for r in records]
        if len(lengths) < 10:
            raise InsufficientDataError(
                f"only {len(lengths)} nonempty fits at norm {norm}"
            )
        quantiles = tuple(
            float(q) for q in np.quantile(lengths, np.asarray(kappas))
        )
        a, b = fit_reciprocal_curve(list(zip(kappas, quantiles)))
        studies.append(
            NormStudy(
                label=f"{norm:.6g}",
                norm=float(norm),
                kappas=kappas,
                quantiles=quantiles,
                fit_a=a,
                fit_b=b,
                excluded=excluded,
                records=tuple(records),
            )
        )
    return tuple(studies)


# ---------------------------------------------------------------- coverage


def _coverage_chunk_task(task):
    cfg, estimate_variance, rep_lo, rep_hi = task
    X = make_design(
        cfg.n,
        cfg.p,
        cfg.rho,
        np.random.SeedSequence(
            entropy=int(cfg.seed), spawn_key=(_TAG_COV_DESIGN,)
        ),
    )
    mu = X @ beta_vector(cfg)
    half = cfg.alpha / 2.0
    out = []
    for rep in range(rep_lo, rep_hi):
        rng = _rep_rng(cfg.seed, _TAG_COV_REP, rep)
        y, res, redraws = _draw_accepted(rng, X, mu, cfg.lam)
        if not res.model:
            ci = empty_model_interval(float(rng.uniform()), half, half)
            covered = ci.lower == 0.0  # the empty-model target is zero
            rec = RepRecord(
                rep=rep,
                model_size=0,
                verdict=None,
                signs_lower=ci.lower,
                signs_upper=ci.upper,
                model_lower=ci.lower,
                model_upper=ci.upper,
                length=0.0,
                boundary_flag=False,
                redraws=redraws,
            )
            out.append((rec, covered, covered, (), ()))
            continue
        gamma = np.zeros(len(res.model))
        gamma[0] = 1.0
        sigma2 = estimate_sigma(X, y) if estimate_variance else 1.0
        spec = make_contrast(X, res.model, gamma, sigma2)
        target = spec.target(mu)
        ci_s = ci_given_signs(
            X, y, cfg.lam, gamma, sigma2, half, half, fit_result=res
        )
        ci_m = ci_given_model(
            X,
            y,
            cfg.lam,
            gamma,
            sigma2,
            half,
            half,
            cap=cfg.cap,
            fit_result=res,
        )
        rec = RepRecord(
            rep=rep,
            model_size=len(res.model),
            verdict=None,
            signs_lower=ci_s.lower,
            signs_upper=ci_s.upper,
            model_lower=ci_m.lower,
            model_upper=ci_m.upper,
            length=ci_m.length,
            boundary_flag=False,
            redraws=redraws,
        )
        out.append(
            (
                rec,
                ci_s.lower <= target <= ci_s.upper,
                ci_m.lower <= target <= ci_m.upper,
                res.model,
                res.signs,
            )
        )
    return out


def run_coverage_check(
    cfg: ScenarioConfig,
    *,
    estimate_variance=False,
    include_conditional=True,
    workers=1,
):
    """Empirical coverage for both interval constructions.

    Unconditional rows average over every repetition (empty models enter
    through the randomized convention). Conditional rows restrict to the
    most frequent sign event and the most frequent model; they require
    at least 1000 accepted draws each.
    """
    tasks = [
        (cfg, bool(estimate_variance), lo, min(lo + _REP_CHUNK, cfg.reps))
        for lo in range(0, cfg.reps, _REP_CHUNK)
    ]
    results = []
    for chunk in _pool_map(_coverage_chunk_task, tasks, workers):
        results.extend(chunk)
    results.sort(key=lambda item: item[0].rep)
    records = tuple(item[0] for item in results)
    cov_s = np.array([item[1] for item in results])
    cov_m = np.array([item[2] for item in results])
    nominal = 1.0 - cfg.alpha
    rows = [
        CoverageRow(
            "signs_unconditional", nominal, float(cov_s.mean()), len(results)
        ),
        CoverageRow(
            "model_unconditional", nominal, float(cov_m.mean()), len(results)
        ),
    ]
    if include_conditional:
        sign_keys = {}
        model_keys = {}
        for item in results:
            _, _, _, model, signs = item
            if model:
                sign_keys.setdefault((model, signs), []).append(item)
                model_keys.setdefault(model, []).append(item)
        if not sign_keys:
            raise InsufficientDataError("no nonempty models were selected")
        modal_sign = max(sign_keys, key=lambda k: (len(sign_keys[k]), k))
        modal_model = max(model_keys, key=lambda k: (len(model_keys[k]), k))
        sign_items = sign_keys[modal_sign]
        model_items = model_keys[modal_model]
        if len(sign_items) < 1000 or len(model_items) < 1000:
            raise InsufficientDataError(
                "modal conditioning events have "
                f"{len(sign_items)} and {len(model_items)} accepted draws; "
                "need 1000 each"
            )
        rows.append(
            CoverageRow(
                "signs_conditional_modal",
                nominal,
                float(np.mean([it[1] for it in sign_items])),
                len(sign_items),
            )
        )
        rows.append(
            CoverageRow(
                "model_conditional_modal",
                nominal,
                float(np.mean([it[2] for it in model_items])),
                len(model_items),
            )
        )
    return rows, records


# ----------------------------------------------------------- reciprocal fit


def fit_reciprocal_curve(points):
    """Least-squares (a, b) for the model q = (a + b*kappa)/(1 - kappa).

    The model is linear in (a, b), so the normal equations are solved in
    closed form. Needs at least three points and at least two distinct
    kappa values.
    """
    pts = [(float(k), float(q)) for k, q in points]
    if len(pts) < 3:
        raise ValueError("need at least three points")
    if any(not 0.0 < k < 1.0 for k, _ in pts):
        raise ValueError("kappa values must lie in (0, 1)")
    if len({k for k, _ in pts}) < 2:
        raise ValueError("kappa values are degenerate")
    u = np.array([1.0 / (1.0 - k) for k, _ in pts])
    v = np.array([k / (1.0 - k) for k, _ in pts])
    q = np.array([q for _, q in pts])
    suu, suv, svv = float(u @ u), float(u @ v), float(v @ v)
    ru, rv = float(u @ q), float(v @ q)
    det = suu * svv - suv * suv
    if abs(det) <= 1e-12 * max(suu * svv, 1.0):
        raise ValueError("normal equations are singular")
    a = (svv * ru - suv * rv) / det
    b = (suu * rv - suv * ru) / det
    return a, b


# ------------------------------------------------------------- floor curves


def compute_floor_curves(
    thetas=(-2.0, -1.0, 0.0), kappas=None, var=1.0, alpha=0.05
):
    """Length-quantile floors on the half-line support, per location."""
    t = IntervalUnion.from_pairs([(-math.inf, 0.0)])
    if kappas is None:
        kappas = np.linspace(0.50, 0.99, 99)
    rows = []
    for theta in thetas:
        for kappa in kappas:
            rows.append(
                (
                    float(theta),
                    float(kappa),
                    quantile_floor(float(theta), var, t, float(kappa), alpha),
                )
            )
    return rows


# ------------------------------------------------------------------ output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_lengthcurve_csv(path, rows):
    _write_csv(path, ["w", "lower", "upper", "length"], rows)


def write_heatmap_csv(path, cells):
    _write_csv(
        path,
        ["p", "lambda", "fraction_certified", "min_ratio", "max_ratio", "reps"],
        [
            (c.p, c.lam, c.fraction_certified, c.min_ratio, c.max_ratio, c.reps)
            for c in cells
        ],
    )


def write_quantiles_csv(path, studies):
    rows = []
    for s in studies:
        for k, q in zip(s.kappas, s.quantiles):
            rows.append((s.label, k, q, s.fit_a, s.fit_b))
    _write_csv(path, ["norm_label", "kappa", "quantile", "fit_a", "fit_b"], rows)


def write_floorcurves_csv(path, rows):
    _write_csv(path, ["theta", "kappa", "r"], rows)


def write_coverage_csv(path, rows):
    _write_csv(
        path,
        ["conditioning", "nominal", "empirical", "accepted_reps"],
        [(r.conditioning, r.nominal, r.empirical, r.accepted_reps) for r in rows],
    )


def write_manifest(out_dir, resolved_config: dict, seed: int):
    payload = {
        "config_hash": config_hash(resolved_config),
        "seed": int(seed),
        "version": __version__,
    }
    path = f"{out_dir}/manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
