"""Confidence intervals conditional on a selected model, plus the
certificate that flags conditionings whose expected interval length is
infinite.

Two interval constructions are offered: one conditioning on the model
and the realized signs (a single line section) and one conditioning on
the model alone (the union of sections over sign vectors). Both reduce
to quantile problems for a location family of truncated Gaussians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CapacityError,
    ContrastSpec,
    Polyhedron,
    build_event_polyhedron,
    line_section,
    make_contrast,
    truncation_union,
    unboundedness_probe,
)
from .intervals import IntervalUnion
from .lasso import LassoFit, LassoProblem, fit
from .truncgauss import ci_location


class BoundarySelectionError(RuntimeError):
    """The fit sits on the selection-event boundary; inference would be
    conditioning on a measure-zero event, so the caller should redraw."""


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level_spec: tuple[float, float]
    conditioning: tuple

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError("interval endpoints out of order")

    @property
    def length(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class LengthCertificate:
    """Outcome of the ex-post infinite-expected-length check.

    ``certified_infinite`` means the model-conditional truncation set at
    the witness point is bounded on ``side``; ``not_certified`` only
    means this sufficient condition failed at the observed data, not
    that the expected length is finite.
    """

    verdict: str
    side: str | None
    model: tuple[int, ...]
    witness: np.ndarray | None

    def __post_init__(self):
        if self.verdict not in (
            "certified_infinite",
            "not_certified",
            "undecided_capacity",
        ):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if (self.side is not None) != (self.verdict == "certified_infinite"):
            raise ValueError("side is set exactly when certified")


def _checked_fit(X, y, lam, fit_result=None) -> LassoFit:
    res = fit_result
    if res is None:
        res = fit(LassoProblem(X=np.asarray(X, float), y=np.asarray(y, float), lam=lam))
    if res.boundary_flag:
        raise BoundarySelectionError(
            "fit is on a selection boundary; redraw before inference"
        )
    return res


def empty_model_interval(
    u: float, alpha1: float, alpha2: float
) -> ConfidenceInterval:
    """Randomized degenerate interval used when nothing is selected.

    The target is zero by convention; the interval is {0} with
    probability 1 - alpha and {1} otherwise, driven by the caller's
    uniform variate so the harness controls the stream.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must be a uniform variate in [0, 1]")
    point = 0.0 if u < 1.0 - (alpha1 + alpha2) else 1.0
    return ConfidenceInterval(
        lower=point,
        upper=point,
        level_spec=(alpha1, alpha2),
        conditioning=("empty_model_randomized", point),
    )


def _interval_from_union(
    t: IntervalUnion,
    w: float,
    var: float,
    alpha1: float,
    alpha2: float,
    conditioning: tuple,
) -> ConfidenceInterval:
    lower, upper = ci_location(t, var, w, alpha1, alpha2)
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        level_spec=(alpha1, alpha2),
        conditioning=conditioning,
    )


def ci_given_signs(
    X,
    y,
    lam: float,
    gamma,
    sigma2: float,
    alpha1: float,
    alpha2: float,
    *,
    empty_model_u: float | None = None,
    fit_result: LassoFit | None = None,
) -> ConfidenceInterval:
    """Interval for gamma' beta_model conditional on (model, signs)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    res = _checked_fit(X, y, lam, fit_result)
    if not res.model:
        if empty_model_u is None:
            raise ValueError(
                "empty model: pass empty_model_u for the randomized interval"
            )
        return empty_model_interval(empty_model_u, alpha1, alpha2)
    spec = make_contrast(X, res.model, gamma, sigma2)
    w = float(spec.eta @ y)
    z = y - spec.c * w
    poly = build_event_polyhedron(X, lam, res.model, res.signs)
    sec = line_section(poly, spec, z)
    t = IntervalUnion.from_pairs([(sec.v_minus, sec.v_plus)])
    return _interval_from_union(
        t,
        w,
        spec.sigma_m2,
        alpha1,
        alpha2,
        ("signs", res.model, res.signs),
    )


def ci_given_model(
    X,
    y,
    lam: float,
    gamma,
    sigma2: float,
    alpha1: float,
    alpha2: float,
    *,
    cap: int = 20,
    empty_model_u: float | None = None,
    fit_result: LassoFit | None = None,
) -> ConfidenceInterval:
    """Interval conditional on the model alone.

    When the sign enumeration exceeds ``cap`` the sign-conditional
    interval is returned instead, tagged ``fallback_signs``; it stays
    valid because it conditions on a finer event.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    res = _checked_fit(X, y, lam, fit_result)
    if not res.model:
        if empty_model_u is None:
            raise ValueError(
                "empty model: pass empty_model_u for the randomized interval"
            )
        return empty_model_interval(empty_model_u, alpha1, alpha2)
    spec = make_contrast(X, res.model, gamma, sigma2)
    w = float(spec.eta @ y)
    z = y - spec.c * w
    try:
        t = truncation_union(X, lam, res.model, spec, z, cap=cap)
    except CapacityError:
        fallback = ci_given_signs(
            X,
            y,
            lam,
            gamma,
            sigma2,
            alpha1,
            alpha2,
            fit_result=res,
        )
        return ConfidenceInterval(
            lower=fallback.lower,
            upper=fallback.upper,
            level_spec=fallback.level_spec,
            conditioning=("fallback_signs", res.model, res.signs),
        )
    return _interval_from_union(
        t, w, spec.sigma_m2, alpha1, alpha2, ("model", res.model)
    )


def infinite_length_certificate(
    X,
    y,
    lam: float,
    gamma,
    *,
    cap: int = 20,
    fit_result: LassoFit | None = None,
) -> LengthCertificate:
    """Check whether the model-conditional truncation set is one-sided.

    A bounded side at the observed orthogonal part implies the expected
    interval length under that conditioning is infinite. The check reads
    only the design, the penalty, and the data; noise level and mean
    play no role.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    res = _checked_fit(X, y, lam, fit_result)
    if not res.model:
        return LengthCertificate(
            verdict="not_certified", side=None, model=(), witness=None
        )
    spec = make_contrast(X, res.model, gamma, 1.0)
    w = float(spec.eta @ y)
    z = y - spec.c * w
    try:
        above, below = unboundedness_probe(X, lam, res.model, spec, z, cap=cap)
    except CapacityError:
        return LengthCertificate(
            verdict="undecided_capacity",
            side=None,
            model=res.model,
            witness=z,
        )
    if not above:
        return LengthCertificate(
            verdict="certified_infinite",
            side="above",
            model=res.model,
            witness=z,
        )
    if not below:
        return LengthCertificate(
            verdict="certified_infinite",
            side="below",
            model=res.model,
            witness=z,
        )
    return LengthCertificate(
        verdict="not_certified", side=None, model=res.model, witness=z
    )


def estimate_sigma(X, y) -> float:
    """Residual variance estimate from the full-design least squares fit."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if p >= n:
        raise ValueError("variance estimation needs p < n")
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < p:
        raise ValueError("design must have full column rank")
    resid = y - X @ beta
    return float(resid @ resid) / (n - p)


def generic_polyhedral_ci(
    polyhedra,
    contrast: ContrastSpec,
    y,
    sigma2: float,
    alpha1: float,
    alpha2: float,
) -> ConfidenceInterval:
    """Interval conditional on membership in a union of polyhedra.

    ``y`` must lie strictly inside exactly one of them; the truncation
    set is the union of every polyhedron's line section. The variance
    comes from ``sigma2`` and the contrast direction (any variance baked
    into the contrast is ignored).
    """
    y = np.asarray(y, dtype=float)
    polyhedra = list(polyhedra)
    inside = [p for p in polyhedra if p.contains(y)]
    if len(inside) != 1:
        raise ValueError(
            f"y lies in {len(inside)} of the {len(polyhedra)} polyhedra; "
            "need exactly one"
        )
    w = float(contrast.eta @ y)
    z = y - contrast.c * w
    pairs = []
    for poly in polyhedra:
        sec = line_section(poly, contrast, z)
        if sec.nonempty:
            pairs.append((sec.v_minus, sec.v_plus))
    t = IntervalUnion.from_pairs(pairs)
    var = float(sigma2) * float(contrast.eta @ contrast.eta)
    return _interval_from_union(
        t, w, var, alpha1, alpha2, ("user_supplied", len(polyhedra))
    )
