"""Gaussian distributions truncated to a union of open intervals.

This is the numerical kernel of the package. Everything downstream
(interval endpoints, certificates, simulation studies) reduces to a
handful of operations on ``TN(theta, var, T)``: its CDF, its quantiles,
and the inverse problem of finding the location parameter at which the
CDF of an observed point attains a prescribed value.

Two numerical facts shape the implementation:

* The CDF is a ratio of Gaussian masses that underflows catastrophically
  in linear arithmetic once the support sits many standard deviations
  from the location. All masses therefore live in log space, with a
  scaled-complementary-error-function branch once both standardized
  endpoints of a piece are beyond 8 on the same side.

* The CDF is strictly decreasing in the location parameter, so the
  inverse location problem is solved by plain bisection after geometric
  bracket expansion. No derivatives, no surprises, and the same loop
  vectorizes over hundreds of thousands of observation points, which is
  what makes the Monte Carlo studies affordable.

All functions are pure; instances are immutable and safe to share
across threads and processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .intervals import IntervalUnion

_LOG_HALF = math.log(0.5)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_HALF = math.sqrt(0.5)

# stopping rule for the location bisection: probability tolerance, or
# relative bracket width, whichever is hit first
_PROB_TOL = 1e-12
_WIDTH_TOL = 1e-9
_MAX_DOUBLINGS = 200


class BracketingError(RuntimeError):
    """Raised when the location search cannot enclose the target value."""


@dataclass(frozen=True)
class TruncatedGaussian:
    """``TN(theta, var, set)``: a Gaussian conditioned to lie in ``set``."""

    theta: float
    var: float
    set: IntervalUnion

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("location must be finite")
        if not (math.isfinite(self.var) and self.var > 0):
            raise ValueError("variance must be positive and finite")
        if self.set.k == 0:
            raise ValueError("support must be nonempty")

    @property
    def sd(self) -> float:
        return math.sqrt(self.var)


def _log1mexp(x):
    """log(1 - exp(x)) for x <= 0, elementwise, without cancellation."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = x < _LOG_HALF
        out = np.where(small, np.log1p(-np.exp(x)), np.log(-np.expm1(x)))
    return out


def _log_mass_std(alpha, beta):
    """log P(alpha < Z < beta) for standard normal Z, elementwise.

    Three branches: a central one when the interval straddles zero, a
    mirrored log-CDF difference for moderate one-sided intervals, and a
    scaled erfcx representation once both endpoints are beyond 8 with
    the same sign (where the log-CDF difference loses all digits).
    """
    alpha, beta = np.broadcast_arrays(
        np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    )
    alpha = np.array(alpha, dtype=float)
    beta = np.array(beta, dtype=float)
    out = np.empty(alpha.shape, dtype=float)

    deep_hi = alpha > 8.0
    deep_lo = beta < -8.0
    # mirror lower-tail cases onto the upper tail
    a = np.where(deep_lo, -beta, alpha)
    b = np.where(deep_lo, -alpha, beta)
    deep = deep_hi | deep_lo
    if np.any(deep):
        ad = np.where(deep, a, 9.0)
        bd = np.where(deep, b, 10.0)
        with np.errstate(invalid="ignore", over="ignore"):
            tail = special.erfcx(ad * _SQRT_HALF)
            far = np.where(
                np.isfinite(bd),
                special.erfcx(
                    np.where(np.isfinite(bd), bd, 2.0 * ad) * _SQRT_HALF
                )
                * np.exp(-0.5 * (bd - ad) * (bd + ad)),
                0.0,
            )
            val = _LOG_HALF - 0.5 * ad * ad + np.log(tail - far)
        out[deep] = val[deep]

    central = (~deep) & (alpha < 0.0) & (beta > 0.0)
    if np.any(central):
        with np.errstate(divide="ignore"):
            val = np.log1p(-special.ndtr(alpha) - special.ndtr(-beta))
        out[central] = val[central]

    rest = ~(deep | central)
    if np.any(rest):
        # one-sided but moderate; mirror right-tail cases for precision
        swap = alpha >= 0.0
        lo = np.where(swap, -beta, alpha)
        hi = np.where(swap, -alpha, beta)
        with np.errstate(invalid="ignore"):
            lp = special.log_ndtr(hi)
            lq = special.log_ndtr(lo)
            val = lp + _log1mexp(lq - lp)
        out[rest] = val[rest]
    return out


def log_gauss_mass(a, b, theta: float, sd: float) -> float:
    """log P(a < N(theta, sd^2) < b), stable far into the tails."""
    if not a < b:
        raise ValueError(f"empty interval ({a}, {b})")
    if not sd > 0:
        raise ValueError("sd must be positive")
    return float(_log_mass_std((a - theta) / sd, (b - theta) / sd))


def _support_arrays(t: IntervalUnion):
    lows = np.array([p[0] for p in t.pairs], dtype=float)
    highs = np.array([p[1] for p in t.pairs], dtype=float)
    return lows, highs


def _piece_index(lows, highs, w):
    """Index of the support piece containing each (clamped) w."""
    k = np.clip(np.searchsorted(lows, w, side="right") - 1, 0, lows.size - 1)
    if np.any((w <= lows[k]) | (w >= highs[k])):
        raise ValueError("observation outside the support")
    return k


def _clamp_many(t: IntervalUnion, w, sd: float):
    """Vectorized version of ``IntervalUnion.clamp`` over an array of w."""
    w = np.asarray(w, dtype=float)
    lows, highs = _support_arrays(t)
    inset = 1e-12 * sd
    slack = 1e-9 * sd
    left = np.where(np.isfinite(lows), lows + inset, -np.inf)
    right = np.where(np.isfinite(highs), highs - inset, np.inf)
    narrow = left > right
    if np.any(narrow):
        mid = 0.5 * (lows + highs)
        left = np.where(narrow, mid, left)
        right = np.where(narrow, mid, right)
    inner = np.clip(w[..., None], left, right)
    dist = np.abs(w[..., None] - inner)
    j = np.argmin(dist, axis=-1)
    best = np.take_along_axis(inner, j[..., None], axis=-1)[..., 0]
    best_dist = np.take_along_axis(dist, j[..., None], axis=-1)[..., 0]
    bad = best_dist > slack + inset
    if np.any(bad):
        offender = float(np.asarray(w)[bad].reshape(-1)[0])
        raise ValueError(
            f"point {offender!r} lies outside the support beyond clamp "
            "tolerance"
        )
    return np.where(best_dist == 0.0, w, best)


def _cdf_core(lows, highs, theta, sd, w, k_idx):
    """Vectorized CDF: theta and w are (N,), the support is shared.

    Returns F(w) under location theta. The numerator collects the full
    masses of the pieces below w's piece plus the partial mass inside
    it; both numerator and denominator stay in log space until the final
    ratio.
    """
    theta = np.asarray(theta, dtype=float)
    alpha = (lows[None, :] - theta[:, None]) / sd
    beta = (highs[None, :] - theta[:, None]) / sd
    logm = _log_mass_std(alpha, beta)

    a_k = lows[k_idx]
    part = _log_mass_std((a_k - theta) / sd, (w - theta) / sd)

    below = np.where(
        np.arange(lows.size)[None, :] < k_idx[:, None], logm, -np.inf
    )
    num_terms = np.concatenate([below, part[:, None]], axis=1)
    with np.errstate(invalid="ignore"):
        lognum = special.logsumexp(num_terms, axis=1)
        logden = special.logsumexp(logm, axis=1)
    return np.clip(np.exp(lognum - logden), 0.0, 1.0)


def trunc_cdf_many(d: TruncatedGaussian, w) -> np.ndarray:
    """CDF of ``d`` evaluated at an array of points."""
    lows, highs = _support_arrays(d.set)
    w = _clamp_many(d.set, w, d.sd)
    k_idx = _piece_index(lows, highs, w)
    theta = np.full(w.shape, d.theta)
    return _cdf_core(lows, highs, theta, d.sd, w, k_idx)


def trunc_cdf(d: TruncatedGaussian, w: float) -> float:
    """P(X <= w) for ``X ~ d``; strictly decreasing in ``d.theta``."""
    return float(trunc_cdf_many(d, np.array([float(w)]))[0])


def trunc_pdf(d: TruncatedGaussian, w: float) -> float:
    """Density of ``d`` at ``w``; zero off the support."""
    w = float(w)
    if not d.set.contains(w):
        return 0.0
    lows, highs = _support_arrays(d.set)
    logm = _log_mass_std((lows - d.theta) / d.sd, (highs - d.theta) / d.sd)
    logden = float(special.logsumexp(logm))
    x = (w - d.theta) / d.sd
    return math.exp(-0.5 * x * x - _LOG_SQRT_2PI - math.log(d.sd) - logden)


def _logdiff(lp, lq):
    """log(exp(lp) - exp(lq)) for lp >= lq."""
    return lp + _log1mexp(np.minimum(lq - lp, 0.0))


def _quantile_core(d: TruncatedGaussian, u):
    """Inverse CDF at probabilities u (array), shared fixed support."""
    lows, highs = _support_arrays(d.set)
    sd = d.sd
    alpha = (lows - d.theta) / sd
    beta = (highs - d.theta) / sd
    logm = _log_mass_std(alpha, beta)
    logcum = np.logaddexp.accumulate(logm)
    logden = logcum[-1]
    cum = np.exp(logcum - logden)

    u = np.asarray(u, dtype=float)
    k = np.minimum(
        np.searchsorted(cum, u, side="left"), lows.size - 1
    )
    log_target = np.log(u) + logden
    prev = np.where(k > 0, logcum[np.maximum(k - 1, 0)], -np.inf)
    with np.errstate(invalid="ignore"):
        logq = np.where(
            k > 0, _logdiff(log_target, prev), log_target
        )
    logq = np.where(np.isnan(logq), -np.inf, logq)

    a_k, b_k = alpha[k], beta[k]
    m_k = logm[k]
    x = np.empty(u.shape, dtype=float)

    right = a_k >= 0.0
    left = b_k <= 0.0
    mid = ~(right | left)
    if np.any(right):
        upper = np.logaddexp(
            special.log_ndtr(-b_k[right]),
            _logdiff(m_k[right], logq[right]),
        )
        x[right] = -special.ndtri_exp(upper)
    if np.any(left):
        lower = np.logaddexp(special.log_ndtr(a_k[left]), logq[left])
        x[left] = special.ndtri_exp(lower)
    if np.any(mid):
        p_std = special.ndtr(a_k[mid]) + np.exp(logq[mid])
        x[mid] = special.ndtri(np.clip(p_std, 1e-320, 1.0))

    w = d.theta + sd * x
    inset = 1e-12 * sd * np.maximum(1.0, np.abs(w))
    w = np.clip(w, lows[k] + inset, highs[k] - inset)
    return w


def trunc_quantile_w(d: TruncatedGaussian, p: float) -> float:
    """The point w in the support with ``trunc_cdf(d, w) = p``."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("probability must lie strictly between 0 and 1")
    return float(_quantile_core(d, np.array([p]))[0])


def sample_truncated(d: TruncatedGaussian, u):
    """Inverse-CDF draw(s) from ``d`` given uniform variate(s) ``u``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("uniform variates must lie strictly in (0, 1)")
    w = _quantile_core(d, u_arr)
    if np.isscalar(u) or u_arr.ndim == 0:
        return float(w.reshape(-1)[0])
    return w


def solve_location_many(
    t: IntervalUnion, var: float, w, gamma
) -> np.ndarray:
    """Vectorized: the location theta_i with CDF_theta_i(w_i) = gamma_i.

    Existence and uniqueness come from strict monotonicity of the CDF in
    the location. Brackets expand geometrically from ``w +- 4 sd`` (at
    most 200 doublings), then bisection runs until the probability gap
    is below 1e-12 or the bracket is narrower than
    ``1e-9 * sd * max(1, |w|)``.
    """
    if not var > 0:
        raise ValueError("variance must be positive")
    sd = math.sqrt(var)
    lows, highs = _support_arrays(t)
    w = np.atleast_1d(np.asarray(w, dtype=float)).copy()
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), w.shape).copy()
    if np.any((gamma <= 0.0) | (gamma >= 1.0)):
        raise ValueError("gamma must lie strictly between 0 and 1")
    w = _clamp_many(t, w, sd)
    k_idx = _piece_index(lows, highs, w)

    def cdf_at(theta, sel):
        return _cdf_core(lows, highs, theta, sd, w[sel], k_idx[sel])

    n = w.size
    half = np.full(n, 4.0 * sd)
    lo = w - half
    hi = w + half
    all_rows = np.arange(n)
    f_lo = cdf_at(lo, all_rows)
    f_hi = cdf_at(hi, all_rows)

    # the CDF decreases in theta: push lo down until F(lo) >= gamma,
    # hi up until F(hi) <= gamma
    for _ in range(_MAX_DOUBLINGS):
        need = f_lo < gamma
        if not np.any(need):
            break
        half_lo = hi - lo
        idx = np.flatnonzero(need)
        lo[idx] -= half_lo[idx]
        f_lo[idx] = cdf_at(lo[idx], idx)
    if np.any(f_lo < gamma):
        bad = int(np.flatnonzero(f_lo < gamma)[0])
        raise BracketingError(
            f"no lower location bracket at w={w[bad]!r}, "
            f"gamma={gamma[bad]!r}, var={var!r}, support={t.pairs!r}"
        )
    for _ in range(_MAX_DOUBLINGS):
        need = f_hi > gamma
        if not np.any(need):
            break
        half_hi = hi - lo
        idx = np.flatnonzero(need)
        hi[idx] += half_hi[idx]
        f_hi[idx] = cdf_at(hi[idx], idx)
    if np.any(f_hi > gamma):
        bad = int(np.flatnonzero(f_hi > gamma)[0])
        raise BracketingError(
            f"no upper location bracket at w={w[bad]!r}, "
            f"gamma={gamma[bad]!r}, var={var!r}, support={t.pairs!r}"
        )

    width_tol = _WIDTH_TOL * sd * np.maximum(1.0, np.abs(w))
    ans = 0.5 * (lo + hi)
    active = np.ones(n, dtype=bool)
    for _ in range(700):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        f_mid = cdf_at(mid, idx)
        go_up = f_mid > gamma[idx]
        lo[idx[go_up]] = mid[go_up]
        hi[idx[~go_up]] = mid[~go_up]
        ans[idx] = mid
        done = (np.abs(f_mid - gamma[idx]) <= _PROB_TOL) | (
            (hi[idx] - lo[idx]) <= width_tol[idx]
        )
        active[idx[done]] = False
    return ans


def solve_location(
    t: IntervalUnion, var: float, w: float, gamma: float
) -> float:
    """The location whose truncated CDF at ``w`` equals ``gamma``."""
    return float(solve_location_many(t, var, np.array([float(w)]), gamma)[0])


def ci_location_many(t: IntervalUnion, var: float, w, alpha1, alpha2):
    """Equal-or-unequal-tailed location intervals for an array of w."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    n = w.size
    both_w = np.concatenate([w, w])
    both_g = np.concatenate(
        [np.full(n, 1.0 - alpha1), np.full(n, alpha2)]
    )
    sol = solve_location_many(t, var, both_w, both_g)
    lower, upper = sol[:n], sol[n:]
    return np.minimum(lower, upper), np.maximum(lower, upper)


def ci_location(
    t: IntervalUnion, var: float, w: float, alpha1: float, alpha2: float
):
    """Interval [L, U] with CDF_L(w) = 1 - alpha1 and CDF_U(w) = alpha2."""
    if not (0.0 < alpha1 <= 0.5 and 0.0 < alpha2 <= 0.5):
        raise ValueError("tail probabilities must lie in (0, 1/2]")
    lower, upper = ci_location_many(t, var, np.array([float(w)]), alpha1, alpha2)
    return float(lower[0]), float(upper[0])


def _total_mass(lows, highs, theta, sd):
    alpha = (lows[None, :] - theta[:, None]) / sd
    beta = (highs[None, :] - theta[:, None]) / sd
    with np.errstate(invalid="ignore"):
        return np.exp(special.logsumexp(_log_mass_std(alpha, beta), axis=1))


def min_coverage_mass(t: IntervalUnion, var: float) -> float:
    """Smallest probability any Gaussian location can place on ``t``.

    Zero as soon as the support is bounded on either side (send the
    location to the far side). For supports unbounded in both directions
    the minimizer sits in the gap region; a grid of step sd/50 plus
    golden-section refinement finds it. The result always dominates
    ``2 Phi(-gap / (2 sd))``, which is asserted as a sanity floor.
    """
    if t.k == 0:
        return 0.0
    if t.bounded_above or t.bounded_below:
        return 0.0
    if t.k == 1:
        return 1.0
    sd = math.sqrt(var)
    lows, highs = _support_arrays(t)
    b1 = t.pairs[0][1]
    a_k = t.pairs[-1][0]
    grid = np.arange(b1 - 5.0 * sd, a_k + 5.0 * sd + sd / 50.0, sd / 50.0)
    masses = _total_mass(lows, highs, grid, sd)
    j = int(np.argmin(masses))
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid.size - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc = float(_total_mass(lows, highs, np.array([c]), sd)[0])
    fd = float(_total_mass(lows, highs, np.array([d]), sd)[0])
    while hi - lo > 1e-10:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = float(_total_mass(lows, highs, np.array([c]), sd)[0])
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = float(_total_mass(lows, highs, np.array([d]), sd)[0])
    p_star = min(fc, fd)
    delta = t.outer_gap / (2.0 * sd)
    floor = 2.0 * float(special.ndtr(-delta))
    if p_star < floor - 1e-12:
        raise AssertionError(
            f"minimized mass {p_star} fell below its floor {floor}"
        )
    return p_star


def length_bounds(t: IntervalUnion, var: float, alpha: float):
    """Upper bounds on the interval length over the whole support.

    Returns ``(tight, loose)``: the sharp bound driven by the minimal
    coverage mass, and the looser explicit one driven by the outer gap.
    Both are infinite when the support is bounded on either side, which
    is exactly the situation the certificate reports.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    sd = math.sqrt(var)
    p_star = min_coverage_mass(t, var)
    if p_star == 0.0:
        return math.inf, math.inf
    tight = 2.0 * sd * float(special.ndtri(1.0 - p_star * alpha / 2.0))
    loose = 2.0 * sd * float(special.ndtri(1.0 - alpha / 2.0)) + t.outer_gap
    return tight, loose


def quantile_floor(
    theta: float, var: float, t: IntervalUnion, kappa: float, alpha: float
) -> float:
    """Asymptotic floor on the kappa-quantile of the interval length.

    Applies when the support has a finite endpoint on at least one side;
    the bounded-above form uses the Mills-type ratio phi/Phi at the top
    endpoint, the bounded-below form uses phi/(1 - Phi) at the bottom
    one. Grows like 1/(1 - kappa).
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie strictly between 0 and 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if t.k == 0:
        raise ValueError("empty support")
    sd = math.sqrt(var)
    scale = math.log((2.0 - alpha) / alpha) / (1.0 - kappa)
    if t.bounded_above:
        x = (t.pairs[-1][1] - theta) / sd
        log_ratio = -0.5 * x * x - _LOG_SQRT_2PI - float(
            special.log_ndtr(x)
        )
    elif t.bounded_below:
        x = (t.pairs[0][0] - theta) / sd
        log_ratio = -0.5 * x * x - _LOG_SQRT_2PI - float(
            special.log_ndtr(-x)
        )
    else:
        raise ValueError(
            "support is unbounded on both sides; no finite boundary to "
            "anchor the floor"
        )
    return sd * scale * math.exp(log_ratio)
