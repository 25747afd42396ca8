"""Selection-event geometry for the l1-penalized least squares fit.

Everything here works with one affine picture: the event that a given
model and sign vector come out of the fit is an open polyhedron
{y : Ay < b}, and along the line y = z + w * c the event cuts out an
interval in w. Unions of those intervals over sign vectors are what the
inference layer feeds to the truncated-Gaussian kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .intervals import IntervalUnion

_ZERO_ROW_RTOL = 1e-10
_REORTH_RTOL = 1e-8


class CapacityError(RuntimeError):
    """Raised when a sign enumeration would exceed the configured cap."""

    def __init__(self, model_size: int, cap: int):
        super().__init__(
            f"model size {model_size} exceeds the enumeration cap {cap}; "
            "use the sign-conditional interval instead"
        )
        self.model_size = model_size
        self.cap = cap


@dataclass(frozen=True)
class ContrastSpec:
    """A linear functional of the selected-model coefficients.

    ``eta`` is the data-space direction whose inner product with the mean
    equals ``gamma' beta_model``; ``c = eta / ||eta||^2`` parametrizes the
    line used for conditioning and ``sigma_m2`` is the variance of
    ``eta'Y``.
    """

    model: tuple[int, ...]
    gamma: np.ndarray
    eta: np.ndarray
    c: np.ndarray
    sigma_m2: float

    def target(self, mu: np.ndarray) -> float:
        """Value of the functional at a candidate mean vector."""
        return float(self.eta @ np.asarray(mu, dtype=float))


@dataclass(frozen=True)
class Polyhedron:
    """Open polyhedron {y : Ay < b} with a record of where it came from."""

    A: np.ndarray
    b: np.ndarray
    provenance: tuple

    def contains(self, y: np.ndarray) -> bool:
        return bool(np.all(self.A @ np.asarray(y, dtype=float) < self.b))


@dataclass(frozen=True)
class LineSection:
    """Intersection of a polyhedron with the line z + w * c.

    The section is {w : v_minus < w < v_plus} when ``v_zero > 0`` and
    empty otherwise; ``v_zero`` collects the slack of constraints that do
    not vary along the line.
    """

    v_minus: float
    v_plus: float
    v_zero: float

    @property
    def nonempty(self) -> bool:
        return self.v_minus < self.v_plus and self.v_zero > 0


def make_contrast(
    X: np.ndarray,
    model: tuple[int, ...],
    gamma: np.ndarray,
    sigma2: float,
) -> ContrastSpec:
    """Build the data-space direction for a coefficient contrast.

    Raises ``ValueError`` for an empty model, a zero contrast vector, a
    rank-deficient selected design, or a nonpositive noise variance.
    """
    X = np.asarray(X, dtype=float)
    model = tuple(int(j) for j in model)
    gamma = np.asarray(gamma, dtype=float)
    if not model:
        raise ValueError("contrast needs a nonempty model")
    if gamma.shape != (len(model),):
        raise ValueError("gamma length must match the model size")
    if not np.any(gamma):
        raise ValueError("gamma must be nonzero")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    Xm = X[:, list(model)]
    sv = np.linalg.svd(Xm, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise ValueError("selected design columns are rank deficient")
    eta = Xm @ np.linalg.solve(Xm.T @ Xm, gamma)
    nn = float(eta @ eta)
    return ContrastSpec(
        model=model,
        gamma=gamma,
        eta=eta,
        c=eta / nn,
        sigma_m2=float(sigma2) * nn,
    )


def build_event_polyhedron(
    X: np.ndarray,
    lam: float,
    model: tuple[int, ...],
    signs: tuple[int, ...],
) -> Polyhedron:
    """Affine inequalities describing one (model, signs) selection event.

    Rows for the inactive coordinates come first (two per coordinate,
    one for each side of the stationarity bound), followed by one row
    per active coordinate enforcing its sign.
    """
    X = np.asarray(X, dtype=float)
    model = tuple(int(j) for j in model)
    s = np.asarray(signs, dtype=float)
    if not model:
        raise ValueError("event polyhedron needs a nonempty model")
    if s.shape != (len(model),) or not np.all(np.abs(s) == 1.0):
        raise ValueError("signs must be +1/-1, one per model coordinate")
    if not lam > 0:
        raise ValueError("lam must be positive")
    n, p = X.shape
    Xm = X[:, list(model)]
    gram = Xm.T @ Xm
    K = np.linalg.solve(gram, Xm.T)
    Hs = np.linalg.solve(gram, s)
    A_active = -s[:, None] * K
    b_active = -lam * s * Hs
    inactive = [j for j in range(p) if j not in model]
    if inactive:
        Xc = X[:, inactive]
        resid = Xc - Xm @ (K @ Xc)  # (I - P) applied columnwise
        D = resid.T / lam
        shift = Xc.T @ (Xm @ Hs)
        A = np.vstack([D, -D, A_active])
        b = np.concatenate([1.0 - shift, 1.0 + shift, b_active])
    else:
        A = A_active
        b = b_active
    return Polyhedron(A=A, b=b, provenance=("lasso_event", model, tuple(signs)))


def _drop_direction(z: np.ndarray, contrast: ContrastSpec) -> np.ndarray:
    """Remove any component of z along eta (idempotent for clean input)."""
    z = np.asarray(z, dtype=float)
    eta = contrast.eta
    nn = float(eta @ eta)
    proj = float(eta @ z)
    if abs(proj) > _REORTH_RTOL * math.sqrt(nn) * np.linalg.norm(z):
        z = z - eta * (proj / nn)
    elif proj != 0.0:
        z = z - eta * (proj / nn)
    return z


def line_section(
    poly: Polyhedron, contrast: ContrastSpec, z: np.ndarray
) -> LineSection:
    """Cut a polyhedron with the line {z + w * c : w real}.

    Constraint rows whose inner product with ``c`` is negligible relative
    to their norms are held out of the endpoint ratios and reported
    through ``v_zero`` instead.
    """
    z = _drop_direction(z, contrast)
    A, b = poly.A, poly.b
    Ac = A @ contrast.c
    slack = b - A @ z
    scale = np.linalg.norm(A, axis=1) * np.linalg.norm(contrast.c)
    zero = np.abs(Ac) <= _ZERO_ROW_RTOL * scale
    neg = ~zero & (Ac < 0)
    pos = ~zero & (Ac > 0)
    v_minus = -math.inf
    v_plus = math.inf
    v_zero = math.inf
    if np.any(neg):
        v_minus = float(np.max(slack[neg] / Ac[neg]))
    if np.any(pos):
        v_plus = float(np.min(slack[pos] / Ac[pos]))
    if np.any(zero):
        v_zero = float(np.min(slack[zero]))
    return LineSection(v_minus=v_minus, v_plus=v_plus, v_zero=v_zero)


@dataclass(frozen=True)
class _ModelFrame:
    """Per-model quantities shared by the union and the probe."""

    Kz: np.ndarray  # K z, length |m|
    Kc: np.ndarray  # K c, length |m|
    H: np.ndarray  # (X_m' X_m)^{-1}
    zero_cols: np.ndarray  # active rows that do not vary along the line
    G: np.ndarray  # X_c' X_m H, shape (|inactive|, |m|)
    u: np.ndarray  # (1/lam) X_c' (I - P) z, length |inactive|
    lam: float


def _model_frame(
    X: np.ndarray,
    lam: float,
    model: tuple[int, ...],
    contrast: ContrastSpec,
    z: np.ndarray,
) -> _ModelFrame:
    X = np.asarray(X, dtype=float)
    z = _drop_direction(z, contrast)
    n, p = X.shape
    Xm = X[:, list(model)]
    gram = Xm.T @ Xm
    H = np.linalg.inv(gram)
    K = H @ Xm.T
    Kz = K @ z
    Kc = K @ contrast.c
    row_scale = np.linalg.norm(K, axis=1) * np.linalg.norm(contrast.c)
    zero_cols = np.abs(Kc) <= _ZERO_ROW_RTOL * row_scale
    inactive = [j for j in range(p) if j not in model]
    if inactive:
        Xc = X[:, inactive]
        G = (Xc.T @ Xm) @ H
        u = (Xc.T @ (z - Xm @ Kz)) / lam
    else:
        G = np.zeros((0, len(model)))
        u = np.zeros(0)
    return _ModelFrame(
        Kz=Kz, Kc=Kc, H=H, zero_cols=zero_cols, G=G, u=u, lam=lam
    )


def _sections_for_signs(
    frame: _ModelFrame, S: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized line sections for a batch of sign vectors.

    ``S`` has one row per sign vector. Returns (v_minus, v_plus, v_zero)
    arrays of the same length.
    """
    term = frame.Kz[None, :] - frame.lam * (S @ frame.H)
    ac_sign = -S * frame.Kc[None, :]
    live = ~frame.zero_cols
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = -term / frame.Kc[None, :]
    neg = live[None, :] & (ac_sign < 0)
    pos = live[None, :] & (ac_sign > 0)
    v_minus = np.max(
        np.where(neg, ratios, -np.inf), axis=1, initial=-np.inf
    )
    v_plus = np.min(np.where(pos, ratios, np.inf), axis=1, initial=np.inf)
    v_zero = np.min(
        np.where(frame.zero_cols[None, :], S * term, np.inf),
        axis=1,
        initial=np.inf,
    )
    if frame.u.size:
        worst = np.max(np.abs(S @ frame.G.T + frame.u[None, :]), axis=1)
        v_zero = np.minimum(v_zero, 1.0 - worst)
    return v_minus, v_plus, v_zero


def _sign_block(k: int, start: int, count: int) -> np.ndarray:
    codes = np.arange(start, start + count, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(k)) & 1
    return 1.0 - 2.0 * bits


def truncation_union(
    X: np.ndarray,
    lam: float,
    model: tuple[int, ...],
    contrast: ContrastSpec,
    z: np.ndarray,
    cap: int = 20,
) -> IntervalUnion:
    """Union over sign vectors of the event sections along the line.

    Sign vectors whose polyhedron misses the line (empty section or a
    violated constant constraint) contribute nothing. Models larger than
    ``cap`` raise ``CapacityError`` rather than enumerate.
    """
    model = tuple(int(j) for j in model)
    k = len(model)
    if k == 0:
        raise ValueError("truncation union needs a nonempty model")
    if k > cap:
        raise CapacityError(k, cap)
    frame = _model_frame(X, lam, model, contrast, z)
    total = 1 << k
    pairs = []
    block = 1 << 16
    for start in range(0, total, block):
        S = _sign_block(k, start, min(block, total - start))
        v_minus, v_plus, v_zero = _sections_for_signs(frame, S)
        keep = (v_minus < v_plus) & (v_zero > 0)
        for lo, hi in zip(v_minus[keep], v_plus[keep]):
            pairs.append((float(lo), float(hi)))
    return IntervalUnion.from_pairs(pairs)


def unboundedness_probe(
    X: np.ndarray,
    lam: float,
    model: tuple[int, ...],
    contrast: ContrastSpec,
    z: np.ndarray,
    cap: int = 20,
) -> tuple[bool, bool]:
    """Decide whether the truncation union is unbounded above / below.

    Only sign vectors matching the sign pattern of the contrast's
    coefficient direction can produce a one-sided section, so at most
    2^(number of zero coordinates) candidates need checking per side.
    Agrees exactly with ``truncation_union`` because both run the same
    section arithmetic.
    """
    model = tuple(int(j) for j in model)
    k = len(model)
    if k == 0:
        raise ValueError("probe needs a nonempty model")
    frame = _model_frame(X, lam, model, contrast, z)
    free = np.flatnonzero(frame.zero_cols)
    if free.size > cap:
        raise CapacityError(int(free.size), cap)

    def any_nonempty(base: np.ndarray) -> bool:
        count = 1 << free.size
        block = 1 << 16
        for start in range(0, count, block):
            S = np.repeat(
                base[None, :], min(block, count - start), axis=0
            )
            if free.size:
                S[:, free] = _sign_block(
                    free.size, start, min(block, count - start)
                )
            v_minus, v_plus, v_zero = _sections_for_signs(frame, S)
            if np.any((v_minus < v_plus) & (v_zero > 0)):
                return True
        return False

    base_above = np.where(frame.Kc >= 0, 1.0, -1.0)
    above = any_nonempty(base_above)
    below = any_nonempty(-base_above)
    return above, below
