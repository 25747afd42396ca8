"""Lasso solver with exact zeros and KKT verification.

The objective is the unscaled form 0.5 * ||y - X beta||^2 + lam * ||beta||_1;
every polyhedron formula downstream assumes exactly this scaling. The
solver is cyclic coordinate descent with soft-thresholding, so inactive
coefficients are exactly zero and the selected model needs no
thresholding heuristics. Once the active set stops changing between
sweeps, the stationarity system restricted to it is solved in closed
form and accepted if it passes the full KKT check, which polishes the
iterate to linear-solver accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_BOUNDARY_RTOL = 1e-7


class ConvergenceError(RuntimeError):
    def __init__(self, gap: float, max_sweeps: int):
        super().__init__(
            f"coordinate descent still had KKT gap {gap:.3e} after "
            f"{max_sweeps} sweeps"
        )
        self.gap = gap


@dataclass(frozen=True)
class LassoProblem:
    X: np.ndarray
    y: np.ndarray
    lam: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("X must be a nonempty 2-d array")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one entry per row of X")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("inputs must be finite")
        if np.any(np.einsum("ij,ij->j", X, X) == 0.0):
            raise ValueError("X contains an all-zero column")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lam must be positive and finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class LassoFit:
    beta: np.ndarray
    model: tuple[int, ...]
    signs: tuple[int, ...]
    kkt_gap: float
    boundary_flag: bool
    objective_trace: tuple[float, ...] = field(default=(), repr=False)


def _soft(g: float, lam: float) -> float:
    if g > lam:
        return g - lam
    if g < -lam:
        return g + lam
    return 0.0


def kkt_residuals(prob: LassoProblem, beta) -> tuple[float, np.ndarray]:
    """Max KKT violation and the per-coordinate violation vector.

    Active coordinates must have gradient exactly lam * sign(beta_j);
    inactive ones may sit anywhere inside [-lam, lam].
    """
    beta = np.asarray(beta, dtype=float)
    grad = prob.X.T @ (prob.y - prob.X @ beta)
    per = np.where(
        beta != 0.0,
        np.abs(grad - prob.lam * np.sign(beta)),
        np.maximum(np.abs(grad) - prob.lam, 0.0),
    )
    return float(np.max(per)) if per.size else 0.0, per


def _objective(r: np.ndarray, beta: np.ndarray, lam: float) -> float:
    return 0.5 * float(r @ r) + lam * float(np.abs(beta).sum())


def fit(
    prob: LassoProblem,
    tol: float | None = None,
    max_sweeps: int = 2000,
    coordinate_order=None,
) -> LassoFit:
    """Minimize the Lasso objective; raise if the budget runs out.

    ``coordinate_order`` overrides the default ascending sweep order;
    the minimizer is unique for designs in general position, so the
    order must not matter beyond roundoff, and tests exploit that.
    """
    X, y, lam = prob.X, prob.y, prob.lam
    n, p = X.shape
    col_sq = np.einsum("ij,ij->j", X, X)
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.max(np.abs(X.T @ y))))
    order = (
        np.arange(p)
        if coordinate_order is None
        else np.asarray(coordinate_order, dtype=int)
    )

    beta = np.zeros(p)
    r = y.copy()
    trace: list[float] = []
    prev_active = None
    gap = math.inf

    def one_sweep(indices):
        for j in indices:
            g = X[:, j] @ r + col_sq[j] * beta[j]
            new = _soft(g, lam) / col_sq[j]
            if new != beta[j]:
                r[:] -= X[:, j] * (new - beta[j])
                beta[j] = new

    for _ in range(max_sweeps):
        one_sweep(order)
        trace.append(_objective(r, beta, lam))
        grad = X.T @ r
        gap = _kkt_gap_from_grad(grad, beta, lam)
        if gap <= tol:
            break
        active = np.flatnonzero(beta)
        if (
            prev_active is not None
            and active.size
            and np.array_equal(active, prev_active)
        ):
            polished = _polish(
                X, y, lam, active, np.sign(beta[active]), tol
            )
            if polished is not None:
                beta, r, gap = polished
                trace.append(_objective(r, beta, lam))
                break
        prev_active = active
        # cheap refinement on the current support before the next full pass
        for _ in range(100):
            before = beta[active].copy() if active.size else None
            if before is None:
                break
            one_sweep(active)
            if np.max(np.abs(beta[active] - before)) <= 1e-3 * tol:
                break
    else:
        raise ConvergenceError(gap, max_sweeps)

    grad = X.T @ r
    inactive = beta == 0.0
    boundary = bool(
        np.any(
            np.abs(np.abs(grad[inactive]) - lam) <= _BOUNDARY_RTOL * lam
        )
    )
    model = tuple(int(j) for j in np.flatnonzero(beta))
    signs = tuple(int(np.sign(beta[j])) for j in model)
    return LassoFit(
        beta=beta,
        model=model,
        signs=signs,
        kkt_gap=float(gap),
        boundary_flag=boundary,
        objective_trace=tuple(trace),
    )


def _kkt_gap_from_grad(grad, beta, lam) -> float:
    per = np.where(
        beta != 0.0,
        np.abs(grad - lam * np.sign(beta)),
        np.maximum(np.abs(grad) - lam, 0.0),
    )
    return float(np.max(per)) if per.size else 0.0


def _polish(X, y, lam, active, s, tol):
    """Solve the stationarity system on a stabilized support.

    Returns (beta, residual, gap) if the closed-form candidate is sign
    consistent and passes the full KKT check, else None.
    """
    Xa = X[:, active]
    try:
        cand = np.linalg.solve(Xa.T @ Xa, Xa.T @ y - lam * s)
    except np.linalg.LinAlgError:
        return None
    if np.any(np.sign(cand) != s):
        return None
    beta = np.zeros(X.shape[1])
    beta[active] = cand
    r = y - Xa @ cand
    gap = _kkt_gap_from_grad(X.T @ r, beta, lam)
    if gap > tol:
        return None
    return beta, r, gap


def selection(res: LassoFit):
    """The selected model and its sign vector; the sign component is
    None when the model is empty, where no sign vector exists."""
    if not res.model:
        return (), None
    return res.model, res.signs
