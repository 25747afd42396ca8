"""Figure drawing for the four study kinds.

Rendering is deterministic: Agg backend, fixed figure geometry, a fixed
SVG hash salt, and no embedded timestamps. Every draw function returns
the number of data rows it placed on the axes so ``render`` can verify
nothing was silently dropped.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figrender"

import matplotlib.pyplot as plt
import numpy as np

from .schemas import KINDS, SchemaError, read_table

# two-sided unconditional interval length at the default level, used as
# the dashed reference on length curves
STANDARD_LENGTH_95 = 2.0 * statistics.NormalDist().inv_cdf(0.975)

# heatmap cells at or above this certified fraction are considered
# saturated and carry no ratio annotation
_SATURATED = 0.995


@dataclass(frozen=True)
class Style:
    width: float = 6.4
    height: float = 4.8
    dpi: int = 100
    title: str | None = None
    # dashed reference level for length curves; None means the
    # standard two-sided length at 95%
    reference: float | None = None
    # optional y-axis cap for length curves (they diverge at the
    # truncation boundary)
    ymax: float | None = None


@dataclass(frozen=True)
class FigureJob:
    kind: str
    inputs: tuple[str, ...]
    output: str
    style: Style = Style()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if len(self.inputs) != 1:
            raise ValueError("each figure kind reads exactly one table")


def _finite_or_nan(value: float) -> float:
    return value if math.isfinite(value) else math.nan


def draw_lengthcurve(ax, rows, style: Style) -> int:
    w = [r["w"] for r in rows]
    length = [_finite_or_nan(r["length"]) for r in rows]
    ax.plot(w, length, color="C0", lw=1.5, label="selective interval")
    ref = style.reference if style.reference is not None else STANDARD_LENGTH_95
    ax.axhline(ref, ls="--", color="black", lw=1.0, label="standard interval")
    if style.ymax is not None:
        ax.set_ylim(0.0, style.ymax)
    ax.set_xlabel("observed statistic")
    ax.set_ylabel("interval length")
    ax.legend(loc="upper center", fontsize=9)
    return len(w)


def draw_floorcurves(ax, rows, style: Style) -> int:
    series: dict[float, list] = {}
    for r in rows:
        series.setdefault(r["theta"], []).append((r["kappa"], r["r"]))
    for theta, pts in series.items():
        ax.plot(
            [k for k, _ in pts],
            [v for _, v in pts],
            lw=1.5,
            label=f"location {theta:g}",
        )
    ax.set_yscale("log")
    ax.set_xlabel("quantile level")
    ax.set_ylabel("length-quantile floor")
    ax.legend(loc="upper left", fontsize=9)
    return sum(len(pts) for pts in series.values())


def draw_heatmap(ax, rows, style: Style) -> int:
    ps = sorted({r["p"] for r in rows})
    lams = sorted({r["lambda"] for r in rows})
    row_of = {v: i for i, v in enumerate(ps)}
    col_of = {v: i for i, v in enumerate(lams)}
    grid = np.full((len(ps), len(lams)), np.nan)
    for r in rows:
        i, j = row_of[r["p"]], col_of[r["lambda"]]
        if not np.isnan(grid[i, j]):
            raise SchemaError(
                f"duplicate cell p={r['p']:g} lambda={r['lambda']:g}"
            )
        grid[i, j] = r["fraction_certified"]
    cmap = plt.get_cmap("Blues").copy()
    cmap.set_bad("0.85")
    im = ax.imshow(
        grid, origin="lower", vmin=0.0, vmax=1.0, cmap=cmap, aspect="auto"
    )
    ax.set_xticks(range(len(lams)), [f"{v:g}" for v in lams])
    ax.set_yticks(range(len(ps)), [f"{v:g}" for v in ps])
    ax.set_xlabel("penalty level")
    ax.set_ylabel("number of variables")
    for r in rows:
        if r["fraction_certified"] >= _SATURATED:
            continue
        dark = r["fraction_certified"] > 0.6
        ax.text(
            col_of[r["lambda"]],
            row_of[r["p"]],
            f"{r['min_ratio']:.2f}\n{r['max_ratio']:.2f}",
            ha="center",
            va="center",
            fontsize=7,
            color="white" if dark else "black",
        )
    ax.figure.colorbar(im, ax=ax, label="fraction certified infinite")
    return len(rows)


def draw_quantilefit(ax, rows, style: Style) -> int:
    order: list[str] = []
    pts: dict[str, list] = {}
    fits: dict[str, tuple[float, float]] = {}
    for r in rows:
        label = r["norm_label"]
        if label not in pts:
            order.append(label)
            pts[label] = []
            fits[label] = (r["fit_a"], r["fit_b"])
        pts[label].append((r["kappa"], r["quantile"]))
    for idx, label in enumerate(order):
        color = f"C{idx}"
        kappas = [k for k, _ in pts[label]]
        ax.plot(
            kappas,
            [q for _, q in pts[label]],
            "o-",
            ms=3,
            lw=1.2,
            color=color,
            label=label,
        )
        a, b = fits[label]
        kk = np.linspace(min(kappas), min(max(kappas), 1.0 - 1e-9), 200)
        ax.plot(kk, (a + b * kk) / (1.0 - kk), ls="--", lw=1.0, color=color)
    ax.set_xlabel("quantile level")
    ax.set_ylabel("interval length quantile")
    ax.legend(loc="upper left", fontsize=9)
    return sum(len(v) for v in pts.values())


_DRAW = {
    "lengthcurve": draw_lengthcurve,
    "floorcurves": draw_floorcurves,
    "heatmap": draw_heatmap,
    "quantilefit": draw_quantilefit,
}


def render(job: FigureJob) -> Path:
    """Draw the figure for ``job`` and write it to ``job.output``.

    The output format follows the file suffix and defaults to SVG.
    Raises ``SchemaError`` when the input table does not match the
    kind's layout.
    """
    rows = read_table(job.inputs[0], job.kind)
    out = Path(job.output)
    fig = plt.figure(figsize=(job.style.width, job.style.height))
    try:
        ax = fig.add_subplot(111)
        placed = _DRAW[job.kind](ax, rows, job.style)
        if placed != len(rows):
            raise RuntimeError(
                f"placed {placed} points for {len(rows)} rows"
            )
        if job.style.title:
            ax.set_title(job.style.title)
        fmt = out.suffix.lstrip(".").lower() or "svg"
        out.parent.mkdir(parents=True, exist_ok=True)
        metadata = {"Date": None} if fmt == "svg" else None
        fig.savefig(out, format=fmt, dpi=job.style.dpi, metadata=metadata)
    finally:
        plt.close(fig)
    return out
