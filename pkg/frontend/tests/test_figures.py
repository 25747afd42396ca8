import math

import matplotlib.pyplot as plt
import pytest

from figrender import FigureJob, SchemaError, Style, render
from figrender.cli import main
from figrender.figures import (
    STANDARD_LENGTH_95,
    draw_heatmap,
    draw_lengthcurve,
    draw_quantilefit,
)

LENGTHCURVE = (
    "w,lower,upper,length\n"
    "-3.0,-5.0,-1.0,4.0\n"
    "-2.5,-4.0,3.0,7.0\n"
    "0.0,-2.0,2.0,4.0\n"
    "2.5,-3.0,4.0,7.0\n"
    "3.0,1.0,5.0,4.0\n"
)

HEATMAP = (
    "p,lambda,fraction_certified,min_ratio,max_ratio,reps\n"
    "20,1.0,0.40,0.80,1.00,50\n"
    "20,10.0,1.00,nan,nan,50\n"
    "50,1.0,0.90,0.75,0.95,50\n"
    "50,10.0,0.98,0.10,0.20,50\n"
)

QUANTILES = (
    "norm_label,kappa,quantile,fit_a,fit_b\n"
    "norm 0,0.5,3.0,0.5,2.0\n"
    "norm 0,0.9,8.0,0.5,2.0\n"
    "norm 1,0.5,4.0,0.7,2.5\n"
    "norm 1,0.9,9.0,0.7,2.5\n"
)

FLOORS = "theta,kappa,r\n0.0,0.5,4.0\n0.0,0.9,40.0\n-1.0,0.5,6.0\n-1.0,0.9,60.0\n"

_SOURCES = {
    "lengthcurve": LENGTHCURVE,
    "heatmap": HEATMAP,
    "quantilefit": QUANTILES,
    "floorcurves": FLOORS,
}


def _job(tmp_path, kind, out_name="fig.svg", **style):
    src = tmp_path / f"{kind}.csv"
    src.write_text(_SOURCES[kind], encoding="utf-8")
    return FigureJob(
        kind=kind,
        inputs=(str(src),),
        output=str(tmp_path / out_name),
        style=Style(**style),
    )


@pytest.mark.parametrize("kind", sorted(_SOURCES))
def test_render_writes_svg(tmp_path, kind):
    out = render(_job(tmp_path, kind))
    data = out.read_bytes()
    assert len(data) > 0
    assert b"<svg" in data[:600]


@pytest.mark.parametrize("kind", sorted(_SOURCES))
def test_render_is_deterministic(tmp_path, kind):
    a = render(_job(tmp_path, kind, out_name="a.svg")).read_bytes()
    b = render(_job(tmp_path, kind, out_name="b.svg")).read_bytes()
    assert a == b


def test_lengthcurve_reference_line(tmp_path):
    fig = plt.figure()
    try:
        ax = fig.add_subplot(111)
        rows = [
            {"w": -1.0, "lower": -3.0, "upper": 1.0, "length": 4.0},
            {"w": 1.0, "lower": -1.0, "upper": 3.0, "length": math.inf},
        ]
        placed = draw_lengthcurve(ax, rows, Style())
        assert placed == 2
        dashed = [
            ln
            for ln in ax.lines
            if ln.get_linestyle() == "--"
            and ln.get_ydata()[0] == pytest.approx(STANDARD_LENGTH_95)
        ]
        assert len(dashed) == 1
        # the infinite length is carried as a gap, not dropped
        curve = ax.lines[0]
        assert len(curve.get_xdata()) == 2
        assert math.isnan(curve.get_ydata()[1])
    finally:
        plt.close(fig)


def test_heatmap_annotates_unsaturated_cells_only(tmp_path):
    fig = plt.figure()
    try:
        ax = fig.add_subplot(111)
        rows = [
            {"p": 20, "lambda": 1.0, "fraction_certified": 0.40,
             "min_ratio": 0.80, "max_ratio": 1.00, "reps": 50},
            {"p": 20, "lambda": 10.0, "fraction_certified": 1.00,
             "min_ratio": math.nan, "max_ratio": math.nan, "reps": 50},
        ]
        placed = draw_heatmap(ax, rows, Style())
        assert placed == 2
        assert len(ax.texts) == 1
        assert "0.80" in ax.texts[0].get_text()
        assert "1.00" in ax.texts[0].get_text()
    finally:
        plt.close(fig)


def test_heatmap_duplicate_cell_rejected():
    fig = plt.figure()
    try:
        ax = fig.add_subplot(111)
        row = {"p": 20, "lambda": 1.0, "fraction_certified": 0.4,
               "min_ratio": 0.1, "max_ratio": 0.2, "reps": 10}
        with pytest.raises(SchemaError, match="duplicate cell"):
            draw_heatmap(ax, [row, dict(row)], Style())
    finally:
        plt.close(fig)


def test_quantilefit_overlays_fitted_curve():
    fig = plt.figure()
    try:
        ax = fig.add_subplot(111)
        rows = [
            {"norm_label": "norm 0", "kappa": 0.5, "quantile": 3.0,
             "fit_a": 0.5, "fit_b": 2.0},
            {"norm_label": "norm 0", "kappa": 0.9, "quantile": 8.0,
             "fit_a": 0.5, "fit_b": 2.0},
        ]
        placed = draw_quantilefit(ax, rows, Style())
        assert placed == 2
        # one empirical line plus one dashed fit, same color
        assert len(ax.lines) == 2
        fit = ax.lines[1]
        assert fit.get_linestyle() == "--"
        assert fit.get_color() == ax.lines[0].get_color()
        k = fit.get_xdata()[0]
        assert fit.get_ydata()[0] == pytest.approx((0.5 + 2.0 * k) / (1 - k))
    finally:
        plt.close(fig)


def test_job_validates_kind_and_inputs(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureJob(kind="piechart", inputs=("x.csv",), output="y.svg")
    with pytest.raises(ValueError, match="exactly one table"):
        FigureJob(
            kind="heatmap", inputs=("a.csv", "b.csv"), output="y.svg"
        )


def test_cli_exit_codes(tmp_path, capsys):
    src = tmp_path / "floors.csv"
    src.write_text(FLOORS, encoding="utf-8")
    out = tmp_path / "floors.svg"
    assert main(
        ["--kind", "floorcurves", "--in", str(src), "--out", str(out)]
    ) == 0
    assert out.stat().st_size > 0

    rc = main(["--kind", "heatmap", "--in", str(src), "--out", str(out)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "missing columns" in err and "fraction_certified" in err

    rc = main(
        ["--kind", "heatmap", "--in", str(tmp_path / "nope.csv"),
         "--out", str(out)]
    )
    assert rc == 2
