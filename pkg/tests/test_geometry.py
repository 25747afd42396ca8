import math

import numpy as np
import pytest

import _oracles
from polyci.geometry import (
    CapacityError,
    build_event_polyhedron,
    line_section,
    make_contrast,
    truncation_union,
    unboundedness_probe,
)
from polyci.lasso import LassoProblem, fit

INF = math.inf

# two-variable fixture with a closed-form selection region:
# x1 = (1, -1)', x2 = (0, 1)', lam = 2, full model at signs (+1, +1)
# is selected exactly on {y1 > 4, y1 + y2 > 6}
X2 = np.array([[1.0, 0.0], [-1.0, 1.0]])
LAM2 = 2.0
Y2 = np.array([7.414214, 1.414214])


def default_contrast(X, m, sigma2=1.0, gamma=None):
    m = tuple(m)
    if gamma is None:
        gamma = np.zeros(len(m))
        gamma[0] = 1.0
    return make_contrast(X, m, gamma, sigma2)


# ------------------------------------------------------------- contrast


def test_contrast_fixture_eta():
    spec = default_contrast(X2, (0, 1))
    assert spec.eta == pytest.approx([1.0, 0.0], abs=1e-12)
    assert spec.c == pytest.approx([1.0, 0.0], abs=1e-12)
    assert spec.sigma_m2 == pytest.approx(1.0, abs=1e-12)


def test_contrast_single_column_projection():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(9, 4))
    j = 2
    spec = make_contrast(X, (j,), np.array([1.0]), 1.0)
    want = X[:, j] / float(X[:, j] @ X[:, j])
    assert spec.eta == pytest.approx(want, rel=1e-12)


def test_contrast_defining_identity():
    rng = np.random.default_rng(5)
    for _ in range(15):
        X = rng.normal(size=(12, 6))
        m = tuple(sorted(rng.choice(6, size=3, replace=False)))
        gamma = rng.normal(size=3)
        spec = make_contrast(X, m, gamma, 2.0)
        got = X[:, list(m)].T @ spec.eta
        assert np.max(np.abs(got - gamma)) <= 1e-10 * (
            1 + np.max(np.abs(gamma))
        )
        assert float(spec.c @ spec.eta) == pytest.approx(1.0, rel=1e-12)
        assert spec.sigma_m2 == pytest.approx(
            2.0 * float(spec.eta @ spec.eta), rel=1e-12
        )


def test_contrast_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_contrast(X2, (), np.array([]), 1.0)
    with pytest.raises(ValueError):
        make_contrast(X2, (0, 1), np.zeros(2), 1.0)
    X_rank1 = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        make_contrast(X_rank1, (0, 1), np.array([1.0, 0.0]), 1.0)


# ------------------------------------------------------ event polyhedron


def test_fixture_polyhedron_matches_closed_form():
    poly = build_event_polyhedron(X2, LAM2, (0, 1), (1, 1))
    # full model: no inactive block, two sign rows
    assert poly.A.shape == (2, 2)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-12, 12, size=(600, 2))
    member = np.all(pts @ poly.A.T < poly.b, axis=1)
    closed = (pts[:, 0] > 4.0) & (pts[:, 0] + pts[:, 1] > 6.0)
    assert np.array_equal(member, closed)


def test_fixture_polyhedron_matches_grid_oracle():
    poly = build_event_polyhedron(X2, LAM2, (0, 1), (1, 1))
    axis, mask = _oracles.lasso_region_grid(
        X2, LAM2, [0, 1], [1.0, 1.0], lo=-11.0, hi=11.0, num=45
    )
    for i, y1 in enumerate(axis):
        for j, y2 in enumerate(axis):
            y = np.array([y1, y2])
            slack = poly.b - poly.A @ y
            if np.min(np.abs(slack)) < 1e-6:
                continue  # grid point on a face; membership is ambiguous
            assert bool(np.all(slack > 0)) == bool(mask[i, j])


def test_polyhedron_row_counts_and_membership():
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(200):
        X = rng.normal(size=(10, 6))
        y = rng.normal(size=10) * 2.0
        lam = rng.uniform(1.0, 6.0)
        res = fit(LassoProblem(X=X, y=y, lam=lam))
        if not res.model or res.boundary_flag:
            continue
        poly = build_event_polyhedron(X, lam, res.model, res.signs)
        q = 2 * (6 - len(res.model)) + len(res.model)
        assert poly.A.shape == (q, 10)
        assert np.all(poly.A @ y < poly.b)
        hits += 1
    assert hits > 100


def test_polyhedra_disjoint_across_signs():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(8, 4))
    lam = 2.0
    m = (1, 3)
    polys = [
        build_event_polyhedron(X, lam, m, s)
        for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))
    ]
    pts = rng.uniform(-8, 8, size=(2000, 8))
    inside = np.stack(
        [np.all(pts @ p.A.T < p.b, axis=1) for p in polys]
    )
    assert np.max(inside.sum(axis=0)) <= 1


# --------------------------------------------------------- line section


def test_fixture_line_section():
    poly = build_event_polyhedron(X2, LAM2, (0, 1), (1, 1))
    spec = default_contrast(X2, (0, 1))
    z = np.array([0.0, 1.414214])
    sec = line_section(poly, spec, z)
    assert sec.v_minus == pytest.approx(4.585786, abs=1e-9)
    assert sec.v_plus == INF
    assert sec.v_zero == INF


def test_inactive_rows_are_neutral():
    # with a strict submodel the inactive block is present and must sit
    # in the zero class: (I - P) eta = 0
    rng = np.random.default_rng(17)
    for _ in range(10):
        X = rng.normal(size=(9, 5))
        m = (0, 2)
        poly = build_event_polyhedron(X, 1.5, m, (1, -1))
        spec = default_contrast(X, m)
        ac = poly.A @ spec.c
        # the first 2 * |inactive| rows come from the inactive block
        assert np.max(np.abs(ac[:6])) <= 1e-10 * np.max(
            np.linalg.norm(poly.A, axis=1)
        )
        z = rng.normal(size=9)
        z = z - spec.eta * (spec.eta @ z) / (spec.eta @ spec.eta)
        sec = line_section(poly, spec, z)
        assert sec.v_zero < INF


def test_line_section_reorthogonalizes():
    poly = build_event_polyhedron(X2, LAM2, (0, 1), (1, 1))
    spec = default_contrast(X2, (0, 1))
    z = np.array([0.0, 1.414214])
    skew = z + 1e-3 * spec.eta
    a = line_section(poly, spec, z)
    b = line_section(poly, spec, skew)
    assert b.v_minus == pytest.approx(a.v_minus, abs=1e-9)
    assert b.v_plus == a.v_plus


def test_no_section_is_a_full_line():
    # one of the two endpoints is always finite
    rng = np.random.default_rng(19)
    checked = 0
    for _ in range(150):
        X = rng.normal(size=(10, 5))
        y = 2.0 * rng.normal(size=10)
        lam = rng.uniform(0.5, 4.0)
        res = fit(LassoProblem(X=X, y=y, lam=lam))
        if not res.model or res.boundary_flag:
            continue
        spec = default_contrast(X, res.model)
        poly = build_event_polyhedron(X, lam, res.model, res.signs)
        w = float(spec.eta @ y)
        z = y - spec.c * w
        for _ in range(3):
            noise = rng.normal(size=10)
            noise -= spec.eta * (spec.eta @ noise) / (spec.eta @ spec.eta)
            sec = line_section(poly, spec, z + noise)
            assert not (sec.v_minus == -INF and sec.v_plus == INF)
        # the realized section contains the observed w
        sec = line_section(poly, spec, z)
        assert sec.v_minus < w < sec.v_plus
        assert sec.v_zero > 0
        checked += 1
    assert checked > 80


# ----------------------------------------------------- truncation union


def test_fixture_truncation_union_two_rays():
    spec = default_contrast(X2, (0, 1))
    w = float(spec.eta @ Y2)
    z = Y2 - spec.c * w
    t = truncation_union(X2, LAM2, (0, 1), spec, z)
    assert t.k == 2
    (lo1, hi1), (lo2, hi2) = t.pairs
    assert lo1 == -INF
    assert hi1 == pytest.approx(-7.414214, abs=1e-9)
    assert lo2 == pytest.approx(4.585786, abs=1e-9)
    assert hi2 == INF


def test_fixture_union_unbounded_for_many_z():
    # scanning the orthogonal coordinate: the union stays unbounded on
    # both sides everywhere in this design
    spec = default_contrast(X2, (0, 1))
    for z2 in np.linspace(-9.0, 9.0, 25):
        z = np.array([0.0, z2])
        t = truncation_union(X2, LAM2, (0, 1), spec, z)
        assert not t.bounded_above
        assert not t.bounded_below
        above, below = unboundedness_probe(X2, LAM2, (0, 1), spec, z)
        assert above and below


def test_union_contains_realized_section():
    rng = np.random.default_rng(23)
    done = 0
    for _ in range(100):
        X = rng.normal(size=(12, 6))
        y = 2.0 * rng.normal(size=12)
        lam = rng.uniform(0.8, 5.0)
        res = fit(LassoProblem(X=X, y=y, lam=lam))
        if not res.model or res.boundary_flag:
            continue
        spec = default_contrast(X, res.model)
        poly = build_event_polyhedron(X, lam, res.model, res.signs)
        w = float(spec.eta @ y)
        z = y - spec.c * w
        sec = line_section(poly, spec, z)
        t = truncation_union(X, lam, res.model, spec, z)
        assert t.contains(w)
        lo = max(sec.v_minus, w - 5.0) + 1e-6
        hi = min(sec.v_plus, w + 5.0) - 1e-6
        if hi > lo:
            assert all(t.contains(v) for v in np.linspace(lo, hi, 7))
        done += 1
    assert done > 60


def test_union_respects_capacity():
    X = np.random.default_rng(29).normal(size=(40, 25))
    spec = default_contrast(X, tuple(range(22)))
    with pytest.raises(CapacityError):
        truncation_union(
            X, 1.0, tuple(range(22)), spec, np.zeros(40), cap=20
        )


def test_mirror_section_can_die_leaving_one_ray():
    # hand-built two-variable instance: at the observed z the opposite
    # sign vector's polyhedron misses the line entirely, so the union is
    # a single ray even though the model has size one. The inactive
    # block is what kills it: the mirror event needs y2 > -0.4 while the
    # line is pinned at y2 = -0.5.
    X = np.array([[1.0, 0.6], [0.0, 1.0]])
    lam = 1.0
    y = np.array([10.0, -0.5])
    res = fit(LassoProblem(X=X, y=y, lam=lam))
    assert res.model == (0,)
    assert res.signs == (1,)
    spec = make_contrast(X, (0,), np.array([1.0]), 1.0)
    w = float(spec.eta @ y)
    z = y - spec.c * w
    t = truncation_union(X, lam, (0,), spec, z)
    assert t.pairs == ((1.0, INF),)
    above, below = unboundedness_probe(X, lam, (0,), spec, z)
    assert above and not below
    # brute force along the line confirms the selection pattern
    for w_probe in np.linspace(-12.0, 12.0, 49):
        beta = _oracles.lasso_enumerate(X, z + spec.c * w_probe, lam)
        selected_here = tuple(np.flatnonzero(beta)) == (0,)
        assert selected_here == t.contains(w_probe) or (
            abs(w_probe - 1.0) < 1e-9
        )


def test_probe_agrees_with_exhaustive_union():
    rng = np.random.default_rng(31)
    done = 0
    while done < 120:
        X = rng.normal(size=(10, 6))
        y = 2.5 * rng.normal(size=10)
        lam = rng.uniform(0.5, 4.0)
        res = fit(LassoProblem(X=X, y=y, lam=lam))
        if not res.model or res.boundary_flag:
            continue
        spec = default_contrast(X, res.model)
        w = float(spec.eta @ y)
        z = y - spec.c * w
        t = truncation_union(X, lam, res.model, spec, z)
        above, below = unboundedness_probe(X, lam, res.model, spec, z)
        assert above == (not t.bounded_above)
        assert below == (not t.bounded_below)
        done += 1


def test_probe_full_model_nonzero_directions():
    # with every component of (X_m' X_m)^{-1} gamma nonzero and the full
    # model selected, both directions must come back unbounded
    rng = np.random.default_rng(37)
    done = 0
    while done < 40:
        X = rng.normal(size=(9, 3))
        y = 3.0 * rng.normal(size=9)
        lam = rng.uniform(0.3, 1.5)
        res = fit(LassoProblem(X=X, y=y, lam=lam))
        if len(res.model) != 3 or res.boundary_flag:
            continue
        spec = default_contrast(X, res.model)
        d = np.linalg.solve(X.T @ X, spec.gamma)
        if np.min(np.abs(d)) < 1e-8:
            continue
        w = float(spec.eta @ y)
        z = y - spec.c * w
        above, below = unboundedness_probe(X, lam, res.model, spec, z)
        assert above and below
        done += 1
