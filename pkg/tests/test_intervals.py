import math

import pytest

from polyci.intervals import IntervalUnion


INF = math.inf


def test_single_interval_roundtrip():
    t = IntervalUnion.from_pairs([(0.0, 1.0)])
    assert t.pairs == ((0.0, 1.0),)
    assert t.k == 1


def test_sorts_and_merges_overlaps():
    t = IntervalUnion.from_pairs([(2.0, 5.0), (-1.0, 0.5), (0.2, 3.0)])
    assert t.pairs == ((-1.0, 5.0),)


def test_merges_touching_endpoints():
    # contact at a single point differs from the true union only on a
    # null set, so normalization glues the pieces together
    t = IntervalUnion.from_pairs([(0.0, 1.0), (1.0, 2.0)])
    assert t.pairs == ((0.0, 2.0),)


def test_keeps_separated_intervals():
    t = IntervalUnion.from_pairs([(2.0, 3.0), (-3.0, -2.0), (-1.0, 1.0)])
    assert t.pairs == ((-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0))
    assert t.k == 3


def test_rejects_degenerate_interval():
    with pytest.raises(ValueError):
        IntervalUnion.from_pairs([(1.0, 1.0)])
    with pytest.raises(ValueError):
        IntervalUnion.from_pairs([(2.0, 1.0)])


def test_rejects_nan_endpoints():
    with pytest.raises(ValueError):
        IntervalUnion.from_pairs([(math.nan, 1.0)])


def test_empty_union_allowed():
    t = IntervalUnion.from_pairs([])
    assert t.k == 0
    assert not t.contains(0.0)


def test_boundedness_flags():
    assert IntervalUnion.from_pairs([(-INF, INF)]).bounded_above is False
    assert IntervalUnion.from_pairs([(-INF, INF)]).bounded_below is False
    two_ray = IntervalUnion.from_pairs([(-INF, -2.0), (2.0, INF)])
    assert two_ray.bounded_above is False
    assert two_ray.bounded_below is False
    box = IntervalUnion.from_pairs([(0.0, 3.0)])
    assert box.bounded_above is True
    assert box.bounded_below is True


def test_outer_gap():
    t = IntervalUnion.from_pairs([(-INF, -2.0), (-1.0, 1.0), (2.0, INF)])
    assert t.outer_gap == 4.0
    assert IntervalUnion.from_pairs([(-INF, INF)]).outer_gap == 0.0


def test_membership_is_open():
    t = IntervalUnion.from_pairs([(0.0, 1.0), (2.0, 3.0)])
    assert t.contains(0.5)
    assert t.contains(2.5)
    assert not t.contains(0.0)
    assert not t.contains(1.0)
    assert not t.contains(1.5)


def test_reflection():
    t = IntervalUnion.from_pairs([(-3.0, -2.0), (-1.0, 1.0), (2.0, INF)])
    assert t.reflected().pairs == ((-INF, -2.0), (-1.0, 1.0), (2.0, 3.0))
    assert t.reflected().reflected().pairs == t.pairs


def test_clamp_interior_point_untouched():
    t = IntervalUnion.from_pairs([(0.0, 1.0)])
    assert t.clamp(0.5, 1.0) == 0.5


def test_clamp_boundary_graze():
    t = IntervalUnion.from_pairs([(0.0, 1.0)])
    w = t.clamp(1.0 + 5e-10, 1.0)
    assert 0.0 < w < 1.0
    assert w == pytest.approx(1.0 - 1e-12, abs=1e-13)
    w = t.clamp(-5e-10, 1.0)
    assert w == pytest.approx(1e-12, abs=1e-13)


def test_clamp_rejects_far_outside():
    t = IntervalUnion.from_pairs([(0.0, 1.0)])
    with pytest.raises(ValueError):
        t.clamp(1.5, 1.0)
    with pytest.raises(ValueError):
        t.clamp(-1e-6, 1.0)
