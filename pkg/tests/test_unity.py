"""Zero functions, separation, shrinking, partitions of unity, retraction."""

import numpy as np
import pytest

from bundleforms import expr as ex
from bundleforms.errors import (
    ContainmentFailure,
    CoverageFailure,
    NotDisjoint,
    OpenSetRejected,
)
from bundleforms.semialg import Base, Cover, SamplePlan, SemialgebraicSet
from bundleforms.unity import (
    partition_of_unity,
    separating_function,
    shrink_cover,
    vertical_retraction,
    zero_function,
)
from helpers import interval


from helpers import LINE, grid

def test_zero_function_point_set():
    from bundleforms.semialg import Condition, Polynomial, EQ
    origin = SemialgebraicSet(1, [[Condition.from_poly(Polynomial.coordinate(1, 0), EQ)]])
    f = zero_function(origin, 0)
    vals = ex.evaluate(f, grid(-1, 1, 201))
    zero_at = np.flatnonzero(vals == 0.0)
    assert len(zero_at) == 1 and np.isclose(grid(-1, 1, 201)[zero_at[0], 0], 0.0)
    assert (vals >= 0).all()


def test_zero_function_halfline_values():
    # X = {x0 >= 1}, r = 1: clamp(1 - x0)^2
    f = zero_function(interval(lo=1.0, strict=False), 1)
    assert ex.evaluate_at(f, [2.0]) == 0.0
    assert ex.evaluate_at(f, [0.0]) == 1.0
    assert f.smoothness() >= 1


def test_zero_function_union_sign_oracle():
    # X = {x0 <= -1} u {x0 >= 1}: zero exactly where the membership scan says so
    s = SemialgebraicSet(1, [*interval(hi=-1.0, strict=False).pieces,
                             *interval(lo=1.0, strict=False).pieces])
    f = zero_function(s, 1)
    pts = grid(-2, 2, 1000)
    vals = ex.evaluate(f, pts)
    inside = s.membership(pts)
    assert np.array_equal(vals == 0.0, inside)
    assert (vals >= 0).all()


def test_zero_function_rejects_open_sets():
    with pytest.raises(OpenSetRejected):
        zero_function(interval(lo=0.0), 1)


def test_separating_function_values():
    x_set = interval(hi=0.0, strict=False)
    y_set = interval(lo=1.0, strict=False)
    f = separating_function(x_set, y_set, 1, SamplePlan(seed=0), box=((-2.0, 2.0),))
    assert ex.evaluate_at(f, [0.0]) == 0.0
    assert ex.evaluate_at(f, [-1.5]) == 0.0
    assert ex.evaluate_at(f, [1.0]) == 1.0
    # midpoint: oracle is the direct g^2/(g^2+h^2) arithmetic
    g_mid = max(0.5, 0.0) ** 2          # clamp(x0)^2 at 1/2
    h_mid = max(1 - 0.5, 0.0) ** 2      # clamp(1-x0)^2 at 1/2
    expected = g_mid**2 / (g_mid**2 + h_mid**2)
    assert ex.evaluate_at(f, [0.5]) == pytest.approx(expected)
    assert 0.0 < ex.evaluate_at(f, [0.5]) < 1.0
    vals = ex.evaluate(f, grid(-2, 2, 500))
    assert vals.min() >= 0.0 and vals.max() <= 1.0


def test_separating_function_not_disjoint():
    with pytest.raises(NotDisjoint):
        separating_function(interval(hi=1.0, strict=False),
                            interval(lo=0.0, strict=False),
                            1, SamplePlan(seed=0), box=((-2.0, 2.0),))


def two_interval_cover():
    return Cover(LINE, [interval(hi=1.0), interval(lo=0.0)], name="two-intervals")


def test_shrink_cover_two_intervals():
    plan = SamplePlan(seed=0, n_chart=500)
    shrunk = shrink_cover(two_interval_cover(), r=1, plan=plan)
    assert shrunk.cover.coverage(plan).ok
    # overlap of the shrunk charts is nonempty
    pts = LINE.sample_points(plan)
    in_both = (shrunk.cover.charts[0].membership(pts)
               & shrunk.cover.charts[1].membership(pts))
    assert in_both.any()


def test_shrink_single_chart_whole_base():
    cover = Cover(LINE, [SemialgebraicSet(1, [[]])], name="whole")
    shrunk = shrink_cover(cover, r=1, plan=SamplePlan(seed=0, n_chart=200))
    assert shrunk.cover.coverage(SamplePlan(seed=5, n_chart=200)).ok


def test_shrink_non_covering_fails():
    bad = Cover(LINE, [interval(hi=-1.0), interval(lo=1.0)])
    with pytest.raises(CoverageFailure):
        shrink_cover(bad, r=1, plan=SamplePlan(seed=0, n_chart=300))


def test_partition_single_chart_is_one():
    cover = Cover(LINE, [SemialgebraicSet(1, [[]])])
    pou = partition_of_unity(cover, r=1, plan=SamplePlan(seed=0, n_chart=200))
    assert len(pou) == 1
    vals = ex.evaluate(pou.weights[0], grid(-2, 2, 100))
    assert np.allclose(vals, 1.0)


def test_partition_two_intervals_sums_to_one():
    plan = SamplePlan(seed=0, n_chart=400)
    pou = partition_of_unity(two_interval_cover(), r=1, plan=plan)
    pts = grid(-2.5, 2.5, 2000)
    total = sum(ex.evaluate(w, pts) for w in pou.weights)
    assert np.abs(total - 1.0).max() < 1e-9
    for w in pou.weights:
        vals = ex.evaluate(w, pts)
        assert vals.min() >= 0.0 and vals.max() <= 1.0 + 1e-12


def test_partition_vanishes_off_chart():
    plan = SamplePlan(seed=0, n_chart=400)
    pou = partition_of_unity(two_interval_cover(), r=1, plan=plan)
    pts = grid(1.0, 2.5, 50)            # outside chart 0 = {x0 < 1}
    assert np.all(ex.evaluate(pou.weights[0], pts) == 0.0)
    pts = grid(-2.5, -1e-9, 50)         # outside chart 1 = {x0 > 0}
    assert np.all(ex.evaluate(pou.weights[1], pts) == 0.0)


def test_partition_smoothness_bound():
    pou = partition_of_unity(two_interval_cover(), r=2,
                             plan=SamplePlan(seed=0, n_chart=300))
    for w in pou.weights:
        assert w.smoothness() >= 2


def test_vertical_retraction_values():
    u_set = interval(lo=-0.5, hi=0.5)
    v_set = interval(lo=-1.0, hi=1.0)
    tau = vertical_retraction(u_set, v_set, 1, SamplePlan(seed=0),
                              box=((-2.0, 2.0),))
    # deep inside U: tau = 1 regardless of t
    assert ex.evaluate_at(tau, [0.0, 0.0]) == pytest.approx(1.0)
    # outside V: tau = t
    assert ex.evaluate_at(tau, [1.5, 0.3]) == pytest.approx(0.3)
    # fringe: strictly between t and 1
    mid = ex.evaluate_at(tau, [0.75, 0.0])
    assert 0.0 < mid < 1.0
    # everywhere sampled: tau between min(t,1) and max(t,1)
    pts = np.column_stack([np.linspace(-2, 2, 101), np.full(101, 0.25)])
    vals = ex.evaluate(tau, pts)
    assert (vals >= 0.25 - 1e-12).all() and (vals <= 1.0 + 1e-12).all()


def test_vertical_retraction_containment_failure():
    with pytest.raises(ContainmentFailure):
        vertical_retraction(interval(lo=-2.0, hi=2.0), interval(lo=-1.0, hi=1.0),
                            1, SamplePlan(seed=0), box=((-3.0, 3.0),))
