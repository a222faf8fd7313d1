import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from qndlab.intervals import IntervalUnion

pairs = st.lists(
    st.tuples(st.floats(-50, 50), st.floats(0, 10)).map(lambda p: (p[0], p[0] + p[1])),
    max_size=8,
)


def test_merge_and_measure():
    u = IntervalUnion.from_pairs([(0, 1), (0.5, 2), (3, 4), (5, 5)])
    assert u.components == ((0.0, 2.0), (3.0, 4.0))
    assert u.measure == 3.0


def test_intersection_and_complement():
    a = IntervalUnion.from_pairs([(0, 2), (3, 5)])
    b = IntervalUnion.from_pairs([(1, 4)])
    assert (a & b).components == ((1.0, 2.0), (3.0, 4.0))
    assert a.complement_in(0, 6).components == ((2.0, 3.0), (5.0, 6.0))
    assert a.clip(1, 10).measure == 3.0


def test_hausdorff_endpoints():
    a = IntervalUnion.from_pairs([(0, 1)])
    assert a.hausdorff_endpoints(IntervalUnion.from_pairs([(0.1, 1)])) == 0.1
    assert a.hausdorff_endpoints(IntervalUnion.empty()) == float("inf")


@given(pairs, pairs)
def test_inclusion_exclusion(p, q):
    a, b = IntervalUnion.from_pairs(p), IntervalUnion.from_pairs(q)
    lhs = (a | b).measure + (a & b).measure
    assert abs(lhs - a.measure - b.measure) < 1e-9


@given(pairs, st.floats(-60, 60))
def test_membership_matches_components(p, t):
    a = IntervalUnion.from_pairs(p)
    assert (t in a) == bool(a.contains_array(np.array([t]))[0])
    comps = a.components
    assert all(x[1] < y[0] for x, y in zip(comps, comps[1:]))
