import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cavqc import parallel, search


def test_chunk_bounds_cover():
    b = list(parallel.chunk_bounds(10, 3))
    assert b == [(0, 3), (3, 6), (6, 9), (9, 10)]


def test_ordered_map_order_independent_of_workers():
    items = list(range(50))
    assert parallel.ordered_map(lambda x: x * x, items, 1) == parallel.ordered_map(lambda x: x * x, items, 8)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=300))
def test_chunked_sum_independent_of_workers(vals):
    v = np.array(vals)
    s1 = parallel.chunked_sum(v, 7, 1)
    assert s1 == parallel.chunked_sum(v, 7, 4)
    assert abs(s1 - np.sum(v)) <= 1e-9 * (1 + np.sum(np.abs(v)))


def test_argmin_reduce_tie_break():
    assert parallel.argmin_reduce([(1.0, 5), (0.5, 9), (0.5, 3)]) == (0.5, 3)


def test_golden_section_and_bisection():
    x, fx = search.golden_section_min(lambda t: (t - 0.3) ** 2, 0.0, 1.0)
    assert abs(x - 0.3) < 1e-6 and fx < 1e-12
    x, fx = search.golden_section_max(lambda t: -((t - 0.7) ** 2), 0.0, 1.0)
    assert abs(x - 0.7) < 1e-6
    r = search.bisect_predicate(lambda t: t < 0.25, 0.0, 1.0, 1e-12)
    assert abs(r - 0.25) < 1e-11
