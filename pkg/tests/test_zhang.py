import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavqc import zhang
from cavqc.critload2d import CORRECTED, lemma_factor


def test_constants():
    assert zhang.c2(1.0) == pytest.approx(0.25)
    assert zhang.c1(1.0, 2.0) == pytest.approx(0.5)
    assert zhang.c2_original(1.5) < zhang.c2(1.5)


@pytest.mark.parametrize("q", [1.2, 1.5, 1.8])
def test_branches_meet_at_switch_point(q):
    M = 1.7
    assert zhang.c1(M, q) * M * M == pytest.approx(zhang.c2(q) * M**q, rel=1e-14)
    assert zhang.big_F(np.array([[M, 0.0], [0.0, 0.0]]), M, q) == pytest.approx(zhang.c2(q) * M**q, rel=1e-14)


@pytest.mark.parametrize("q", [1.2, 1.5, 1.8])
def test_corrected_constants_hold(q, rng):
    res, _, _ = zhang.sample_zhang(q, 20000, rng, factor=lemma_factor(q, CORRECTED))
    assert res >= -1e-12


def test_excess_zero_for_zero_perturbation(rng):
    A = rng.normal(size=(100, 2, 2))
    assert np.allclose(zhang.zhang_excess(A, np.zeros_like(A), 1.5), 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.05, 1.95), st.floats(-1, 1), st.floats(1e-3, 1e3))
def test_excess_is_nonnegative(q, c, t):
    # convexity of |.|^q: the excess never goes negative
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    s = np.sqrt(max(1 - c * c, 0.0))
    B = t * np.array([[c, s], [0.0, 0.0]])
    assert zhang.zhang_excess(A, B, q) >= -1e-9 * (1 + t**q)


def test_kappa_numeric_bracketed():
    k, t, c = zhang.kappa_numeric(2.5)
    assert zhang.kappa_lower(2.5) <= k <= zhang.kappa_upper(2.5)
    assert zhang.kappa_objective(t, c, 2.5) == pytest.approx(k, abs=1e-12)


def test_kappa_numeric_rejects_q():
    with pytest.raises(ValueError):
        zhang.kappa_numeric(1.5)


def test_kappa_estimate_fields():
    e = zhang.kappa_estimate(2.3)
    assert e.in_bracket and e.affine_error < 0.025
