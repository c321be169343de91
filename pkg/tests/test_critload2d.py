import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavqc import critload2d as c2d
from cavqc import volumetric as vol


def test_reference_critical_load(lam_star_ref):
    assert lam_star_ref == pytest.approx(1.071025424897671, abs=1e-9)


def test_report_branches(ref2d, lam_star_ref):
    assert c2d.check_sufficient_2d(1.05, ref2d).satisfied
    assert not c2d.check_sufficient_2d(1.2, ref2d).satisfied
    low = c2d.check_sufficient_2d(0.9, ref2d)
    assert low.branch == "hprime_nonpositive" and low.satisfied
    assert c2d.check_sufficient_2d(1.0, ref2d).strict is True
    at = c2d.check_sufficient_2d(lam_star_ref * (1 - 1e-8), ref2d)
    assert at.satisfied and at.second_implies_first


def test_critical_load_monotone_flag(ref2d):
    assert c2d.critical_load_2d(ref2d, (1.0, 2.0)).monotone


def test_bracket_error(ref2d):
    with pytest.raises(c2d.BracketError):
        c2d.critical_load_2d(ref2d, (1.5, 2.0))


@pytest.mark.parametrize("q", [1.1, 1.3, 1.5, 1.7, 1.9])
def test_e_max_closed_form(q):
    mu = np.linspace(-math.pi / 2, 0, 200001)
    assert np.max(c2d.e_mu(mu, q)) == pytest.approx(float(c2d.e_max(q)), abs=1e-9)
    assert float(c2d.e_mu(c2d.e_argmax(q), q)) == pytest.approx(float(c2d.e_max(q)), rel=1e-12)


def test_g1_domain(ref2d):
    with pytest.raises(vol.DomainError):
        c2d.g1(np.array([0.0, 1.0]), 1.0, ref2d)
    assert c2d.g1(np.array([1.0, 1.0]), 1.0, ref2d) == 0.0


def test_grid_certifies_between_one_and_lambda_star(ref2d, lam_star_ref):
    lam = 0.5 * (1 + lam_star_ref)
    cert = c2d.grid_verify_g1(lam, ref2d, 400, 400)
    assert cert.certified and cert.lemma_applicable and cert.counterexample is None


def test_grid_independent_of_workers(ref2d):
    a = c2d.grid_verify_g1(1.03, ref2d, 200, 200, workers=1, chunk_rows=7)
    b = c2d.grid_verify_g1(1.03, ref2d, 200, 200, workers=4, chunk_rows=7)
    assert (a.min_value, a.n_points) == (b.min_value, b.n_points)
    assert np.array_equal(a.argmin, b.argmin)


def test_counterexample_above_threshold(ref2d, lam_star_ref):
    lam = 1.2 * lam_star_ref
    ce = c2d.counterexample_2d(lam, ref2d)
    assert ce is not None and np.all(ce > 0)
    assert c2d.g1(ce, lam, ref2d) < 0
    assert c2d.counterexample_2d(1.05, ref2d) is None


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-4, 1e3), st.floats(-math.pi / 2 + 1e-6, math.pi - 1e-6))
def test_c0_bound_holds_pointwise(rho, mu):
    mat = vol.reference_material_2d()
    lam = 1.05
    Lam = c2d.PolarPoint(rho, mu).spectrum(lam)
    if np.any(Lam <= 0):
        return
    c0 = c2d.c0_lower_bound(lam, mat)
    G = float(c2d.g1(Lam, lam, mat))
    assert G >= c0 * float(c2d.g_growth(rho, mat.q)) - 1e-10 * (1 + abs(G))


def test_c0_refuses_outside_strict_region(ref2d):
    with pytest.raises(c2d.ConditionNotStrict):
        c2d.c0_lower_bound(0.9, ref2d)
    with pytest.raises(c2d.ConditionNotStrict):
        c2d.c0_lower_bound(1.2, ref2d)


def test_g_growth_continuous():
    assert float(c2d.g_growth(1.0, 1.5)) == pytest.approx(float(c2d.g_growth(1.0 + 1e-12, 1.5)), abs=1e-11)


def test_corrected_constants_smaller(ref2d):
    assert c2d.lemma_factor(1.5, c2d.CORRECTED) == pytest.approx(0.75)
    assert c2d.lemma_factor(1.5, c2d.STATED) == 1.0
    lp = c2d.critical_load_2d(ref2d, (1.0, 2.0)).lam_star
    lc = c2d.critical_load_2d(ref2d, (1.0, 2.0), c2d.CORRECTED).lam_star
    assert 1.0 < lc < lp
