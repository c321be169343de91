import math

import numpy as np
import pytest

from cavqc import critload3d as c3d
from cavqc import volumetric as vol
from cavqc import zhang


def stiff():
    return vol.Material3D(2.5, 100.0, vol.quad_log(1.0, 2.0))


@pytest.mark.parametrize("q", [2.1, 2.5, 2.9])
def test_s_numeric_matches_closed(q):
    s = c3d.s_numeric(q, 201)
    assert all(abs(v - float(c3d.s_closed(q))) < 1e-5 for v in s)


@pytest.mark.parametrize("q", [2.2, 2.5, 2.8])
def test_f_max_closed_is_the_maximum(q):
    fmax, _ = c3d.f_phi_grid_max(q)
    assert fmax == pytest.approx(float(c3d.f_max_closed(q)), abs=1e-9)
    assert float(c3d.f_max_reciprocal(q)) == pytest.approx(1.0 / float(c3d.f_max_closed(q)), rel=1e-12)


def test_critical_load_binding():
    mat = stiff()
    low = c3d.critical_load_3d(mat, (1.0, 3.0))
    num = c3d.critical_load_3d(mat, (1.0, 3.0), c3d.KAPPA_NUMERIC)
    assert low.binding == "main" and low.lam_star == pytest.approx(1.20912, abs=1e-4)
    assert num.lam_star == pytest.approx(1.22544, abs=1e-4)
    soft = c3d.critical_load_3d(vol.Material3D(2.5, 0.05, vol.quad_log(1, 2)), (1.0, 3.0))
    assert soft.binding == "gamma"


def test_kappa_value_modes():
    assert c3d.kappa_value(2.5) == pytest.approx(float(zhang.kappa_lower(2.5)))
    assert c3d.kappa_value(2.5, c3d.KAPPA_NUMERIC) >= c3d.kappa_value(2.5)
    with pytest.raises(ValueError):
        c3d.kappa_value(2.5, "bogus")


def test_counterexample_is_sharp():
    mat = stiff()
    ls = c3d.critical_load_3d(mat, (1.0, 3.0)).lam_star
    assert c3d.counterexample_f1(ls * (1 - 1e-6), mat) is None
    ce = c3d.counterexample_f1(ls * (1 + 1e-4), mat)
    assert ce is not None and np.all(ce > 0)
    assert c3d.f1(ce, ls * (1 + 1e-4), mat) < 0


def test_grid_certifies_below_threshold():
    mat = stiff()
    cert = c3d.grid_verify_f(1.1, mat, n_rho=80, n_theta=61, n_phi=121)
    assert cert.certified


def test_exit_radii_positive():
    r = c3d.exit_radii(2.0, 3.5, 1.0)
    assert all(v > 0 for v in r)


def test_p_function_nonnegative_far_from_zero(rng):
    A = rng.normal(size=(1000, 3, 3))
    assert np.all(c3d.p_function(A, 1.0) >= -c3d.p_bound(A, 1.0) - 1e-12)


def test_conjecture_probe_small(rng):
    rep = c3d.conjecture_probe(1.0, 20, rng)
    assert rep.trials == 20 and not rep.counterexample_candidate
    rep2 = c3d.conjecture_probe(1.0, 20, np.random.default_rng(20240601), workers=4)
    assert np.array_equal(rep.values, rep2.values)
