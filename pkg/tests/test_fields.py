import math

import numpy as np
import pytest

from cavqc import fields
from cavqc import volumetric as vol
from cavqc.fields import PerturbationSpec


def test_tensor_rule_volume():
    X, W = fields.tensor_rule(8, 4, 3)
    assert W.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all((X > 0) & (X < 1))


def _line_integral(spec, a, b, n=64):
    t, w = np.polynomial.legendre.leggauss(n)
    t, w = (t + 1) / 2, w / 2
    X = a[None, :] + t[:, None] * (b - a)[None, :]
    G = fields.perturbation_gradient(spec, X)
    return np.einsum("k,kij,j->i", w, G, b - a)


@pytest.mark.parametrize("family", fields.FAMILIES)
@pytest.mark.parametrize("dim", [2, 3])
def test_gradient_is_path_independent(family, dim):
    # the sampled tensor must be an exact gradient: line integrals depend only on endpoints
    spec = PerturbationSpec(family, 0.1, (1, 2, 1)[:dim], (0.3, -0.5, 0.8)[:dim])
    o = np.zeros(dim)
    x = np.array([0.31, 0.47, 0.62][:dim])
    corner = x.copy()
    corner[0] = 0.0
    direct = _line_integral(spec, o, x)
    bent = _line_integral(spec, o, corner) + _line_integral(spec, corner, x)
    assert np.allclose(direct, bent, atol=1e-12)


@pytest.mark.parametrize("family", fields.FAMILIES)
def test_null_lagrangians(family):
    fld = fields.make_field(PerturbationSpec(family, 0.02, (2, 1), (0.6, 0.8)), 1.0, 16)
    assert fields.null_lagrangian_check(fld).ok()
    fld3 = fields.make_field(PerturbationSpec(family, 0.02, (1, 2, 1), (0.6, 0.8, 0.0)), 1.0, 8, dim=3)
    assert fields.null_lagrangian_check(fld3).ok()


def test_divfree_is_volume_preserving_to_first_order():
    fld = fields.make_field(PerturbationSpec("divfree", 0.01, (1, 1)), 1.0, 8)
    tr = np.trace(fld.grads, axis1=1, axis2=2)
    assert np.allclose(tr, 2.0, atol=1e-12)


def test_truncated_bump_breaks_boundary_values():
    fld = fields.make_field(PerturbationSpec("bump", 0.05, (1, 1), (1.0, 0.0), truncated=True), 1.0, 16)
    assert not fld.boundary_compatible
    assert not fields.null_lagrangian_check(fld).ok()


def test_inadmissible_field_raises():
    with pytest.raises(fields.AdmissibilityError):
        fields.make_field(PerturbationSpec("bump", 5.0, (1, 1), (1.0, 0.0)), 1.0, 16)


def test_resolution_floor():
    with pytest.raises(ValueError):
        fields.make_field(None, 1.0, 4)


def test_homogeneous_field_has_zero_delta():
    mat = vol.reference_material_2d()
    fld = fields.make_field(None, 1.03, 8)
    assert fields.delta(fld, mat) == pytest.approx(0.0, abs=1e-12)


def test_chain_with_c0_between_one_and_lambda_star(rng, lam_star_ref):
    mat = vol.reference_material_2d()
    lam = 0.5 * (1 + lam_star_ref)
    for fld in fields.standard_corpus(lam, rng, count=6, resolution=16):
        rep = fields.decomposition_check_2d(fld, mat)
        assert rep.chain_upper_ok and rep.chain_lower_ok and rep.excess_ok
        assert rep.c0 is not None and rep.c0_ok


def test_quadrature_error_small():
    mat = vol.reference_material_2d()
    spec = PerturbationSpec("trig", 0.02, (1, 2), (0.2, 0.4))
    assert fields.quadrature_error_estimate(spec, 1.0, 16, mat) < 1e-8


def test_excess_identity_samples(rng):
    worst, n = fields.sample_excess_identity(200, rng)
    assert n == 200 and worst <= 1e-7


def test_excess_identity_degenerate_path():
    with pytest.raises(fields.DegeneratePathError):
        fields.excess_identity_check(np.array([[-1.0, 0.0], [0.0, -1.0]]), 1.0)


@pytest.mark.parametrize("dim", [2, 3])
def test_radial_map_oracle_homogeneous(dim):
    W, G = fields.radial_map_field(lambda R: 1.3 * R, lambda R: 1.3 + 0 * R, dim, 16, 16)
    vol_ = math.pi if dim == 2 else 4 * math.pi / 3
    assert W.sum() == pytest.approx(vol_, rel=1e-12)
    assert np.allclose(G, 1.3 * np.eye(dim))
