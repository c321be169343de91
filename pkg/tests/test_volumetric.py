import numpy as np
import pytest

from cavqc import volumetric as vol


def test_quad_log_values():
    law = vol.quad_log(1.0, 2.0)
    assert vol.h_eval(law, 1.0) == 0.0
    assert vol.hprime_eval(law, 1.0) == 0.0
    # h'(t) = 2t - 2/t for the normalized law
    assert vol.hprime_eval(law, 4.0) == pytest.approx(7.5)


def test_power_log_values():
    assert vol.h_eval(vol.power_log(1, 2, 1, 1), 1.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        vol.power_log(1, 0.5, 1, 1)


def test_domain_error():
    with pytest.raises(vol.DomainError):
        vol.h_eval(vol.quad_log(1, 2), 0.0)
    with pytest.raises(vol.DomainError):
        vol.hprime_eval(vol.quad_log(1, 2), -1.0)


@pytest.mark.parametrize("law", [vol.quad_log(1, 2), vol.power_log(1, 1, 1, 1), vol.power_log(2, 1.5, 0.5, 2)])
def test_builtin_laws_pass_hypotheses(law):
    rep = vol.check_hypotheses(law)
    assert rep.ok, rep.failures


def test_log_fails_hypotheses():
    law = vol.custom(np.log, lambda t: 1.0 / t, "log")
    rep = vol.check_hypotheses(law)
    names = {f.split(":")[0] for f in rep.failures}
    assert not rep.ok
    assert "nonnegative" in names and "blowup_at_zero" in names


def test_growth_ratio_power_log():
    assert vol.growth_ratio(vol.power_log(1, 1, 1, 1)) >= 1.0


@pytest.mark.parametrize("law", [vol.quad_log(1, 2), vol.power_log(1, 1, 1, 1)])
def test_hprime_matches_central_differences(law):
    t = np.geomspace(1e-2, 1e2, 500)
    h = 1e-5 * t
    fd = (law.h(t + h) - law.h(t - h)) / (2 * h)
    d = law.hprime(t)
    assert np.all(np.abs(fd - d) <= 1e-6 * (1 + np.abs(d)))


def test_secant_convexity(rng):
    law = vol.quad_log(1, 2)
    a, b = np.exp(rng.uniform(-5, 5, size=(2, 10000)))
    assert np.all(law.h((a + b) / 2) <= (law.h(a) + law.h(b)) / 2 + 1e-12 * (1 + law.h(a) + law.h(b)))


def test_energy_densities():
    m2 = vol.reference_material_2d()
    lam = 1.3
    expect = (np.sqrt(2) * lam) ** 1.5 + m2.law.h(lam**2)
    assert vol.energy_density_2d(m2, lam * np.eye(2)) == pytest.approx(expect)
    assert vol.energy_density_2d(m2, np.diag([1.0, -1.0])) == np.inf
    m3 = vol.Material3D(2.5, 0.7, vol.quad_log(1, 2))
    expect3 = (np.sqrt(3) * lam) ** 2.5 + 3 * 0.7 * lam**2 + m3.law.h(lam**3)
    assert vol.energy_density_3d(m3, lam * np.eye(3)) == pytest.approx(expect3)


def test_energy_density_nonnegative(rng, ref3d):
    F = rng.normal(size=(5000, 3, 3))
    W = vol.energy_density_3d(ref3d, F)
    assert np.all(W[np.isfinite(W)] >= 0)


def test_z_applied_to_cofactor():
    m = vol.Material3D(2.5, 1.0, vol.quad_log(1, 2), vol.z_power_of_norm(1.0, 2.0))
    F = np.diag([1.0, 2.0, 3.0])
    base = vol.Material3D(2.5, 1.0, vol.quad_log(1, 2))
    diff = vol.energy_density_3d(m, F) - vol.energy_density_3d(base, F)
    assert diff == pytest.approx(6.0**2 + 3.0**2 + 2.0**2)


def test_material_validation():
    with pytest.raises(ValueError):
        vol.Material2D(2.0, vol.quad_log(1, 2))
    with pytest.raises(ValueError):
        vol.Material3D(2.5, 0.0, vol.quad_log(1, 2))
