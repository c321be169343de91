import numpy as np
import pytest

from cavqc import critload2d, volumetric


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def ref2d():
    return volumetric.reference_material_2d()


@pytest.fixture(scope="session")
def lam_star_ref(ref2d):
    return critload2d.critical_load_2d(ref2d, (1.0, 2.0)).lam_star


@pytest.fixture(scope="session")
def ref3d():
    return volumetric.Material3D(2.5, 1.0, volumetric.quad_log(1.0, 2.0))


# --- acceptance summary ----------------------------------------------------------

CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    tag = getattr(getattr(item, "function", None), "criterion", None)
    if tag is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        label = tag
        if hasattr(item, "callspec"):
            label += " [" + "-".join(str(v) for v in item.callspec.params.values()) + "]"
        CRITERIA.append((label, rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, dur in CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({dur:.1f} s)")
    n_ok = sum(ok for _, ok, _ in CRITERIA)
    terminalreporter.write_line(f"{n_ok}/{len(CRITERIA)} criteria passed")
