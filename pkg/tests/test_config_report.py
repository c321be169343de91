import math

import numpy as np
import pytest

from cavqc import config, report


def write(tmp_path, text, name="m.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_material_roundtrip(tmp_path):
    p = write(tmp_path, 'dim = 2\nq = 1.5\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\n')
    m = config.load_material(p)
    assert m.dim == 2 and m.q == 1.5
    assert float(m.law.hprime(4.0)) == pytest.approx(7.5)


def test_material_3d(tmp_path):
    p = write(tmp_path, 'dim = 3\nq = 2.5\ngamma = 1.0\nh.family = "power_log"\n'
                        'h.params = { a = 1, p = 1, b = 1, r = 1 }\nZ.family = "power_of_norm"\nZ.params = { c = 0.1, s = 2.0 }\n')
    m = config.load_material(p)
    assert m.dim == 3 and m.gamma == 1.0


@pytest.mark.parametrize("text", [
    'dim = 2\nq = 1.5\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\nextra = 1\n',
    'dim = 4\nq = 1.5\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\n',
    'dim = 2\nq = 2.5\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\n',
    'dim = 2\nq = 1.5\nh.family = "nope"\n',
    'dim = 2\nq = 1.5\nh.family = "quad_log"\nh.params = { a = 1.0 }\n',
    'dim = 2\nq = 1.5\ngamma = 1.0\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\n',
    'dim = 2\nq = [\n',
])
def test_bad_material(tmp_path, text):
    with pytest.raises(config.ConfigError):
        config.load_material(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(config.ConfigError):
        config.load_material(tmp_path / "absent.toml")


def test_field_file(tmp_path):
    p = write(tmp_path, 'perturbation.family = "bump"\namp = 0.05\nfreq = [1, 2]\nresolution = 32\nlambda = 1.0\n')
    spec, lam, res, dim = config.load_field(p)
    assert spec.family == "bump" and spec.freq == (1, 2) and res == 32 and dim == 2


def test_bad_field(tmp_path):
    with pytest.raises(config.ConfigError):
        config.load_field(write(tmp_path, 'perturbation.family = "bump"\namp = 0.05\nresolution = 4\nlambda = 1.0\n'))


def test_hash_stable():
    assert config.config_hash({"a": 1, "b": 2}) == config.config_hash({"b": 2, "a": 1})
    assert len(config.config_hash("x")) == 16


def test_fmt():
    assert report.fmt(None) == ""
    assert report.fmt(np.float64(0.1)) == "0.1"
    assert report.fmt(np.bool_(True)) == "true"
    assert report.fmt(math.inf) == "inf" and report.fmt(-math.inf) == "-inf"


def test_render_csv():
    text = report.render_csv(["a", "b"], [{"a": 1, "b": 0.5}], "abc", ["note"])
    assert text.splitlines() == ["# cavqc 0.1.0 config=abc", "# note", "a,b", "1,0.5"]
