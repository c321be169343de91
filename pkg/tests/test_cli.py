import pytest

from cavqc import cli

REF2 = 'dim = 2\nq = 1.5\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\n'
M3 = 'dim = 3\nq = 2.5\ngamma = 100.0\nh.family = "quad_log"\nh.params = { a = 1.0, b = 2.0 }\n'
PL = 'dim = 2\nq = 1.5\nh.family = "power_log"\nh.params = { a = 1, p = 1, b = 1, r = 1 }\n'


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in (("ref2", REF2), ("m3", M3), ("pl", PL), ("bad", "dim = 2\nq = [\n")):
        p = tmp_path / f"{name}.toml"
        p.write_text(text)
        out[name] = str(p)
    return out


def run(argv, tmp_path):
    out = tmp_path / "out.csv"
    code = cli.main(argv + ["-o", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_critical_load_2d(files, tmp_path):
    code, text = run(["critical-load", "--dim", "2", "--material", files["ref2"]], tmp_path)
    assert code == cli.EXIT_OK
    assert text.startswith("# cavqc 0.1.0 config=")
    assert "1.0710254" in text


def test_critical_load_3d(files, tmp_path):
    code, text = run(["critical-load", "--dim", "3", "--material", files["m3"], "--kappa", "numeric"], tmp_path)
    assert code == cli.EXIT_OK and "1.2254" in text


def test_usage_errors(files, tmp_path):
    assert run(["critical-load", "--dim", "2", "--material", files["bad"]], tmp_path)[0] == cli.EXIT_USAGE
    assert run(["critical-load", "--dim", "3", "--material", files["ref2"]], tmp_path)[0] == cli.EXIT_USAGE
    assert run(["verify", "--lemma", "zhang", "--q", "2.5"], tmp_path)[0] == cli.EXIT_USAGE
    assert cli.main(["nonsense"]) == cli.EXIT_USAGE


def test_runtime_error_on_bad_bracket(files, tmp_path):
    code, _ = run(["critical-load", "--dim", "2", "--material", files["ref2"], "--bracket", "1.5,2"], tmp_path)
    assert code == cli.EXIT_RUNTIME


def test_verify_zhang_exit_codes(tmp_path):
    assert run(["verify", "--lemma", "zhang", "--q", "1.8", "--samples", "20000"], tmp_path)[0] == cli.EXIT_OK
    code, _ = run(["verify", "--lemma", "zhang", "--q", "1.5", "--samples", "20000", "--constants", "corrected"],
                  tmp_path)
    assert code == cli.EXIT_OK


def test_verify_lesperanza(files, tmp_path):
    code, text = run(["verify", "--lemma", "lesperanza", "--q", "1.5", "--lambda", "1.03", "--grid", "200",
                      "--material", files["ref2"]], tmp_path)
    assert code == cli.EXIT_OK and "true" in text


def test_verify_excess_and_trace(tmp_path):
    assert run(["verify", "--lemma", "excess", "--samples", "100"], tmp_path)[0] == cli.EXIT_OK
    assert run(["verify", "--lemma", "trace", "--samples", "1000"], tmp_path)[0] == cli.EXIT_OK


def test_kappa(tmp_path):
    code, text = run(["kappa", "--q-grid", "2.1,2.3,0.1"], tmp_path)
    assert code == cli.EXIT_OK and len(text.strip().splitlines()) == 2 + 3


def test_cavitation(files, tmp_path):
    code, text = run(["cavitation", "--material", files["pl"], "--dim", "2", "--points", "3"], tmp_path)
    assert code == cli.EXIT_OK and "4.994" in text


def test_conjecture(tmp_path):
    code, text = run(["conjecture", "--trials", "10"], tmp_path)
    assert code == cli.EXIT_OK
    assert not (tmp_path / "out.csv.counterexample.json").exists()


def test_field_check(files, tmp_path):
    f = tmp_path / "f.toml"
    f.write_text('perturbation.family = "trig"\namp = 0.02\nfreq = [1, 2]\nresolution = 16\nlambda = 1.0\n')
    code, text = run(["field-check", "--field", str(f), "--material", files["ref2"]], tmp_path)
    assert code == cli.EXIT_OK and "f.toml" in text


def test_hash_ignores_workers(files, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    base = ["verify", "--lemma", "trace", "--samples", "500", "--seed", "3"]
    cli.main(base + ["--workers", "1", "-o", str(a)])
    cli.main(base + ["--workers", "4", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
