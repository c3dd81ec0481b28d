import json

import pytest

from hardy_disc.cli import ConfigError, ExperimentConfig, main, parse_config, run

GREEN_DLJ = "scenario = verify-dlj\npreset = green-disk\nn_angles = 64\nn_radii = 64\nN = 8\n"


def _write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_defaults():
    cfg = parse_config("")
    assert cfg == ExperimentConfig()
    assert cfg.n_angles == 256 and cfg.N == 32 and cfg.functional == ((-1, 1.0),)


def test_parse_values_and_comments():
    cfg = parse_config("# comment\nscenario = extremal  # inline\np = 4\nfunctional = -1:1, -2:0.3j\n"
                       "levels = -1, -0.5\ncoefficients = 2, 0.5, 0\n")
    assert cfg.scenario == "extremal" and cfg.p == 4.0
    assert cfg.functional == ((-1, 1 + 0j), (-2, 0.3j))
    assert cfg.levels == (-1.0, -0.5)


@pytest.mark.parametrize("text, line", [
    ("n_angles = 256\nbogus = 1\n", 2),
    ("\n\nn_angles = 100\n", 3),
    ("p = two\n", 1),
    ("scenario = nope\n", 1),
    ("levels = -1, 0.5\n", 1),
    ("just words\n", 1),
])
def test_config_errors_name_the_line(text, line):
    with pytest.raises(ConfigError, match=f"line {line}"):
        parse_config(text)


def test_config_error_without_line():
    with pytest.raises(ConfigError):
        parse_config("n_angles = 32\n")  # N = 32 default too large for 32 angles


def test_outputs_written(tmp_path):
    rec = run(parse_config(GREEN_DLJ), tmp_path)
    assert rec.passed
    header = (tmp_path / "verify-dlj.csv").read_text().splitlines()[0]
    assert header == "c,value,reference,abs_error"
    data = json.loads((tmp_path / "verify-dlj.json").read_text())
    assert data["pass"] and data["version"] and data["config"]["seed"] == 0
    assert all({"name", "value", "reference", "tolerance", "pass"} <= set(c) for c in data["checks"])


def test_deterministic_csv(tmp_path):
    cfg = parse_config("scenario = factorize\npreset = exp-weight\nn_angles = 64\nN = 8\ntrials = 5\nseed = 3\n")
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    assert (tmp_path / "a" / "factorize.csv").read_bytes() == (tmp_path / "b" / "factorize.csv").read_bytes()


def test_seed_environment_override(tmp_path, monkeypatch):
    cfg = parse_config("scenario = factorize\npreset = exp-weight\nn_angles = 64\nN = 8\ntrials = 4\n")
    run(cfg, tmp_path / "a")
    monkeypatch.setenv("HARDY_DISC_SEED", "11")
    rec = run(cfg, tmp_path / "b")
    assert rec.config["seed"] == 11
    assert (tmp_path / "a" / "factorize.csv").read_bytes() != (tmp_path / "b" / "factorize.csv").read_bytes()
    run(parse_config("scenario = factorize\npreset = exp-weight\nn_angles = 64\nN = 8\n"
                     "trials = 4\nseed = 11\n"), tmp_path / "c")
    assert (tmp_path / "b" / "factorize.csv").read_bytes() == (tmp_path / "c" / "factorize.csv").read_bytes()


def test_exit_code_pass(tmp_path):
    assert main([_write(tmp_path, GREEN_DLJ), "--out", str(tmp_path / "o"), "--quiet"]) == 0


def test_exit_code_failed_check(tmp_path, capsys):
    cfg = ("scenario = extremal\npreset = exp-weight\np = 1.333333333333\niterations = 1\n"
           "functional = -1:1, -2:0.3, -5:0.7j\n")
    assert main([_write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_exit_code_config_error(tmp_path):
    assert main([_write(tmp_path, "n_angles = 100\n"), "--out", str(tmp_path)]) == 2
    assert main([str(tmp_path / "missing.cfg")]) == 2
    assert main([_write(tmp_path, GREEN_DLJ), "--grid", "48"]) == 2


def test_exit_code_numerical_failure(tmp_path):
    cfg = "scenario = verify-dlj\npreset = biharmonic-const\nn_angles = 32\nn_radii = 32\nN = 4\nlevels = -1000\n"
    assert main([_write(tmp_path, cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 3


@pytest.mark.parametrize("scenario, preset", [
    ("weight", "biharmonic-const"),
    ("weight", "trig-weight"),
    ("exhaust", "green-disk"),
    ("factorize", "green-disk"),
    ("extremal", "exp-weight"),
])
def test_small_scenarios_pass(tmp_path, scenario, preset):
    cfg = parse_config(f"scenario = {scenario}\npreset = {preset}\nn_angles = 64\nn_radii = 64\nN = 8\ntrials = 5\n")
    assert run(cfg, tmp_path).passed
