import os
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from momentsteer.cli import CSV_SCHEMA, main, run
from momentsteer.config import load_config, parse_config
from momentsteer.densities import DensitySpec
from momentsteer.errors import ParseError, ValidationError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "data" / "golden"
REGEN = os.environ.get("MOMENTSTEER_REGEN_GOLDEN") == "1"

BASE = """
mode = "density"
order = 2
horizon = 4
[coefficients]
source = "uniform"
lo = 0.5
hi = 0.7
seed = 0
[initial]
family = "gaussian"
mu = 0.0
sigma = 1.0
"""
TERMINAL = """
[terminal]
family = "gaussian"
mu = 1.0
sigma = 2.0
"""


def test_parse_ex1():
    cfg = load_config(CONFIGS / "ex1.toml")
    assert (cfg.mode, cfg.order, cfg.horizon, cfg.master_seed) == ("density", 2, 4, 0)
    assert cfg.initial == DensitySpec.gaussian(0.0, 1.0)
    assert cfg.terminal == DensitySpec.gaussian(1.0, 2.0)
    assert cfg.constraint is None and cfg.nodes == 512
    coeffs = cfg.schedule().coeffs
    assert len(coeffs) == 4 and all(0.5 <= a <= 0.7 for a in coeffs)


def test_parse_all_shipped_configs():
    for path in sorted(CONFIGS.glob("ex*.toml")):
        load_config(path)
    assert load_config(CONFIGS / "ex4.toml").constraint == (-2.0, 2.0)


def test_missing_terminal():
    with pytest.raises(ValidationError) as info:
        parse_config(BASE)
    assert any(p.startswith("terminal") for p in info.value.problems)


def test_bad_interval_and_many_problems():
    text = BASE + TERMINAL + "[constraint]\ninterval = [2.0, -2.0]\n"
    with pytest.raises(ValidationError, match="a < b"):
        parse_config(text)
    text = BASE.replace("lo = 0.5", "lo = 0.9") + TERMINAL + "colour = 3\n"
    with pytest.raises(ValidationError) as info:
        parse_config(text.replace("[terminal]", "[terminal]\nwidth = 1"))
    probs = "\n".join(info.value.problems)
    assert "lo < hi" in probs and "terminal.width" in probs


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError, match="colour"):
        parse_config("colour = 3\n" + BASE + TERMINAL)
    with pytest.raises(ValidationError, match="numerics.speed"):
        parse_config(BASE + TERMINAL + "[numerics]\nspeed = 2\n")


def test_occupation_requires_agents():
    with pytest.raises(ValidationError, match="agents"):
        parse_config(BASE.replace('"density"', '"occupation"') + TERMINAL)


def test_parse_error_has_line():
    with pytest.raises(ParseError) as info:
        parse_config(BASE + "horizon = = 4\n")
    assert info.value.line == BASE.count("\n") + 1


def test_explicit_coefficients_and_samples(tmp_path):
    (tmp_path / "agents.csv").write_text("x\n0.1\n-0.4\n1.3\n0.7\n-1.1\n0.2\n")
    text = """
mode = "occupation"
order = 2
horizon = 2
[coefficients]
source = "explicit"
values = [0.6, 0.55]
[initial]
samples = "agents.csv"
""" + TERMINAL
    cfg = parse_config(text, base_dir=tmp_path)
    assert cfg.schedule().coeffs == (0.6, 0.55)
    np.testing.assert_array_equal(cfg.load_initial_samples(), [0.1, -0.4, 1.3, 0.7, -1.1, 0.2])
    with pytest.raises(ValidationError, match="expected 2 values"):
        parse_config(text.replace("[0.6, 0.55]", "[0.6]"), base_dir=tmp_path)


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "momentsteer.cli", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)


def test_exit_codes(tmp_path):
    assert main([str(CONFIGS / "ex1.toml"), "--out", str(tmp_path / "ok")]) == 0
    assert (tmp_path / "ok" / "report.txt").exists()

    bad = tmp_path / "bad.toml"
    bad.write_text(BASE)
    r = _cli(bad, "--out", tmp_path / "bad")
    assert r.returncode == 2 and "ValidationError" in r.stderr

    nf = tmp_path / "nf.toml"
    nf.write_text(BASE.replace("horizon = 4", "horizon = 1")
                  .replace('source = "uniform"', 'source = "explicit"\nvalues = [0.99]')
                  + TERMINAL.replace("sigma = 2.0", "sigma = 0.5").replace("mu = 1.0", "mu = 0.0"))
    assert _cli(nf, "--out", tmp_path / "nf").returncode == 3

    narrow = tmp_path / "narrow.toml"
    narrow.write_text(BASE + TERMINAL + "[constraint]\ninterval = [-0.05, 0.05]\n")
    r = _cli(narrow, "--out", tmp_path / "narrow")
    assert r.returncode == 5 and "step 0" in r.stderr

    assert main([str(CONFIGS / "ex1.toml"), "--nodes", "8", "--out", str(tmp_path / "x")]) == 2
    assert main([str(tmp_path / "missing.toml")]) == 2


def test_check_plans_only(tmp_path):
    assert main([str(CONFIGS / "ex5.toml"), "--check", "--out", str(tmp_path)]) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["moments_controls.csv", "moments_states.csv", "report.txt"]
    assert "check = plan only" in (tmp_path / "report.txt").read_text()


def test_overrides(tmp_path):
    assert main([str(CONFIGS / "ex1.toml"), "--order", "1", "--nodes", "256",
                 "--out", str(tmp_path)]) == 0
    header = (tmp_path / "moments_states.csv").read_text().splitlines()[0]
    assert header == "k,m1,m2"
    rows = (tmp_path / "control_density_0.csv").read_text().splitlines()
    assert rows[0] == "u,p" and len(rows) == 257


def test_default_output_dir(tmp_path):
    shutil.copy(CONFIGS / "ex1.toml", tmp_path / "ex1.toml")
    r = _cli("ex1.toml", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "runs" / "ex1" / "report.txt").exists()


def test_ex4_first_control_row_zero(tmp_path):
    assert main([str(CONFIGS / "ex4.toml"), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "moments_controls.csv").read_text().splitlines()
    assert rows[1].split(",") == ["0"] + ["0"] * 4
    assert not (tmp_path / "control_density_0.csv").exists()
    u = np.loadtxt(tmp_path / "controls_0.csv", skiprows=1)
    assert np.all(u == 0.0)
    for k in range(1, 5):
        u = np.loadtxt(tmp_path / f"controls_{k}.csv", skiprows=1)
        assert np.all((u >= -2.0) & (u <= 2.0))


def _artifacts(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


@pytest.mark.parametrize("name", ["ex1", "ex5"])
def test_rerun_byte_identical(tmp_path, name):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([str(CONFIGS / f"{name}.toml"), "--out", str(a)]) == 0
    assert main([str(CONFIGS / f"{name}.toml"), "--out", str(b)]) == 0
    assert _artifacts(a) == _artifacts(b)


def test_workers_do_not_change_artifacts(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([str(CONFIGS / "ex5.toml"), "--out", str(a)]) == 0
    assert main([str(CONFIGS / "ex5.toml"), "--out", str(b), "--workers", "3"]) == 0
    assert _artifacts(a) == _artifacts(b)


def _compare_csv(got, want, name):
    g, w = got.splitlines(), want.splitlines()
    assert g[0] == w[0], f"{name}: header changed"
    assert len(g) == len(w), f"{name}: row count changed"
    G = np.array([[float(v) for v in row.split(",")] for row in g[1:]])
    W = np.array([[float(v) for v in row.split(",")] for row in w[1:]])
    np.testing.assert_allclose(G, W, rtol=1e-9, atol=1e-12, err_msg=name)


@pytest.mark.parametrize("name", ["ex1", "ex5"])
def test_golden_artifacts(tmp_path, name):
    out = tmp_path / name
    assert main([str(CONFIGS / f"{name}.toml"), "--out", str(out)]) == 0
    gold = GOLDEN / name
    if REGEN:
        shutil.rmtree(gold, ignore_errors=True)
        shutil.copytree(out, gold)
    got = {p.name: p for p in out.iterdir()}
    want = {p.name: p for p in gold.iterdir()}
    assert sorted(got) == sorted(want)
    for fname, path in want.items():
        if fname.endswith(".csv"):
            _compare_csv(got[fname].read_text(), path.read_text(), fname)
    report = got["report.txt"].read_text().splitlines()
    assert report[0] == f"schema = {CSV_SCHEMA}"
    assert [l.split(" = ")[0] for l in report] == \
        [l.split(" = ")[0] for l in (gold / "report.txt").read_text().splitlines()]
