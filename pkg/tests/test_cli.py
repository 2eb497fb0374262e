import io
import json
import subprocess
import sys

import pytest

from sbwave.cli import RunConfig, dispatch, main, parse_config
from sbwave.errors import UsageError


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def values(text):
    d = {}
    for line in text.splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            d[k.strip()] = v.strip()
    return d


def test_parse_set_a():
    cfg = parse_config("spectrum --alpha 1 --beta 3 --gamma 0 --omega -0.05 --v 0".split())
    assert cfg == RunConfig("spectrum", alpha=1.0, beta=3.0, gamma=0.0, omega=-0.05, v=0.0)


def test_parse_region():
    cfg = parse_config("region --omega-min -0.25 --omega-max 0 --v 0 --steps 100".split())
    assert (cfg.command, cfg.omega_min, cfg.omega_max, cfg.v, cfg.steps) == ("region", -0.25, 0.0, 0.0, 100)


def test_missing_command():
    with pytest.raises(UsageError):
        parse_config(["--alpha", "1"])


@pytest.mark.parametrize("argv,token", [(["bogus"], "bogus"), (["wave", "--alpha", "x"], "x"),
                                        (["wave", "--nope", "1"], "--nope"), (["wave", "--seed", "1.5"], "1.5")])
def test_usage_errors_carry_token(argv, token):
    with pytest.raises(UsageError) as info:
        parse_config(argv)
    assert info.value.token == token


def test_config_file_precedence(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# Set D\ncommand = hessian\nomega = -0.1625\nv = 0.5  # speed\ngrid-points = 1024\n\n")
    cfg = parse_config(["--config", str(f), "--v", "0.4"])
    assert cfg.command == "hessian" and cfg.omega == -0.1625 and cfg.v == 0.4 and cfg.grid_points == 1024
    assert cfg.alpha == 1.0  # default


def test_config_file_unknown_key(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("omega = -0.05\ncolour = red\n")
    with pytest.raises(UsageError) as info:
        parse_config(["wave", "--config", str(f)])
    assert info.value.token == "colour"


def test_hessian_set_a():
    code, out, _ = run_cli("hessian", "--alpha", "1", "--beta", "3", "--gamma", "0", "--omega", "-0.05", "--v", "0")
    assert code == 0
    v = values(out)
    assert float(v["det"]) == pytest.approx(-1.4933333, abs=1e-6)
    assert v["p"] == "1"
    assert "verdict: certified stable" in out


def test_hessian_set_b_not_certified():
    code, out, _ = run_cli("hessian", "--omega", "-0.1")
    assert code == 0
    assert values(out)["p"] == "0"
    assert "verdict: not certified" in out


def test_residual_reports_gamma_star():
    code, out, _ = run_cli("residual", "--gamma", "0.5")
    assert code == 0
    v = values(out)
    assert float(v["r_nls"]) > 1e-3
    assert float(v["gamma_star"]) == 0.0
    assert "gamma* = 0" in out


def test_residual_derive_gamma():
    code, out, _ = run_cli("residual", "--beta", "2", "--derive-gamma")
    v = values(out)
    assert code == 0
    assert float(v["r_nls"]) < 1e-10
    assert float(v["gamma"]) == pytest.approx(5 / 12)
    assert "note" not in out


def test_exit_status_domain_error():
    code, _, err = run_cli("wave", "--omega", "0.1")
    assert code == 1 and "sigma" in err


def test_exit_status_usage():
    assert run_cli()[0] == 2
    assert run_cli("wave", "--alpha", "-1")[0] == 2
    assert run_cli("wave", "--grid-points", "1000")[0] == 2
    assert run_cli("region", "--omega-min", "-0.2")[0] == 2


def test_orbit_inconsistent_gamma_is_numerical_failure():
    assert run_cli("orbit", "--beta", "2", "--t-end", "0.1")[0] == 1


def test_wave_outputs(tmp_path):
    out = tmp_path / "wave.csv"
    code, text, _ = run_cli("wave", "--omega", "-0.1625", "--v", "0.5", "--out", str(out))
    assert code == 0
    assert values(text)["sigma"] == "0.10000000000000001"
    lines = out.read_text().splitlines()
    assert lines[0] == "x,eps_re,eps_im,eps_hat,n,w,phi"
    manifest = json.loads((tmp_path / "wave.csv.manifest.json").read_text())
    assert manifest["config"]["omega"] == -0.1625 and manifest["config"]["seed"] == 0
    assert manifest["grid"]["n_points"] == len(lines) - 1


def test_region_to_stdout():
    code, out, _ = run_cli("region", "--omega-min", "-0.25", "--omega-max", "0", "--v", "0", "--steps", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "omega,v,exists,stable,det,p,gamma_star"
    assert len(lines) == 6


def test_region_v_range(tmp_path):
    path = tmp_path / "r.csv"
    code, _, _ = run_cli("region", "--omega-min", "-0.3", "--omega-max", "0", "--v-min", "-0.5", "--v-max", "0.5",
                         "--steps", "4", "--v-steps", "3", "--out", str(path))
    assert code == 0
    assert len(path.read_text().splitlines()) == 13


def test_spectrum_jsonl(tmp_path):
    path = tmp_path / "s.jsonl"
    code, out, _ = run_cli("spectrum", "--out", str(path))
    assert code == 0
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["negative_count"] for r in recs] == [1, 0, 1]
    assert "L2: negative_count = 0" in out


def test_evolve_outputs(tmp_path):
    path = tmp_path / "e.csv"
    code, out, _ = run_cli("evolve", "--t-end", "0.2", "--dt", "0.01", "--record-every", "5", "--out", str(path))
    assert code == 0
    assert float(values(out)["t"]) == pytest.approx(0.2)
    m = json.loads((tmp_path / "e.csv.manifest.json").read_text())
    assert m["integrator"]["dt"] == 0.01 and len(m["conservation"]) == 5


def test_orbit_json_and_determinism(tmp_path):
    path = tmp_path / "o.json"
    args = ("orbit", "--t-end", "0.5", "--perturbation", "noise", "--seed", "11", "--out", str(path))
    assert run_cli(*args)[0] == 0
    first = path.read_bytes()
    assert run_cli(*args)[0] == 0
    assert path.read_bytes() == first
    data = json.loads(first)
    assert data["manifest"]["config"]["seed"] == 11
    assert len(data["series"]) == 6


def test_orbit_csv(tmp_path):
    path = tmp_path / "o.csv"
    assert run_cli("orbit", "--t-end", "0.2", "--out", str(path))[0] == 0
    assert path.read_text().splitlines()[0] == "t,distance,s1,s2"
    assert (tmp_path / "o.csv.manifest.json").exists()


def test_dispatch_directly():
    assert dispatch(RunConfig("hessian"), out=io.StringIO()) == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sbwave", "hessian"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "certified stable" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "sbwave"], capture_output=True, text=True)
    assert proc.returncode == 2
