import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from warped_ricci import cli
from warped_ricci.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, ConfigError, RunConfig

SMALL_CFG = """\
[pinch]
builtin = ak-neckpinch

[grid]
n_nodes = 500
tip_nodes = 40
n_uniform = 80

[time]
T1_over_m = 0.01
T_end = 3e-4
n_outputs = 4

[mollification]
m = 2e-2, 1e-2

[tables]
sigma_max = 1e4

[checks]
run = barricade, buckling

[output]
dir = {out}
"""


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "small.cfg"
    cfg.write_text(SMALL_CFG.format(out=root / "run"))
    assert cli.main(["simulate", str(cfg)]) == EXIT_OK
    return root / "run"


def test_bundled_configs_parse():
    names = cli.bundled_configs()
    assert {"ak-reference.cfg", "pancake-reference.cfg"} <= set(names)
    for n in names:
        cfg = RunConfig.load(n)
        assert cfg.m_list and cfg.checks
    ak = RunConfig.load("ak-reference.cfg")
    assert ak.m_list == [2e-2, 1e-2, 5e-3] and ak.T1(1e-2) == pytest.approx(1e-4)


@pytest.mark.parametrize("text,line", [
    ("[pinch]\nbuiltin = ak-neckpinch\n[grid]\nn_nodes = lots\n", 4),
    ("[pinch]\nbuiltin = ak-neckpinch\n\n[bogus]\nx = 1\n", 4),
    ("[pinch]\nbuiltin = ak-neckpinch\n[time]\nmethod = euler\n", 4),
    ("[pinch]\nbuiltin = ak-neckpinch\n[checks]\nrun = barricade, nope\n", 4),
    ("[pinch]\nbuiltin = ak-neckpinch\n[grid]\nwidth = 3\n", 4),
])
def test_config_errors_carry_line(text, line):
    with pytest.raises(ConfigError, match=f":{line}:"):
        RunConfig.from_text(text, source="x.cfg")


def test_config_missing_pinch(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_text("[grid]\nn_nodes = 10\n")
    bad = tmp_path / "bad.cfg"
    bad.write_text("[pinch]\nbuiltin = nope\n")
    assert cli.main(["simulate", str(bad)]) == EXIT_USAGE
    assert cli.main(["simulate", str(tmp_path / "absent.cfg")]) == EXIT_USAGE


def test_simulate_layout(run_dir):
    man = json.loads((run_dir / "manifest.json").read_text())
    assert [r["m"] for r in man["runs"]] == [2e-2, 1e-2]
    for r in man["runs"]:
        d = run_dir / r["dir"]
        assert (d / "snapshots.csv").is_file() and (d / "monitor.json").is_file()
        assert r["n_snapshots"] == 4
    assert man["pinch_spec"]["name"] == "ak-neckpinch"


def test_verify_passes(run_dir, capsys):
    assert cli.main(["verify", str(run_dir)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "barricade" in out and "PASS" in out
    summary = json.loads((run_dir / "verify" / "summary.json").read_text())
    assert summary == {"barricade": "pass", "buckling": "pass"}
    rep = json.loads((run_dir / "verify" / "barricade.json").read_text())
    assert set(rep) >= {"check", "status", "margins", "fit_constants"}


def test_verify_usage_errors(run_dir, tmp_path):
    assert cli.main(["verify", str(run_dir), "--checks", "barricade,nope"]) == EXIT_USAGE
    assert cli.main(["verify", str(tmp_path)]) == EXIT_USAGE
    assert cli.main(["verify"]) == EXIT_USAGE


def test_verify_detects_tampering(run_dir, tmp_path):
    import shutil
    bad = tmp_path / "tampered"
    shutil.copytree(run_dir, bad)
    f = bad / "m=0.01" / "snapshots.csv"
    rows = list(csv.reader(f.open()))
    head, body = rows[0], rows[1:]
    iu, iv, it = head.index("u"), head.index("v"), head.index("t")
    t_last = max(float(r[it]) for r in body)
    # push one productish node well above the upper barrier
    cand = [r for r in body if float(r[it]) == t_last and 0.01 < float(r[iu]) < 0.02]
    cand[len(cand) // 2][iv] = repr(3 * float(cand[len(cand) // 2][iv]))
    with f.open("w", newline="") as fh:
        csv.writer(fh).writerows([head] + body)
    assert cli.main(["verify", str(bad), "--checks", "barricade"]) == EXIT_FAIL
    rep = json.loads((bad / "verify" / "barricade.json").read_text())
    assert rep["status"] == "fail"


def test_verify_rejects_unknown_manifest_check(run_dir, tmp_path):
    import shutil
    bad = tmp_path / "stale"
    shutil.copytree(run_dir, bad)
    man = json.loads((bad / "manifest.json").read_text())
    man["config"]["checks"] = ["barricade", "retired_check"]
    (bad / "manifest.json").write_text(json.dumps(man))
    assert cli.main(["verify", str(bad)]) == EXIT_USAGE


def test_plot_outputs(run_dir):
    assert cli.main(["plot", str(run_dir)]) == EXIT_OK
    pdir = run_dir / "plots"
    for name in ("barriers.gp", "tip.gp", "curvature.gp"):
        text = (pdir / name).read_text()
        # scripts refer to their data by relative name so the folder can move
        assert str(run_dir) not in text
        assert (pdir / name.replace(".gp", ".png")).stat().st_size > 0
    data = np.loadtxt(pdir / "curvature_trend.dat")
    assert data.shape[1] == 3


def test_bryant_command(tmp_path, capsys):
    assert cli.main(["bryant", "--q", "1", "--out", str(tmp_path)]) == EXIT_USAGE
    assert cli.main(["bryant", "--q", "2", "--sigma-max", "200", "--tol", "1e-8",
                     "--out", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "bryant_q2_report.json").read_text())
    assert rep["q"] == 2
    assert (tmp_path / "bryant_q2.csv").is_file()


def test_validate_pinch(tmp_path):
    assert cli.main(["validate-pinch", "pancake"]) == EXIT_OK
    assert cli.main(["validate-pinch", "degenerate-1"]) == EXIT_FAIL
    assert cli.main(["validate-pinch", "nope"]) == EXIT_USAGE
    f = tmp_path / "p.cfg"
    f.write_text("[pinch]\nq = 2\nV0 = constant c=0.5\n")
    assert cli.main(["validate-pinch", str(f)]) == EXIT_FAIL


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "warped_ricci.cli", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    for sub in ("bryant", "simulate", "verify", "plot", "validate-pinch"):
        assert sub in r.stdout
