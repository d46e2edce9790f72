import json
import subprocess
import sys

import pytest

from conftest import INSTANCES
from toda_hyper.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_running(capsys):
    code, out, _ = run(capsys, "classify", "--instance", str(INSTANCES / "running.json"))
    rep = json.loads(out)
    assert code == 0
    assert rep["case"]["case"] == 2 and rep["case"]["tau"] == "1/6"


def test_classify_without_case_still_succeeds(capsys):
    code, out, _ = run(capsys, "classify", "--instance", str(INSTANCES / "regular_at_one.json"))
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "None" and "hint" in rep


def test_hgparams_running(capsys):
    code, out, _ = run(capsys, "hgparams", "--instance", str(INSTANCES / "running.json"))
    p = json.loads(out)["params"]
    assert code == 0
    assert p["alpha"] == ["-3/2", "-21/20", "-19/20"]
    assert p["beta"] == ["-1", "-1/10", "11/10"]
    assert p["interlacing"] is True


def test_exponents_running(capsys):
    code, out, _ = run(capsys, "exponents", "--instance", str(INSTANCES / "running.json"))
    rep = json.loads(out)
    assert code == 0
    assert rep["exponents"]["shifted_at1"] == ["0", "1", "5/2"]
    assert rep["exponents"]["fuchs_defect"] == "0"


def test_malformed_exit_code(capsys):
    code, _, err = run(capsys, "classify", "--instance", str(INSTANCES / "malformed.json"))
    assert code == 2 and "gamma0[1] must exceed -1" in err
    code, _, _ = run(capsys, "classify")
    assert code == 2
    code, _, _ = run(capsys, "classify", "--instance", str(INSTANCES / "running.json"),
                     "--tol", "bogus=1")
    assert code == 2


def test_no_case_exit_code(capsys):
    code, _, err = run(capsys, "construct", "--instance", str(INSTANCES / "regular_at_one.json"))
    assert code == 3 and "override-tau" in err


def test_not_interlacing_exit_code(capsys):
    code, _, _ = run(capsys, "construct", "--instance", str(INSTANCES / "not_interlacing.json"))
    assert code == 4


def test_wrong_rank_exit_code(capsys):
    code, _, _ = run(capsys, "su3", "--instance", str(INSTANCES / "liouville.json"))
    assert code == 7


def test_construct_writes_artifacts(tmp_path, capsys):
    prefix = str(tmp_path / "run")
    code, out, _ = run(capsys, "construct", "--instance", str(INSTANCES / "running.json"),
                       "--out", prefix, "--grid", "re=-2:3:101,im=-2:2:81")
    assert code == 0 and out == ""
    rep = json.loads((tmp_path / "run.report.json").read_text())
    assert rep["passed"] and rep["grid"]["rows"] == 8181
    assert rep["construction"]["nullspace_dimension"] == 1
    lines = (tmp_path / "run.grid.csv").read_text().splitlines()
    assert len(lines) == 8182
    assert (tmp_path / "run.checkpoint.json").exists()


def test_grid_requires_out(capsys):
    code, _, _ = run(capsys, "construct", "--instance", str(INSTANCES / "running.json"),
                     "--grid", "re=0:1:2,im=1:2:2")
    assert code == 2


def test_reports_are_deterministic(tmp_path, capsys):
    texts = []
    for name in ("a", "b"):
        prefix = str(tmp_path / name)
        assert run(capsys, "construct", "--instance", str(INSTANCES / "liouville.json"),
                   "--out", prefix)[0] == 0
        texts.append((tmp_path / f"{name}.report.json").read_text())
    strip = lambda t: t.replace(str(tmp_path / "a"), "X").replace(str(tmp_path / "b"), "X")
    assert strip(texts[0]) == strip(texts[1])


def test_verify_from_checkpoint(tmp_path, capsys):
    prefix = str(tmp_path / "liou")
    assert run(capsys, "construct", "--instance", str(INSTANCES / "liouville.json"),
               "--out", prefix)[0] == 0
    code, out, _ = run(capsys, "verify", "--checkpoint", prefix + ".checkpoint.json")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert set(rep["checks"]) >= {"single_valued", "toda", "jacobi", "slopes", "mass"}


def test_verify_fails_with_impossible_tolerance(capsys):
    code, out, _ = run(capsys, "verify", "--instance", str(INSTANCES / "liouville.json"),
                       "--tol", "toda=1e-30")
    assert code == 6 and not json.loads(out)["checks"]["toda"]["pass"]


def test_su3_case1(capsys):
    code, out, _ = run(capsys, "su3", "--instance", str(INSTANCES / "su3_case1.json"))
    rep = json.loads(out)
    assert code == 0, rep["checks"]
    assert rep["su3"]["hypergeometricity"]["C_prime"] == "0"


def test_override_tau_off_case(capsys):
    code, out, _ = run(capsys, "exponents", "--instance", str(INSTANCES / "regular_at_one.json"),
                       "--override-tau", "1/3")
    assert code == 0 and json.loads(out)["exponents"]["tau"] == "1/3"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "toda_hyper", "classify", "--instance",
                           str(INSTANCES / "running.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "classify"
