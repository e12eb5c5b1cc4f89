import json
import subprocess
import sys

import numpy as np
import pytest

from qtensor import Tensor
from qtensor.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_example_2_3(capsys):
    code, out, _ = run(capsys, "solve", "--example", "ex2.3", "--q", "-1,-1")
    assert code == 0
    obj = json.loads(out)
    assert obj["complete"] and obj["method"] == "enumerate" and obj["seed"] == 0x5EED
    assert any(np.allclose(s["x"], [0, 1]) and s["support"] == [2] for s in obj["solutions"])


def test_solve_certified_empty(capsys):
    code, out, _ = run(capsys, "solve", "--example", "ex2.2", "--q", "-1,-1")
    assert code == 2
    assert json.loads(out)["certified_empty"]


def test_solve_vi_and_table(capsys):
    code, out, _ = run(capsys, "solve", "--example", "ex2.3", "--q=-1,-1", "--method", "vi", "--format", "table")
    assert code == 0 and "status converged" in out and "(0, 1)" in out


def test_solve_over_cap_switches_to_vi(capsys, tmp_path):
    p = tmp_path / "a.json"
    main(["gen", "--random", "nonnegative", "--m", "3", "--n", "3", "-o", str(p)])
    capsys.readouterr()
    code, out, _ = run(capsys, "solve", str(p), "--q", "-1,-1,-1", "--cap", "2")
    obj = json.loads(out)
    assert obj["method"] == "vi" and "exceeds cap" in obj["note"] and code == 0


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--example", "ex2.2")
    assert code == 0
    obj = json.loads(out)
    verdicts = {v["class"]: v["verdict"] for v in obj["verdicts"]}
    assert verdicts["R0"] == "member" and verdicts["R"] == "non_member" and verdicts["Q"] == "non_member"
    assert obj["ladder"]["consistent"]


def test_classify_table_and_q_batch(capsys):
    code, out, _ = run(capsys, "classify", "--example", "ex2.1", "--m", "3", "--n", "2", "--q-batch", "1:2", "--format", "table")
    assert code == 0 and "ladder: consistent" in out and "strictly_copositive" in out


def test_falsify_monotonicity(capsys):
    code, out, _ = run(capsys, "falsify", "--example", "ex2.3", "--property", "pseudo-monotone", "--q", "0.5,0.5")
    assert code == 2
    obj = json.loads(out)
    assert obj["verdict"] == "non_member" and set(obj["pair"]) == {"x", "y"}


def test_falsify_class_property(capsys):
    code, out, _ = run(capsys, "falsify", "--example", "ex2.1", "--m", "3", "--n", "3", "--property", "p")
    assert code == 2
    x = np.array(json.loads(out)["certificate"]["payload"]["x"])
    assert np.max(x * x.sum() ** 2) <= 1e-12
    code, out, _ = run(capsys, "falsify", "--example", "ex2.1", "--property", "strictly-semi-positive")
    assert code == 3 and json.loads(out)["verdict"] == "no_counterexample_found"


def test_falsify_errors(capsys):
    code, _, err = run(capsys, "falsify", "--example", "ex2.2", "--property", "copositive")
    assert code == 1 and "symmetric" in err
    code, _, err = run(capsys, "falsify", "--example", "ex2.2", "--property", "bogus")
    assert code == 1 and "unknown property" in err


def test_gen_deterministic(capsys, tmp_path):
    code, out1, err = run(capsys, "gen", "--random", "general", "--m", "3", "--n", "3", "--seed", "5")
    assert code == 0 and "seed 5" in err
    _, out2, _ = run(capsys, "gen", "--random", "general", "--m", "3", "--n", "3", "--seed", "5")
    assert out1 == out2
    assert Tensor.from_json(out1).dim == 3
    _, out3, _ = run(capsys, "gen", "--example", "ex2.1", "--m", "3", "--n", "4")
    assert len(json.loads(out3)["entries"]) == 64
    _, out4, _ = run(capsys, "gen", "--spec", '{"kind": "random_symmetric", "m": 3, "n": 2, "seed": 1}')
    assert json.loads(out4)["order"] == 3


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--example", "ex2.3", "--q", "-1,-1", "--x", "0,1")
    assert code == 0 and json.loads(out)["valid"]
    code, out, _ = run(capsys, "verify", "--example", "ex2.3", "--q", "-1,-1", "--x", "1,0")
    obj = json.loads(out)
    assert code == 2 and obj["condition"] == "w_nonnegative" and obj["index"] == 2


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["solve", "--example", "ex2.3", "--q", "1,a"], "not a number"),
        (["solve", "--example", "ex2.3", "--q", "1,2,3"], "has 3 entries"),
        (["solve", "--q", "1,2"], "no tensor"),
        (["solve", "--example", "ex7", "--q", "1,2"], "unknown example"),
        (["solve", "--example", "ex2.3", "--q", "1,1", "--tol", "0"], "--tol"),
        (["verify", "--example", "ex2.3", "--q", "1,1", "--x", "1"], "--x"),
        (["gen"], "gen: pass"),
        (["classify", "--example", "ex2.3", "--q-batch", "x"], "seed:count"),
    ],
)
def test_input_errors(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 1 and needle in err


def test_bad_json_reports_position(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"order": 3,\n  "dim": 2,\n  "entries": [}\n')
    code, _, err = run(capsys, "solve", str(p), "--q", "1,1")
    assert code == 1 and "line 3" in err
    p.write_text('{"order": 2, "dim": 2, "entries": [{"idx": [1, 1], "val": 1}, {"idx": [1, 1], "val": 2}]}')
    code, _, err = run(capsys, "solve", str(p), "--q", "1,1")
    assert code == 1 and "entries[1]: duplicate" in err
    code, _, err = run(capsys, "solve", str(tmp_path / "missing.json"), "--q", "1,1")
    assert code == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qtensor", "solve", "--example", "ex2.3", "--q", "-1,-1", "--format", "table"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "complete True" in r.stdout
