import csv
import io
import json
import math

import numpy as np
import pytest

from adrecover.cli import main, parse_grid, parse_number
from adrecover.states import RHO1, save_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.mark.parametrize("text,value", [
    ("0.25", 0.25), ("1/4", 0.25), ("pi", math.pi), ("3pi/10", 3 * math.pi / 10),
    ("-pi/4", -math.pi / 4), ("2*pi", 2 * math.pi),
])
def test_parse_number(text, value):
    assert parse_number(text) == pytest.approx(value, abs=1e-15)


def test_parse_grid():
    assert parse_grid("0:2pi:pi/10") == pytest.approx((0, 2 * math.pi, math.pi / 10))


def test_damp_reference_state(capsys):
    code, out, _ = run(capsys, "damp", "--state", "rho1", "--p", "0.3")
    assert code == 0
    obj = json.loads(out)
    m = np.array(obj["state"]["matrix"])[..., 0]
    assert m[3, 3] == pytest.approx(0.2 * 0.49)
    assert 0 < obj["fidelity"] < 1 and obj["success_probability"] == 1.0


def test_recover_closed_form_and_circuit_agree(capsys):
    _, a, _ = run(capsys, "recover", "--state", "rho2", "--p", "0.4")
    theta = math.degrees(math.atan(1 / math.sqrt(0.6)))
    _, b, _ = run(capsys, "recover", "--state", "rho2", "--p", "0.4", "--theta", repr(theta), "--degrees")
    sa, sb = json.loads(a), json.loads(b)
    assert sa["state"] == sb["state"]
    assert sb["theta"] == pytest.approx(math.atan(1 / math.sqrt(0.6)))


def test_extend_unit_x_matches_recover(capsys):
    _, a, _ = run(capsys, "recover", "--state", "rho1", "--p", "0.5")
    _, b, _ = run(capsys, "extend", "--state", "rho1", "--p", "0.5", "--x", "1")
    assert json.loads(a)["state"] == json.loads(b)["state"]


def test_state_file_input(tmp_path, capsys):
    path = tmp_path / "rho.json"
    save_state(RHO1, path)
    _, a, _ = run(capsys, "damp", "--state", str(path), "--p", "0.2")
    _, b, _ = run(capsys, "damp", "--state", "rho1", "--p", "0.2")
    assert json.loads(a)["state"] == json.loads(b)["state"]


def test_random_state_uses_seed(capsys, monkeypatch):
    _, a, _ = run(capsys, "damp", "--random-state", "--seed", "5", "--p", "0.2")
    monkeypatch.setenv("ADRECOVER_SEED", "5")
    _, b, _ = run(capsys, "damp", "--random-state", "--p", "0.2")
    _, c, _ = run(capsys, "damp", "--random-state", "--seed", "6", "--p", "0.2")
    assert a == b and a != c


def test_invalid_inputs_exit_2(tmp_path, capsys):
    assert run(capsys, "recover", "--state", "rho1", "--p", "1")[0] == 2
    assert run(capsys, "damp", "--state", "rho1", "--p", "1.5")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "matrix": [[[0.5, 0], [0.3, 0]], [[0, 0], [0.5, 0]]]}))
    code, _, err = run(capsys, "damp", "--state", str(bad), "--p", "0.1")
    assert code == 2 and "error" in err
    assert run(capsys, "sweep", "--state", "rho1", "--extended")[0] == 2


def test_zero_success_exits_3(tmp_path, capsys):
    excited = np.zeros((4, 4))
    excited[3, 3] = 1.0
    path = tmp_path / "excited.json"
    save_state(excited, path)
    code, _, err = run(capsys, "recover", "--state", str(path), "--p", "0", "--theta", "0")
    assert code == 3 and "numerical" in err


def test_missing_file_exits_1(tmp_path, capsys):
    assert run(capsys, "damp", "--state", str(tmp_path / "nope.json"), "--p", "0.1")[0] == 1


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--state", "rho1", "--p-grid", "0:1:0.25",
                       "--extended", "--x", "0.1,1")
    assert code == 0
    assert out.startswith("# ")
    rows = csv_rows(out)
    assert [float(r["p"]) for r in rows] == [0, 0.25, 0.5, 0.75, 1.0]
    assert float(rows[0]["F_d"]) == pytest.approx(1) and float(rows[0]["F_r"]) == pytest.approx(1)
    assert float(rows[2]["F_ext_x1"]) == pytest.approx(float(rows[2]["F_r"]), abs=1e-12)
    assert rows[-1]["F_r"] == "nan"


def test_sweep_json_and_output_file(tmp_path, capsys):
    target = tmp_path / "s.json"
    assert run(capsys, "sweep", "--state", "rho2", "--format", "json", "-o", str(target))[0] == 0
    obj = json.loads(target.read_text())
    assert obj["rows"][-1]["F_r"] is None


def test_sweep_reruns_identical(capsys):
    first = run(capsys, "sweep", "--state", "rho2")[1]
    assert run(capsys, "sweep", "--state", "rho2")[1] == first


def test_robust_small(capsys):
    code, out, _ = run(capsys, "robust", "--samples", "200", "--theta-grid", "0:180:18", "--degrees")
    assert code == 0
    obj = json.loads(out)
    assert len(obj["thetas"]) == 11
    assert obj["thetas"][-1] == pytest.approx(math.pi)
    csv_out = run(capsys, "robust", "--samples", "200", "--format", "csv")[1]
    assert "theta,mean,stderr" in csv_out


def test_reproduce_figure(capsys):
    code, out, _ = run(capsys, "reproduce", "fig7")
    assert code == 0
    rows = csv_rows(out)
    assert {"p", "F_fixed", "F_adaptive", "F_damped"} <= set(rows[0])
