import csv
import io
import json

import numpy as np
import pytest

from intertwining import linalg as la
from intertwining.cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, dumps, main


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    text = out.read_text() if out.exists() else None
    return code, text


def write_matrix(path, m):
    path.write_text(la.matrix_to_json(m))
    return str(path)


def test_exit_code_values():
    assert (EXIT_PASS, EXIT_FAIL, EXIT_INPUT) == (0, 1, 2)


def test_verify_defaults_pass_and_are_deterministic(tmp_path):
    code1, a = run(tmp_path, "verify", name="a.json")
    code2, b = run(tmp_path, "verify", name="b.json")
    assert code1 == code2 == EXIT_PASS
    assert a == b
    doc = json.loads(a)
    assert doc["verdict"] == "pass" and doc["failed"] == []
    assert doc["parameters"]["dim"] == 12 and doc["parameters"]["seed"] == 42


def test_verify_seed_changes_output(tmp_path):
    _, a = run(tmp_path, "verify", "--seed", "1", name="a.json")
    _, b = run(tmp_path, "verify", "--seed", "2", name="b.json")
    assert a != b


def test_verify_unreachable_tolerance_fails(tmp_path, capsys):
    code, text = run(tmp_path, "verify", "--tol-residual", "1e-16")
    assert code == EXIT_FAIL
    doc = json.loads(text)
    assert doc["verdict"] == "fail" and doc["failed"]
    assert "failed checks" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--dim", "2"],
        ["verify", "--q", "1.5"],
        ["verify", "--guard", "12"],
        ["verify", "--tol-rank", "-1"],
        ["model", "harmonium"],
        ["frobnicate"],
        ["verify", "--dim", "many"],
    ],
)
def test_input_errors_exit_2(tmp_path, argv, capsys):
    code, text = run(tmp_path, *argv)
    assert code == EXIT_INPUT
    assert text is None


def test_q_zero_skips_lower_direction(tmp_path):
    code, text = run(tmp_path, "verify", "--q", "0")
    assert code == EXIT_PASS
    assert any(s.startswith("quon.lower") for s in json.loads(text)["skipped"])


def test_csv_format(tmp_path):
    code, text = run(tmp_path, "verify", "--format", "csv", name="r.csv")
    assert code == EXIT_PASS
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["check", "value", "threshold", "verdict"]
    assert len(rows) > 10 and all(r[3] == "pass" for r in rows[1:])


def test_model_quon_closed_form(tmp_path):
    code, text = run(tmp_path, "model", "quon", "--q", "0.3", "--dim", "10")
    assert code == EXIT_PASS
    doc = json.loads(text)
    expected = [(1 - 0.3**n) / 0.7 for n in range(10)]
    np.testing.assert_allclose(doc["eigenvalues_h1"], expected, atol=1e-9)


def test_model_oscillator(tmp_path):
    code, text = run(tmp_path, "model", "oscillator", "--dim", "10")
    assert code == EXIT_PASS
    doc = json.loads(text)
    np.testing.assert_allclose(doc["nu_raise"], np.arange(10), atol=1e-12)
    assert doc["kernel_sets"]["ker_xdag"] == [0]
    assert doc["partner"]["I2"] == list(range(1, 10))


def test_model_pseudoboson(tmp_path):
    code, text = run(tmp_path, "model", "pseudoboson", "--seed", "7")
    assert code == EXIT_PASS
    doc = json.loads(text)
    lo, hi = doc["frame_bounds"]
    assert 0 < lo <= hi
    assert hi / lo == pytest.approx(doc["condition_number"] ** 2, rel=1e-8)
    assert doc["generator"] == "numpy.random.Philox"


def test_partner_trivial(tmp_path):
    t1 = write_matrix(tmp_path / "t1.json", np.diag([1.0, 2.0, 3.0]))
    x = write_matrix(tmp_path / "x.json", np.eye(3))
    code, text = run(tmp_path, "partner", "--theta1", t1, "--x", x)
    assert code == EXIT_PASS
    doc = json.loads(text)
    np.testing.assert_array_equal(la.matrix_from_dict(doc["partner"]["theta2"]), np.diag([1.0, 2.0, 3.0]))
    for name, c in doc["checks"].items():
        assert c["value"] == 0.0, name


def test_partner_round_trip_matches_model(tmp_path):
    exp = tmp_path / "exp"
    code, model_text = run(tmp_path, "model", "oscillator", "--dim", "8", "--export", str(exp), name="m.json")
    assert code == EXIT_PASS
    code, partner_text = run(tmp_path, "partner", "--theta1", str(exp / "h1.json"),
                             "--x", str(exp / "raise.json"), name="p.json")
    assert code == EXIT_PASS
    model_doc, partner_doc = json.loads(model_text), json.loads(partner_text)
    assert dumps(model_doc["partner"]) == dumps(partner_doc["partner"])
    for name, c in partner_doc["checks"].items():
        assert model_doc["checks"][name] == c


def test_partner_noncommuting_exits_1(tmp_path, capsys):
    rng = np.random.default_rng(3)
    t1 = write_matrix(tmp_path / "t1.json", np.diag([1.0, 2.0, 3.0]))
    x = write_matrix(tmp_path / "x.json", rng.standard_normal((3, 3)))
    code, text = run(tmp_path, "partner", "--theta1", t1, "--x", x)
    assert code == EXIT_FAIL
    doc = json.loads(text)
    assert doc["checks"]["partner.commutator_n1_theta1"]["value"] > 1e-3
    assert "exceeds commute_tol" in capsys.readouterr().err


def test_partner_malformed_and_mismatched(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2, "entries": [[1, 0]]}')
    good = write_matrix(tmp_path / "g.json", np.eye(2))
    other = write_matrix(tmp_path / "o.json", np.eye(3))
    assert run(tmp_path, "partner", "--theta1", str(bad), "--x", good)[0] == EXIT_INPUT
    assert run(tmp_path, "partner", "--theta1", good, "--x", other)[0] == EXIT_INPUT
    assert run(tmp_path, "partner", "--theta1", str(tmp_path / "missing.json"), "--x", good)[0] == EXIT_INPUT


def test_json_numbers_round_trip():
    values = [0.1, 1 / 3, 1e-300, -2.5e17]
    back = json.loads(dumps({"v": values}))["v"]
    assert back == values
    assert json.loads(dumps({"v": float("nan")}))["v"] is None
