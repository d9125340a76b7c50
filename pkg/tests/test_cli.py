import json

import numpy as np
import pytest

from sqisw import cli
from sqisw import matcore as mc
from sqisw.circuit import evaluate, loads


def call(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_matrix(path, m):
    path.write_text(json.dumps(cli.matrix_to_dict(m)))
    return str(path)


def test_weyl_cnot(capsys, tmp_path):
    f = write_matrix(tmp_path / "cnot.json", mc.CNOT)
    code, out, _ = call(capsys, "weyl", f)
    assert code == 0
    assert out.splitlines() == ["0.785398163397 0 0", "w_prime yes", "cost 2"]


def test_weyl_swap_named(capsys):
    code, out, _ = call(capsys, "weyl", "swap")
    assert code == 0
    assert out.splitlines()[1:] == ["w_prime no", "cost 3"]


def test_toffoli_verify(capsys):
    code, out, err = call(capsys, "toffoli", "--verify")
    assert code == 0
    residual = float(next(line for line in (out + err).splitlines() if line.startswith("residual")).split()[1])
    assert residual <= 1e-12


def test_toffoli_verify_fails_off_solution(capsys):
    code, _, _ = call(capsys, "toffoli", "--verify", "--theta", "0")
    assert code == 1


def test_toffoli_emit(capsys):
    code, out, _ = call(capsys, "toffoli", "--emit", "json")
    assert code == 0
    assert mc.error_metric(evaluate(loads(out)), mc.TOFFOLI) <= 1e-12
    code, out, _ = call(capsys, "toffoli", "--emit", "qasm")
    assert out.startswith("OPENQASM 3.0;") and out.count("sqisw q[") == 8


def test_census(capsys):
    code, out, _ = call(capsys, "census", "--max-N", "4")
    assert code == 0
    rows = out.splitlines()[1:]
    assert [int(r.split()[2]) for r in rows] == [1, 2, 4, 10]


def test_census_compare_formula_reports_the_mismatch(capsys):
    code, out, _ = call(capsys, "census", "--max-N", "5", "--compare-formula")
    assert code == 0
    rows = out.splitlines()[1:6]
    stmt = [r.split()[-2] for r in rows]
    proof = [r.split()[-1] for r in rows]
    assert proof == ["yes"] * 5
    assert stmt == ["NO", "yes", "NO", "yes", "NO"]
    assert "note:" in out


def test_synth2_round_trip(capsys, tmp_path):
    u = mc.haar_random_unitary(4, 12)
    f = write_matrix(tmp_path / "u.json", u)
    out_file = tmp_path / "c.json"
    code, _, err = call(capsys, "synth2", f, "--seed", "4", "--out", str(out_file))
    assert code == 0
    assert "seed: 4" in err
    c = loads(out_file.read_text())
    assert mc.error_metric(evaluate(c), u) <= 1e-9


def test_synth_report_and_round_trip(capsys, tmp_path):
    code, out, err = call(capsys, "synth", "haar:3:2")
    assert code == 0
    rep = json.loads(out)
    u = mc.haar_random_unitary(8, 2)
    from sqisw.circuit import circuit_from_dict
    c = circuit_from_dict(rep["circuit"])
    assert abs(mc.error_metric(evaluate(c), u) - rep["residual_error"]) <= 1e-12
    assert rep["ledger"]["sqisw_used"] <= rep["ledger"]["bound"] == 31
    code, out2, _ = call(capsys, "synth", "haar:3:2", "--no-cz-absorb")
    assert json.loads(out2)["ledger"]["sqisw_used"] > rep["ledger"]["sqisw_used"]


def test_written_circuit_matches_in_memory(capsys, tmp_path):
    from sqisw import synth2q
    u = mc.haar_random_unitary(4, 30)
    mem = synth2q.synthesize_two_qubit(u, seed=0).circuit
    out_file = tmp_path / "c.json"
    call(capsys, "synth2", write_matrix(tmp_path / "u.json", u), "--out", str(out_file))
    assert np.max(np.abs(evaluate(loads(out_file.read_text())) - evaluate(mem))) <= 1e-12


def test_search_reports_are_reproducible(capsys, tmp_path):
    args = ["search-toffoli", "--min-gates", "2", "--max-gates", "3", "--restarts", "2",
            "--max-iterations", "100", "--seed", "9"]
    code1, out1, err1 = call(capsys, *args)
    code2, out2, _ = call(capsys, *args)
    assert code1 == code2 == 3
    assert out1 == out2 and out1
    assert "seed: 9" in err1 and "not found" in err1
    rep = tmp_path / "r.jsonl"
    call(capsys, *args, "--report", str(rep))
    assert rep.read_text() == out1


def test_search_toffoli_finds_nothing_small(capsys):
    code, out, _ = call(capsys, "search-toffoli", "--min-gates", "1", "--max-gates", "1", "--restarts", "1")
    assert code == 3
    assert json.loads(out.splitlines()[0])["n_gates"] == 1


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["weyl"],
    ["weyl", "/nonexistent/m.json"],
    ["weyl", "haar:3:1"],
    ["weyl", "haar:x:1"],
    ["search-toffoli"],
    ["search-toffoli", "--max-gates", "0"],
    ["search-toffoli", "--max-gates", "3", "--min-gates", "5"],
    ["search-3q", "--max-gates", "5"],
    ["census", "--max-N", "16"],
    ["synth", "sqisw", "--tol", "-1"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = call(capsys, *argv)
    assert code == 2


@pytest.mark.parametrize("payload,field", [
    ({"dim": 2, "re": [[1, 0], [0, 1]]}, "'im'"),
    ({"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0]]}, "'im'"),
    ({"dim": "2", "re": [], "im": []}, "'dim'"),
    ({"dim": 2, "re": [[1, 1], [0, 1]], "im": [[0, 0], [0, 0]]}, "'re'"),
    ([1, 2], "top level"),
])
def test_malformed_matrix_names_the_field(capsys, tmp_path, payload, field):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(payload))
    code, _, err = call(capsys, "weyl", str(f))
    assert code == 2
    assert field in err


def test_not_json(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{nope")
    code, _, err = call(capsys, "weyl", str(f))
    assert code == 2 and "not valid JSON" in err
