import json
import re

import pytest

from riskmdp.cli import main

from conftest import FIXTURES


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def f(name):
    return FIXTURES / name


def strip_timing(text):
    return re.sub(r"(timing\"?: \"?)[0-9.]+ s", r"\1<t>", text)


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", f("fig1a.mdp"))
    assert code == 0 and "valid: yes" in out


def test_validate_bad_mass(capsys):
    code, _, err = run(capsys, "validate", f("bad_mass.mdp"))
    assert code == 1
    assert err.count("probability mass") == 1


def test_validate_missing(capsys):
    code, _, err = run(capsys, "validate", f("nope.mdp"))
    assert code == 2 and "I/O error" in err


def test_eval_fig3_horizon(capsys):
    code, out, _ = run(capsys, "eval", f("fig3a.mdp"), f("go3.policy"), f("exp_two.utility"),
                       "--horizon", 2)
    assert code == 0 and "  s1: 2\n" in out


def test_eval_fig1a_infinite_json(capsys):
    code, out, _ = run(capsys, "eval", f("fig1a.mdp"), f("fig1a_pi1.policy"),
                       f("exp_half.utility"), "--infinite", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["values"] == {"s1": "-inf", "s2": "-1"}


def test_eval_fig1b_oscillation(capsys):
    code, out, _ = run(capsys, "eval", f("fig1b.mdp"), f("go2.policy"), f("linear.utility"),
                       "--infinite")
    assert code == 0 and "s1: nonexistent(oscillation)" in out


@pytest.mark.parametrize("method", ["matrix", "enumerate"])
def test_eval_methods(capsys, method):
    code, out, _ = run(capsys, "eval", f("fig3a.mdp"), f("go3.policy"), f("exp_two.utility"),
                       "--horizon", 3, "--method", method)
    assert code == 0 and "s3: 0.125" in out


def test_eval_probe_needs_infinite(capsys):
    code, _, _ = run(capsys, "eval", f("fig3a.mdp"), f("go3.policy"), f("exp_two.utility"),
                     "--horizon", 3, "--method", "probe")
    assert code == 4


def test_eval_policy_mismatch(capsys):
    code, _, _ = run(capsys, "eval", f("fig1a.mdp"), f("go2.policy"), f("linear.utility"),
                     "--horizon", 3)
    assert code == 1


def test_conditions_rows(capsys):
    code, out, _ = run(capsys, "conditions", f("fig1b.mdp"), f("linear.utility"))
    assert code == 0
    assert re.search(r"C5:\n    status: violated\n    witness: policy", out)
    code, out, _ = run(capsys, "conditions", f("fig3a.mdp"), f("exp_two.utility"),
                       "--ids", "C10")
    assert "C10:\n    status: violated" in out
    code, out, _ = run(capsys, "conditions", f("fig1a.mdp"), f("linear.utility"),
                       "--ids", "C3,C4", "--format", "json")
    doc = json.loads(out)
    assert doc["conditions"]["C3"]["status"] == "holds"
    assert doc["conditions"]["C4"]["status"] == "holds"


def test_conditions_bad_id(capsys):
    code, _, _ = run(capsys, "conditions", f("fig1a.mdp"), f("linear.utility"), "--ids", "C42")
    assert code == 1


def test_analyze(capsys):
    _, out, _ = run(capsys, "analyze", f("fig1a.mdp"), f("exp_half.utility"))
    assert "values_exist: all-policies" in out
    assert "optimal_values_finite: not-guaranteed" in out
    assert "C9:" in out
    _, out, _ = run(capsys, "analyze", f("fig1a.mdp"), f("bounded.utility"))
    assert "table2_cell: ✓?" in out and "Theorem 14" in out
    _, out, _ = run(capsys, "analyze", f("fig1c.mdp"), f("linear.utility"))
    assert "C5: violated" in out and "not necessary" in out


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", f("fig1a.mdp"), "--gamma", 0.75)
    assert code == 0 and "s1: top" in out and "s1: -2\n" in out
    assert "bellman_residual" in out
    code, out, _ = run(capsys, "solve", f("zero.mdp"), "--gamma", 2)
    assert code == 0 and "s1: 1\n" in out
    code, _, err = run(capsys, "solve", f("fig1a.mdp"), "--gamma", 0.5)
    assert code == 4 and "C9" in err


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", f("fig3a.mdp"), f("go3.policy"),
                       f("exp_two.utility"), "--start", "s1", "--horizon", 2,
                       "--samples", 100_000, "--seed", 7)
    assert code == 0 and "within_4_stderr: yes" in out and "exact: 2" in out


def test_guard_env(capsys, monkeypatch):
    monkeypatch.setenv("RISKMDP_POLICY_GUARD", "1")
    code, _, err = run(capsys, "conditions", f("fig1a.mdp"), f("linear.utility"))
    assert code == 3 and "guard" in err


def test_digest_and_tokens(capsys):
    _, out, _ = run(capsys, "eval", f("fig1a.mdp"), f("fig1a_pi1.policy"),
                    f("exp_half.utility"), "--infinite", "--format", "json")
    doc = json.loads(out)
    assert len(doc["inputs"]["mdp"]["sha256"]) == 64
    assert all(isinstance(v, str) for v in doc["values"].values())


def test_text_and_json_same_content(capsys):
    argv = ["analyze", f("fig1a.mdp"), f("bounded.utility")]
    _, text, _ = run(capsys, *argv)
    _, js, _ = run(capsys, *argv, "--format", "json")
    doc = json.loads(js)
    for key in ("values_exist", "optimal_values_finite", "table2_cell"):
        assert f"{key}: {doc[key]}" in text
