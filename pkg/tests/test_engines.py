"""Value engines against closed forms and brute-force trajectory expansion."""

import math

import numpy as np
import pytest

from riskmdp.chain import analyze_chain, induced_chain
from riskmdp.errors import BudgetExceededError, SingularMatrixError, UtilityRangeError
from riskmdp.expo import exp_finite_horizon, exp_infinite_value, exp_matrix, hat_decompose
from riskmdp.extreme import extreme_total_reward
from riskmdp.horizon import finite_horizon_eu
from riskmdp.linalg import spectral_radius
from riskmdp.linear import linear_infinite_value
from riskmdp.mdp import Mdp
from riskmdp.outcome import OSCILLATION
from riskmdp.policy import StationaryPolicy
from riskmdp.probe import classify_sequence, limit_probe
from riskmdp.utility import UtilitySpec

from conftest import load_mdp
from oracles import brute_force_eu, exp_utility, geometric_tail, spectral_radius_eig

FIG3_D = [[0, 1, 1], [1, 0, 0.5], [0, 0, 0.5]]


def fig3_closed(T):
    h, m = 0.5 ** T, (-1) ** T
    return [2.5 - m / 6 - 4 / 3 * h, 2.5 + m / 6 - 5 / 3 * h, h]


# --- matrix engine ---------------------------------------------------------

def test_fig3_matrix(fig3a, go3):
    assert np.array_equal(exp_matrix(fig3a, go3, 2).D, FIG3_D)


def test_zero_rewards_give_P(go2):
    z = load_mdp("zero")
    pi = StationaryPolicy.deterministic({"s1": "left", "s2": "stay"})
    m = exp_matrix(z, pi, 3.0)
    assert np.array_equal(m.D, induced_chain(z, pi).P)


def test_fig1a_matrix(fig1a, pi1):
    assert np.array_equal(exp_matrix(fig1a, pi1, 0.5).D, [[1, 1], [0, 1]])


@pytest.mark.parametrize("T", [1, 2, 4, 7])
def test_fig3_closed_forms(fig3a, go3, T):
    got = exp_finite_horizon(exp_matrix(fig3a, go3, 2), T).values
    assert np.allclose(got, fig3_closed(T), atol=1e-12)


def test_first_power_row_sums(fig3a, go3):
    m = exp_matrix(fig3a, go3, 0.5)
    assert np.allclose(exp_finite_horizon(m, 1).values, m.iota * m.D.sum(axis=1))


def test_overflow_names_horizon():
    m = Mdp.from_records(["a"], [("a", "x", "a", 1, 1)])
    pi = StationaryPolicy.deterministic({"a": "x"})
    with pytest.raises(UtilityRangeError, match="largest finite horizon is 1023"):
        exp_finite_horizon(exp_matrix(m, pi, 2), 2000)
    with pytest.raises(UtilityRangeError):
        exp_matrix(Mdp.from_records(["a"], [("a", "x", "a", 1, 5000)]), pi, 2)


def test_hat_blocks(fig3a, go3):
    m = exp_matrix(fig3a, go3, 2)
    h = hat_decompose(m, analyze_chain(induced_chain(fig3a, go3)))
    assert np.array_equal(h.A, [[0, 1], [1, 0]])
    assert np.array_equal(h.B, [[1], [0.5]])
    top_right = np.linalg.matrix_power(h.hat, 3)[:2, 2:]
    assert np.allclose(top_right, (np.eye(2) + h.A + h.A @ h.A) @ h.B)
    # three-step entry weights: s1 reaches s3 with weight 1 + 1/2 + 1 = 2.5
    assert np.allclose(top_right, [[2.5], [2]])


def test_hat_no_transient(go2):
    m1b = load_mdp("fig1b")
    m = exp_matrix(m1b, go2, 2)
    h = hat_decompose(m, analyze_chain(induced_chain(m1b, go2)))
    assert h.A.shape == (0, 0)
    assert np.array_equal(h.hat, np.eye(2))


# --- infinite-horizon exponential -----------------------------------------

def test_fig3_infinite(fig3a, go3):
    v = exp_infinite_value(fig3a, go3, 2)
    assert v["s1"].reason == OSCILLATION and v["s2"].reason == OSCILLATION
    assert v["s3"].exists and v["s3"].value == 0


def test_unreachable_divergent_class_is_ignored():
    # s0 drains into the zero class z; the positive loop p is never reached from s0
    m = Mdp.from_records(["s0", "z", "p"], [
        ("s0", "x", "s0", 0.5, 0), ("s0", "x", "z", 0.5, 0),
        ("z", "x", "z", 1, 0), ("p", "x", "p", 1, 1)])
    pi = StationaryPolicy.deterministic({"s0": "x", "z": "x", "p": "x"})
    v = exp_infinite_value(m, pi, 2)
    assert v["s0"].value == pytest.approx(1.0, abs=1e-12)
    assert v["p"].value == math.inf


def test_fig1a_half(fig1a, pi1, pi2):
    for pi in (pi1, pi2):
        v = exp_infinite_value(fig1a, pi, 0.5)
        assert v["s1"].value == -math.inf
        assert v["s2"].value == -1


def test_fig1a_three_quarters(fig1a, pi1):
    v = exp_infinite_value(fig1a, pi1, 0.75)
    # each step keeps s1 with weight 1/2 * 4/3 = 2/3 and absorbs with weight 2/3
    oracle = -(2 / 3) * geometric_tail(2 / 3, first=0)
    assert v["s1"].value == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(-2.0)
    assert v["s2"].value == -1
    assert not v["s1"].numeric


def test_singular_system_is_reported(monkeypatch, fig1a, pi1):
    import riskmdp.expo as expo

    monkeypatch.setattr(expo, "COND_LIMIT", 0.5)
    with pytest.raises(SingularMatrixError):
        exp_infinite_value(fig1a, pi1, 0.75)


# --- linear ----------------------------------------------------------------

def test_linear_fig1b(go2):
    v = linear_infinite_value(load_mdp("fig1b"), go2)
    assert v["s1"].reason == OSCILLATION and v["s2"].reason == OSCILLATION


def test_linear_fig1c(go2):
    assert linear_infinite_value(load_mdp("fig1c"), go2)["s1"].value == math.inf


def test_linear_fig1a(fig1a, pi1, pi2):
    v = linear_infinite_value(fig1a, pi1)
    assert v["s1"].value == pytest.approx(-2) and v["s2"].value == 0
    assert linear_infinite_value(fig1a, pi2)["s1"].value == pytest.approx(-4)


def test_linear_matches_brute_force_at_60(fig1a, pi1, pi2):
    for pi, exact in ((pi1, -2), (pi2, -4)):
        bf = brute_force_eu(fig1a, pi, "s1", 12, lambda w: w)
        fh = finite_horizon_eu(fig1a, pi, UtilitySpec.linear(), 12)["s1"]
        assert fh == pytest.approx(bf, abs=1e-12)
        v60 = finite_horizon_eu(fig1a, pi, UtilitySpec.linear(), 60)["s1"]
        assert v60 == pytest.approx(exact, abs=1e-6)


# --- finite horizon --------------------------------------------------------

def test_finite_fig3_T2(fig3a, go3):
    assert finite_horizon_eu(fig3a, go3, UtilitySpec.exponential(2), 2)["s1"] == 2.0


def test_finite_linear_one_step(fig3a, go3):
    v = finite_horizon_eu(fig3a, go3, UtilitySpec.linear(), 1)
    assert v.as_dict() == {"s1": 1.0, "s2": 0.5, "s3": -1.0}


def test_finite_fig1a_T2(fig1a, pi1):
    for method in ("linear", "atoms", "enumerate"):
        assert finite_horizon_eu(fig1a, pi1, UtilitySpec.linear(), 2, method=method)["s1"] \
            == pytest.approx(-1.5)


@pytest.mark.parametrize("method", ["matrix", "atoms", "enumerate"])
def test_methods_agree_with_brute_force(fig3a, go3, method):
    u = UtilitySpec.exponential(2)
    got = finite_horizon_eu(fig3a, go3, u, 6, method=method)
    for s in fig3a.states:
        assert got[s] == pytest.approx(brute_force_eu(fig3a, go3, s, 6, exp_utility(2)),
                                       abs=1e-9)


def test_budget(fig3a, go3):
    with pytest.raises(BudgetExceededError):
        finite_horizon_eu(fig3a, go3, UtilitySpec.linear(), 30, method="enumerate", budget=100)


# --- extreme rewards -------------------------------------------------------

def test_extreme_fig1a(fig1a, pi1):
    e = extreme_total_reward(fig1a, pi1)
    assert e.v_max["s1"] == -1 and e.v_min["s1"] == -math.inf
    assert e.v_max["s2"] == 0 and e.v_min["s2"] == 0


def test_extreme_fig1c(go2):
    assert extreme_total_reward(load_mdp("fig1c"), go2).v_max["s1"] == math.inf


def test_extreme_exact_cycle_sign():
    # 0.1 + 0.2 - 0.3 is not exactly zero in floating point
    recs = [("a", "x", "b", 1, 0.1), ("b", "x", "c", 1, 0.2), ("c", "x", "a", 1, -0.3)]
    m = Mdp.from_records(["a", "b", "c"], recs)
    e = extreme_total_reward(m, StationaryPolicy.deterministic({s: "x" for s in "abc"}))
    assert math.isfinite(e.v_max["a"]) and math.isfinite(e.v_min["a"])
    assert e.v_max["a"] == pytest.approx(0.3)


# --- probe -----------------------------------------------------------------

def test_probe_fig3(fig3a, go3):
    v = limit_probe(fig3a, go3, UtilitySpec.exponential(2), 200)
    assert v["s1"].reason == OSCILLATION
    assert v["s3"].value == pytest.approx(0, abs=1e-12)


def test_probe_fig1b(go2):
    v = limit_probe(load_mdp("fig1b"), go2, UtilitySpec.linear(), 200)
    assert v["s1"].reason == OSCILLATION


def test_classify_sequences():
    T = np.arange(1, 301)
    assert classify_sequence(2 - 0.5 ** T).value == pytest.approx(2)
    assert classify_sequence(T * 1.0).value == math.inf
    assert classify_sequence(-3.0 * T).value == -math.inf
    # shrinking increments cannot be told apart from slow convergence
    assert classify_sequence(np.sqrt(T)).undetermined
    assert classify_sequence((-1.0) ** T).reason == OSCILLATION
    assert classify_sequence(T / 2 + (-1.0) ** T).value == math.inf


# --- spectral radius ---------------------------------------------------------

def test_spectral_radius_against_eigvals():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = rng.integers(1, 7)
        A = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
        assert spectral_radius(A) == pytest.approx(spectral_radius_eig(A), rel=1e-6, abs=1e-9)
