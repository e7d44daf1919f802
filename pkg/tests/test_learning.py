import numpy as np
import pytest

from helpers import coin, constant_model, random_h3, zero_reward
from stochpa import learning, oracle
from stochpa.learning import (LearningConfig, compute_regrets, explore_reward_free, resolve_schedule,
                              run_learning, solve_delta_ic, zeta)
from stochpa.policy_forward import StationaryPolicy


def test_config_validation():
    with pytest.raises(ValueError):
        LearningConfig(10, failure_prob=1.0)
    with pytest.raises(ValueError):
        LearningConfig(10, n0=0)
    with pytest.raises(ValueError):
        LearningConfig(10, n0=11)


def test_schedule_defaults():
    m = coin()
    assert zeta(m) == 2 ** 5 * 4 * 8 * 4
    delta, n0 = resolve_schedule(m, LearningConfig(3200))
    assert delta == pytest.approx((4096 / 3200) ** (1 / 3))
    assert n0 == 3199            # the default constant saturates at desk-scale T
    assert resolve_schedule(m, LearningConfig(3200, c_explore=0.25))[1] == int(np.ceil(4 * 3200 ** (2 / 3)))


def test_single_path_exploration_is_exact():
    m = constant_model(4)
    est = explore_reward_free(m, 10, np.random.default_rng(0))
    assert np.all(est.visits == 10)
    assert np.allclose(est.model.transitions, m.transitions)
    assert np.allclose(est.model.initial, m.initial)


def test_coin_estimation_error():
    m = coin()
    est = explore_reward_free(m, 2000, np.random.default_rng(0))
    err_init = np.abs(est.model.initial - m.initial).sum()
    err_rows = np.abs(est.model.transitions - m.transitions).sum(axis=(4, 5, 6)).max()
    assert max(err_init, err_rows) <= 0.1
    assert np.allclose(est.model.transitions.sum(axis=(4, 5, 6)), 1.0)


def test_unvisited_rows_are_uniform():
    m = random_h3(0)
    est = explore_reward_free(m, 1, np.random.default_rng(0))
    unvisited = est.visits == 0
    assert unvisited.any()
    rows = est.model.transitions[unvisited]
    assert np.allclose(rows, 1.0 / rows[0].size)


def test_exploration_needs_an_episode():
    with pytest.raises(ValueError):
        explore_reward_free(coin(), 0, np.random.default_rng(0))


def test_delta_ic_on_coin():
    vals = [solve_delta_ic(coin(), d, 0.1).value for d in (0.0, 0.05, 0.2, 2.0)]
    assert vals == pytest.approx([0.8, 0.85, 1.0, 1.0], abs=1e-6)
    assert solve_delta_ic(zero_reward(coin()), 0.3, 0.1).value == pytest.approx(0.0, abs=1e-9)


def test_delta_ic_policy_gap_bounded_h3():
    m = random_h3(1)
    for delta in (0.0, 0.1):
        h = solve_delta_ic(m, delta, 0.4)
        vp, va = oracle.exact_policy_values(m, h)
        assert vp == pytest.approx(h.value, abs=5e-6)
        assert oracle.best_response_value(m, h) <= va + delta + 1e-6


def test_true_model_injection_bounds():
    m = coin()
    vstar = oracle.brute_force_optimum(m)[0]
    for delta in (0.02, 0.1):
        h = solve_delta_ic(m, delta, delta)
        vp, va = oracle.exact_policy_values(m, h)
        assert vstar - vp <= 2 * delta + 1e-6
        assert h.value >= vstar - (delta + 1e-6)
        assert oracle.best_response_value(m, h) - va <= 2 * delta + 1e-6


def test_all_exploration_run():
    rep = run_learning(coin(), LearningConfig(50, seed=1, n0=50))
    assert all(r.phase == "explore" for r in rep.records)
    assert len(rep.records) == 50 and rep.n0 == 50


def test_run_is_deterministic_and_switches_once():
    cfg = LearningConfig(120, seed=5, c_explore=0.25, delta=0.1)
    a = run_learning(coin(), cfg)
    b = run_learning(coin(), cfg)
    assert a.to_csv() == b.to_csv()
    phases = [r.phase for r in a.records]
    switches = sum(p != q for p, q in zip(phases, phases[1:]))
    assert switches == 1 and phases[0] == "explore" and phases[-1] == "commit"
    assert np.all(np.diff(a.regA_cum) >= 0)


def test_known_model_single_exploration_episode_matches_offline():
    m = constant_model(3)
    rep = run_learning(m, LearningConfig(5, seed=0, n0=1, delta=0.0))
    commit = rep.commit_terms()
    assert len(commit) == 4
    assert all(r.vP_expected == pytest.approx(2.0) for r in commit)
    assert rep.regP_cum[-1] == pytest.approx(0.0, abs=1e-6)


def test_compute_regrets_cases():
    T = 10
    regP, regA = compute_regrets(0.8, [0.8] * T, [0.6] * T, [0.6] * T)
    assert np.allclose(regP, 0) and np.allclose(regA, 0)
    m = coin()
    pol = StationaryPolicy.constant(m, 0)
    vp, va = oracle.exact_policy_values(m, pol)
    best = oracle.best_response_value(m, pol)
    regP, regA = compute_regrets(0.8, [vp] * T, [va] * T, [best] * T)
    # signed definition: the truthful agent hands the babbling principal 1.0 > 0.8
    assert regP[-1] == pytest.approx(-0.2 * T)
    assert regA[-1] == pytest.approx(0.2 * T)


def test_adversarial_flag_runs():
    rep = run_learning(coin(), LearningConfig(60, seed=2, n0=20, delta=0.1, adversarial_agent=True))
    assert rep.records[-1].phase == "commit"


def test_csv_columns():
    rep = run_learning(coin(), LearningConfig(30, seed=0, n0=10, delta=0.1))
    header, *rows = rep.to_csv().strip().split("\n")
    assert header == "episode,phase,regP_cum,regA_cum,vP_expected,vA_expected"
    assert len(rows) == 30
