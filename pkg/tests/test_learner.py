from collections import Counter

import numpy as np
import pytest

from specsynth.models.envs import GridCase
from specsynth.models.learning import LearnConfig, Policy, QTable
from specsynth.models.product import ProductState
from specsynth.services.envs import make_gridworld, make_pacman
from specsynth.services.learner import (
    execute_policy,
    extract_policy,
    greedy_action,
    greedy_index,
    run_learning,
)
from specsynth.services.plmdp import build_plmdp
from specsynth.services.product import ProductMDP

S0 = ProductState(0, frozenset({"u"}), 0)


def full_run(**kwargs):
    """Config that never stops early"""
    episodes = kwargs.pop("max_episodes", 200)
    return LearnConfig(max_episodes=episodes, window=episodes, tolerance=1e-12, **kwargs)


class TestGreedy:
    def test_lowest_index_wins_ties(self):
        assert greedy_index([0.5, 0.5, 0.1]) == 0
        assert greedy_index([0.1, 0.7, 0.7]) == 1

    def test_unknown_state_takes_first_action(self):
        assert greedy_action(QTable(), S0, ("right", "left")) == "right"

    def test_known_state(self):
        table = QTable()
        table.row(S0, ("right", "left"))[1] = 3.0
        assert greedy_action(table, S0) == "left"


class TestRunLearning:
    def test_same_seed_same_run(self, counterexample):
        model, automaton = counterexample(0.5)
        config = full_run(seed=42, tau=20, max_episodes=300)
        table_a, curve_a = run_learning(model, automaton, config)
        table_b, curve_b = run_learning(model, automaton, config)
        assert curve_a == curve_b
        assert table_a.values == table_b.values
        assert table_a.counts == table_b.counts

    def test_different_seeds_differ(self, counterexample):
        model, automaton = counterexample(0.5)
        _, curve_a = run_learning(model, automaton, full_run(seed=1, tau=20))
        _, curve_b = run_learning(model, automaton, full_run(seed=2, tau=20))
        assert curve_a.values != curve_b.values

    def test_every_step_is_counted(self, counterexample):
        model, automaton = counterexample(0.5)
        table, curve = run_learning(model, automaton, full_run(tau=15, max_episodes=100))
        assert curve.episodes == 100
        assert sum(sum(c) for c in table.counts.values()) == 100 * 15

    def test_values_stay_within_discounted_bounds(self, counterexample):
        model, automaton = counterexample(0.3)
        config = full_run(gamma=0.9, reward=2.0, tau=30, max_episodes=500)
        table, _ = run_learning(model, automaton, config)
        bound = config.reward / (1.0 - config.gamma)
        for values in table.values.values():
            assert all(0.0 <= v <= bound + 1e-9 for v in values)

    def test_curve_stride(self, counterexample, mocker):
        model, automaton = counterexample(0.5)
        progress = mocker.Mock()
        _, curve = run_learning(model, automaton, full_run(tau=5, max_episodes=100, record_stride=10),
                                progress=progress)
        assert [p.episode for p in curve.points] == list(range(10, 101, 10))
        assert progress.call_count == 10
        assert not curve.converged

    def test_untouched_table_never_converges(self, gfp):
        model = build_plmdp(
            2, 0, ["p", "u"], [["stay", "move"], ["stay"]],
            {(0, "stay"): {0: 1.0}, (0, "move"): {1: 1.0}, (1, "stay"): {1: 1.0}},
            {0: {frozenset({"u"}): 1.0}, 1: {frozenset({"u"}): 1.0}},
            name="never-p",
        )
        config = LearnConfig(tau=10, max_episodes=300, window=20, tolerance=1e-3, record_stride=100)
        table, curve = run_learning(model, gfp, config)
        assert not curve.converged
        assert curve.episodes == 300
        assert curve.values == [0.0, 0.0, 0.0]
        assert all(v == 0.0 for values in table.values.values() for v in values)

    def test_undiscounted_values_stay_below_horizon_reward(self, counterexample):
        model, automaton = counterexample(0.3)
        config = full_run(gamma=1.0, reward=1.5, tau=20, max_episodes=300)
        table, _ = run_learning(model, automaton, config)
        bound = config.reward * config.tau
        for values in table.values.values():
            assert all(0.0 <= v <= bound for v in values)

    def test_counts_follow_updates(self, counterexample, mocker):
        model, automaton = counterexample(0.5)
        step = mocker.spy(ProductMDP, "step")
        table, _ = run_learning(model, automaton, full_run(tau=15, max_episodes=100, seed=9))
        updates = Counter((call.args[1], call.args[2]) for call in step.call_args_list)
        counts = {(s, a): c for s, row in table.counts.items() for a, c in enumerate(row) if c}
        assert counts == dict(updates)

    def test_converges_on_deterministic_rewards(self, counterexample):
        model, automaton = counterexample(0.0)
        config = LearnConfig(gamma=0.0, tau=10, max_episodes=1000, window=50, tolerance=1e-3)
        _, curve = run_learning(model, automaton, config)
        assert curve.converged
        assert curve.episodes < 1000
        assert curve.points[-1].episode == curve.episodes
        assert curve.points[-1].u_s0 == pytest.approx(1.0)

    def test_sink_ends_episode(self, counterexample, fgp):
        model, _ = counterexample(0.5)
        table, _ = run_learning(model, fgp, full_run(tau=50, max_episodes=200))
        for s, counts in table.counts.items():
            if s.q == fgp.sink:
                assert not any(counts)

    @pytest.mark.parametrize("nu, gamma, expected", [(0.9, 0.99, "left"), (0.1, 0.5, "right")])
    def test_counterexample_greedy_action(self, counterexample, nu, gamma, expected):
        model, automaton = counterexample(nu)
        episodes = 15_000 if expected == "left" else 2000
        table, _ = run_learning(model, automaton, full_run(gamma=gamma, tau=100, max_episodes=episodes, seed=0))
        assert greedy_action(table, S0, ("right", "left")) == expected


class TestTimeInvariance:
    def test_shipped_pairs(self, counterexample, automata, env_specs):
        model, _ = counterexample(0.5)
        pairs = [
            (model, automata["gfp"]),
            (model, automata["fgp"]),
            (make_gridworld(GridCase.I, env_specs["grid5"]), automata["phi1"]),
            (make_gridworld(GridCase.II, env_specs["grid5"]), automata["phi1"]),
            (make_pacman(env_specs["pacman5"]), automata["phi2"]),
        ]
        for env, automaton in pairs:
            config = full_run(tau=20, max_episodes=10_000, check_time_invariance=True, seed=3)
            _, curve = run_learning(env, automaton, config)
            assert curve.episodes == 10_000


class TestPolicy:
    def test_unvisited_states_are_fallbacks(self, counterexample):
        model, automaton = counterexample(0.5)
        table, _ = run_learning(model, automaton, full_run(tau=1, max_episodes=50))
        policy = extract_policy(table, automaton)
        assert policy.get(S0) in ("right", "left")
        assert S0 not in policy.fallback
        assert policy.fallback
        assert all(s.x != 0 for s in policy.fallback)
        assert policy.automaton == "gfp"

    def test_execute_policy(self, counterexample):
        model, automaton = counterexample(0.5)
        policy = Policy(actions={S0: "left"})
        trace = execute_policy(policy, model, automaton, np.random.default_rng(0), horizon=6)
        assert trace.cells == [0, 3, 4, 5, 3, 4, 5]
        assert [e.step for e in trace.events] == [2, 5]
        assert all(e.q == 1 for e in trace.events)
        assert not trace.steps[0].fallback
        assert all(step.fallback for step in trace.steps[1:-1])
        assert trace.steps[-1].action is None

    def test_greedy_policy_from_product(self, counterexample):
        model, automaton = counterexample(0.1)
        table, _ = run_learning(model, automaton, full_run(gamma=0.5, tau=50, max_episodes=500))
        policy = extract_policy(table, automaton)
        product = ProductMDP(model, automaton)
        (s0,) = product.initial_distribution()
        assert policy.get(s0) == greedy_action(table, s0)
