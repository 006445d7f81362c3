from collections import Counter

import numpy as np
import pytest

from shared.config import get_settings
from specsynth.errors import ActionNotEnabledError, ModelValidationError, ProductSizeError
from specsynth.models.envs import GridCase
from specsynth.models.product import ProductState, RewardConfig
from specsynth.services.envs import make_gridworld
from specsynth.services.product import ProductMDP, enumerate_product, epsilon_action


@pytest.fixture
def grid5_noisy(env_specs):
    return make_gridworld(GridCase.II, env_specs["grid5"])


class TestProductMDP:
    def test_initial_state(self, counterexample):
        model, automaton = counterexample(0.5)
        product = ProductMDP(model, automaton)
        s0 = product.initial_state(np.random.default_rng(0))
        assert s0 == ProductState(0, frozenset({"u"}), 0)
        assert product.initial_distribution() == {s0: 1.0}

    def test_preread_initial_label(self, counterexample):
        model, automaton = counterexample(0.5)
        product = ProductMDP(model, automaton, preread_initial_label=True)
        assert product.initial_state(np.random.default_rng(0)).q == 0

    def test_epsilon_actions(self, counterexample, fgp):
        model, _ = counterexample(0.5)
        product = ProductMDP(model, fgp)
        s = ProductState(3, frozenset({"u"}), 0)
        assert product.enabled_actions(s) == ("next", epsilon_action(1))
        nxt = product.step_product(s, "eps:1", np.random.default_rng(0))
        assert nxt == ProductState(3, frozenset({"u"}), 1)
        assert product.enabled_actions(nxt) == ("next",)

    def test_unknown_action(self, counterexample):
        model, automaton = counterexample(0.5)
        product = ProductMDP(model, automaton)
        with pytest.raises(ActionNotEnabledError):
            product.step_product(ProductState(1, frozenset({"p"}), 1), "left", np.random.default_rng(0))

    def test_ap_mismatch(self, counterexample, phi1):
        model, _ = counterexample(0.5)
        with pytest.raises(ModelValidationError, match="AP mismatch"):
            ProductMDP(model, phi1)

    def test_reward_and_update(self, counterexample, gfp):
        model, _ = counterexample(0.5)
        product = ProductMDP(model, gfp, RewardConfig(reward=2.0))
        assert product.reward_and_update(1, gfp.full_frontier) == (2.0, gfp.full_frontier)
        assert product.reward_and_update(0, gfp.full_frontier) == (0.0, gfp.full_frontier)

    def test_episode_reward_iff_frontier_visit(self, env_specs, phi1):
        model = make_gridworld(GridCase.I, env_specs["grid3"])
        product = ProductMDP(model, phi1)
        rng = np.random.default_rng(5)
        rewarded_episodes = 0
        for _ in range(300):
            frontier = phi1.full_frontier
            s = product.initial_state(rng)
            total, visited = 0.0, False
            for _ in range(8):
                if product.is_sink(s):
                    break
                s_next = product.step(s, int(rng.integers(product.n_actions(s))), rng)
                visited = visited or any(s_next.q in phi1.acc[j] for j in frontier)
                reward, frontier = product.reward_and_update(s_next.q, frontier)
                total += reward
                s = s_next
            assert (total > 0) == visited
            rewarded_episodes += total > 0
        assert 0 < rewarded_episodes < 300

    def test_sampled_successors_match_exact_law(self, grid5_noisy, phi1):
        product = ProductMDP(grid5_noisy, phi1)
        s = ProductState(1 * 5 + 0, frozenset(), 0)
        a = product.enabled_actions(s).index("Down/NoPicture")
        exact = product.successor_distribution(s, a)
        rng = np.random.default_rng(4)
        n = 100_000
        counts = Counter(product.step(s, a, rng) for _ in range(n))
        distance = 0.5 * sum(abs(counts.get(t, 0) / n - p) for t, p in exact.items())
        distance += 0.5 * sum(c / n for t, c in counts.items() if t not in exact)
        assert distance <= 0.02


class TestEnumerate:
    def test_rows_are_distributions(self, grid5_noisy, phi1):
        product = enumerate_product(grid5_noisy, phi1)
        sums = np.asarray(product.matrix.sum(axis=1)).ravel()
        assert np.allclose(sums, 1.0, atol=1e-9)
        assert len(product.row_start) == product.n_states + 1
        assert product.row_start[-1] == product.matrix.shape[0]

    def test_row_groups_follow_actions(self, counterexample):
        model, automaton = counterexample(0.9)
        product = enumerate_product(model, automaton)
        for i in range(product.n_states):
            assert len(product.rows(i)) == len(product.actions[i])
        start = product.index[ProductState(0, frozenset({"u"}), 0)]
        right = product.rows(start)[product.actions[start].index("right")]
        succ, probs = product.successors(right)
        law = {product.states[t]: p for t, p in zip(succ.tolist(), probs.tolist())}
        assert law == pytest.approx({
            ProductState(1, frozenset({"p"}), 1): 0.1,
            ProductState(2, frozenset({"u"}), 0): 0.9,
        })

    def test_counterexample_size(self, counterexample):
        model, automaton = counterexample(0.9)
        product = enumerate_product(model, automaton)
        assert product.n_states == 6
        assert product.initial == {0: 1.0}
        assert [len(members) for members in product.accepting] == [2]

    def test_epsilon_rows(self, counterexample, fgp):
        model, _ = counterexample(0.5)
        product = enumerate_product(model, fgp)
        for i, s in enumerate(product.states):
            if s.q == 0:
                assert product.actions[i][-1] == "eps:1"
        assert product.sink_states
        assert all(product.states[i].q == fgp.sink for i in product.sink_states)

    def test_size_cap(self, grid5_noisy, phi1):
        with pytest.raises(ProductSizeError):
            enumerate_product(grid5_noisy, phi1, max_states=3)

    def test_size_cap_from_settings(self, grid5_noisy, phi1, monkeypatch):
        monkeypatch.setenv("SPECSYNTH_MAX_PRODUCT_STATES", "10")
        get_settings.cache_clear()
        with pytest.raises(ProductSizeError):
            enumerate_product(grid5_noisy, phi1)
