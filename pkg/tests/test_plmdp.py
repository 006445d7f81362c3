import numpy as np
import pytest

from specsynth.errors import ActionNotEnabledError, ModelValidationError
from specsynth.models.plmdp import PLMDPDocument
from specsynth.services.plmdp import (
    load_plmdp,
    reachable_states,
    same_model,
    sample_label,
    sample_transition,
    to_document,
)


def document(**overrides):
    base = {
        "name": "two-state",
        "states": 2,
        "initial": 0,
        "ap": ["p"],
        "actions": [["go", "stay"], ["stay"]],
        "trans": [
            {"x": 0, "a": "go", "dist": [{"to": 1, "p": 0.25}, {"to": 0, "p": 0.75}]},
            {"x": 0, "a": "stay", "dist": [{"to": 0, "p": 1.0}]},
            {"x": 1, "a": "stay", "dist": [{"to": 1, "p": 1.0}]},
        ],
        "labels": [
            {"x": 0, "dist": [{"set": [], "p": 1.0}]},
            {"x": 1, "dist": [{"set": ["p"], "p": 0.6}, {"set": [], "p": 0.4}]},
        ],
    }
    base.update(overrides)
    return PLMDPDocument.model_validate(base)


# ======================== Loading ========================

class TestLoad:
    def test_valid(self):
        model = load_plmdp(document())
        assert model.n_states == 2
        assert model.actions[0] == ("go", "stay")
        assert model.transitions[0][0].as_dict() == {1: 0.25, 0: 0.75}
        assert model.labels[1].as_dict() == {frozenset({"p"}): 0.6, frozenset(): 0.4}

    def test_transition_row_must_sum_to_one(self):
        bad = document().trans
        bad[0].dist[0].p = 0.3
        with pytest.raises(ModelValidationError, match="sums to"):
            load_plmdp(document(trans=[t.model_dump() for t in bad]))

    def test_label_row_must_sum_to_one(self):
        with pytest.raises(ModelValidationError, match="sums to"):
            load_plmdp(document(labels=[
                {"x": 0, "dist": [{"set": [], "p": 1.0}]},
                {"x": 1, "dist": [{"set": ["p"], "p": 0.6}]},
            ]))

    def test_unknown_successor(self):
        with pytest.raises(ModelValidationError, match="unknown state"):
            load_plmdp(document(trans=[
                {"x": 0, "a": "go", "dist": [{"to": 5, "p": 1.0}]},
                {"x": 0, "a": "stay", "dist": [{"to": 0, "p": 1.0}]},
                {"x": 1, "a": "stay", "dist": [{"to": 1, "p": 1.0}]},
            ]))

    def test_action_not_enabled(self):
        with pytest.raises(ModelValidationError, match="not enabled"):
            load_plmdp(document(trans=[
                {"x": 0, "a": "go", "dist": [{"to": 1, "p": 1.0}]},
                {"x": 0, "a": "stay", "dist": [{"to": 0, "p": 1.0}]},
                {"x": 1, "a": "go", "dist": [{"to": 1, "p": 1.0}]},
            ]))

    def test_missing_transition_row(self):
        with pytest.raises(ModelValidationError, match="no transition row"):
            load_plmdp(document(trans=[
                {"x": 0, "a": "go", "dist": [{"to": 1, "p": 1.0}]},
                {"x": 1, "a": "stay", "dist": [{"to": 1, "p": 1.0}]},
            ]))

    def test_missing_label_row(self):
        with pytest.raises(ModelValidationError, match="No label distribution"):
            load_plmdp(document(labels=[{"x": 0, "dist": [{"set": [], "p": 1.0}]}]))

    def test_undeclared_label_atom(self):
        with pytest.raises(ModelValidationError, match="undeclared"):
            load_plmdp(document(labels=[
                {"x": 0, "dist": [{"set": ["q"], "p": 1.0}]},
                {"x": 1, "dist": [{"set": ["p"], "p": 1.0}]},
            ]))

    def test_reserved_action_prefix(self):
        with pytest.raises(ModelValidationError, match="reserved"):
            load_plmdp(document(actions=[["eps:1", "stay"], ["stay"]]))

    def test_initial_out_of_range(self):
        with pytest.raises(ModelValidationError):
            load_plmdp(document(initial=2))

    def test_document_round_trip(self):
        model = load_plmdp(document())
        assert same_model(model, load_plmdp(to_document(model)))

    def test_reachable_states(self):
        model = load_plmdp(document(trans=[
            {"x": 0, "a": "go", "dist": [{"to": 0, "p": 1.0}]},
            {"x": 0, "a": "stay", "dist": [{"to": 0, "p": 1.0}]},
            {"x": 1, "a": "stay", "dist": [{"to": 1, "p": 1.0}]},
        ]))
        assert reachable_states(model) == {0}


# ======================== Sampling ========================

class TestSampling:
    def test_transition_frequencies(self, counterexample):
        model, _ = counterexample(0.9)
        rng = np.random.default_rng(0)
        draws = [sample_transition(model, 0, "right", rng) for _ in range(100_000)]
        assert np.mean(np.asarray(draws) == 2) == pytest.approx(0.9, abs=0.01)
        assert np.mean(np.asarray(draws) == 1) == pytest.approx(0.1, abs=0.01)

    def test_label_frequencies(self):
        model = load_plmdp(document())
        rng = np.random.default_rng(1)
        draws = [sample_label(model, 1, rng) for _ in range(100_000)]
        assert np.mean([label == {"p"} for label in draws]) == pytest.approx(0.6, abs=0.01)

    def test_action_not_enabled(self, counterexample):
        model, _ = counterexample(0.5)
        with pytest.raises(ActionNotEnabledError):
            sample_transition(model, 1, "right", np.random.default_rng(0))

    def test_same_seed_same_samples(self, counterexample):
        model, _ = counterexample(0.5)
        first = [sample_transition(model, 0, "right", np.random.default_rng(3)) for _ in range(10)]
        second = [sample_transition(model, 0, "right", np.random.default_rng(3)) for _ in range(10)]
        assert first == second
