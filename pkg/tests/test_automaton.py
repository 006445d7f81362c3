import numpy as np
import pytest

from specsynth.errors import AutomatonValidationError
from specsynth.models.automaton import LDBADocument, StatePart, all_labels
from specsynth.models.formula import Lasso
from specsynth.services.automaton import (
    accepting_frontier,
    accepts_lasso,
    detect_sinks,
    epsilon_successors,
    load_ldba,
    step,
)
from specsynth.services.crosscheck import cross_validate
from specsynth.services.ltl import parse_ltl


def document(**overrides):
    base = {
        "name": "test",
        "ap": ["p"],
        "states": 2,
        "initial": 0,
        "part": ["D", "D"],
        "edges": [
            {"from": 0, "guard": "!p", "to": 0},
            {"from": 0, "guard": "p", "to": 1},
            {"from": 1, "guard": "true", "to": 1},
        ],
        "eps": [],
        "acc": [[1]],
    }
    base.update(overrides)
    return LDBADocument.model_validate(base)


# ======================== Shipped automata ========================

class TestShipped:
    def test_state_counts(self, phi1, phi2):
        assert phi1.declared_states == 5
        assert phi2.declared_states == 4
        assert phi1.n_states == 6
        assert phi1.sink == 5

    def test_materialized_sink(self, fgp):
        assert step(fgp, 1, frozenset()) == fgp.sink
        assert step(fgp, fgp.sink, frozenset({"p"})) == fgp.sink
        assert fgp.part[fgp.sink] is StatePart.D

    def test_detect_sinks(self, gfp, fgp, phi1, phi2):
        assert detect_sinks(gfp) == frozenset()
        assert detect_sinks(fgp) == {fgp.sink}
        assert detect_sinks(phi1) == {phi1.sink}
        assert detect_sinks(phi2) == {phi2.sink}

    def test_epsilon_successors(self, fgp):
        assert epsilon_successors(fgp, 0) == {1}
        assert epsilon_successors(fgp, 1) == frozenset()

    def test_phi1_enters_accepting_part_on_labels(self, phi1):
        assert all(epsilon_successors(phi1, q) == frozenset() for q in range(phi1.n_states))
        assert phi1.part[step(phi1, phi1.initial, frozenset({"target1", "target2"}))] == StatePart.D
        assert phi1.part[step(phi1, 1, frozenset({"target2"}))] == StatePart.D
        assert accepts_lasso(phi1, Lasso(prefix=[{"target1", "target2"}], period=[{"user"}, {"target2"}]))
        assert not accepts_lasso(phi1, Lasso(prefix=[{"target2"}], period=[{"user"}, {"target2"}]))

    def test_deterministic_on_every_label(self, automata):
        for automaton in automata.values():
            for q in range(automaton.n_states):
                for label in all_labels(automaton.ap):
                    assert 0 <= step(automaton, q, label) < automaton.n_states

    @pytest.mark.parametrize("name", ["gfp", "fgp", "phi1", "phi2"])
    def test_agrees_with_formula_on_random_lassos(self, automata, name):
        automaton = automata[name]
        result = cross_validate(parse_ltl(automaton.formula), automaton, n=1000, seed=1)
        assert result.agree == 1000, result.disagreements


# ======================== Validation ========================

class TestValidation:
    def test_valid_document(self):
        automaton = load_ldba(document())
        assert automaton.declared_states == 2
        assert automaton.full_frontier == {0}

    def test_accepting_state_in_initial_part(self):
        with pytest.raises(AutomatonValidationError, match="tagged N"):
            load_ldba(document(part=["N", "N"], edges=[{"from": 0, "guard": "p", "to": 1}]))

    def test_epsilon_from_deterministic_state(self):
        with pytest.raises(AutomatonValidationError, match="Epsilon"):
            load_ldba(document(eps=[{"from": 0, "to": 1}]))

    def test_epsilon_into_initial_part(self):
        with pytest.raises(AutomatonValidationError, match="deterministic part"):
            load_ldba(document(part=["N", "N"], edges=[], eps=[{"from": 0, "to": 1}], acc=[[0]]))

    def test_overlapping_guards(self):
        with pytest.raises(AutomatonValidationError, match="overlap"):
            load_ldba(document(edges=[
                {"from": 0, "guard": "true", "to": 0},
                {"from": 0, "guard": "p", "to": 1},
            ]))

    def test_undeclared_atom(self):
        with pytest.raises(AutomatonValidationError, match="undeclared"):
            load_ldba(document(edges=[{"from": 0, "guard": "q", "to": 1}]))

    def test_temporal_guard(self):
        with pytest.raises(AutomatonValidationError, match="temporal"):
            load_ldba(document(edges=[{"from": 0, "guard": "F p", "to": 1}]))

    def test_bad_guard_syntax(self):
        with pytest.raises(AutomatonValidationError, match="bad guard"):
            load_ldba(document(edges=[{"from": 0, "guard": "p &", "to": 1}]))

    def test_edge_leaving_deterministic_part(self):
        with pytest.raises(AutomatonValidationError, match="leaves"):
            load_ldba(document(part=["N", "D"], edges=[{"from": 1, "guard": "p", "to": 0}]))

    def test_empty_accepting_set(self):
        with pytest.raises(AutomatonValidationError, match="empty"):
            load_ldba(document(acc=[[1], []]))

    def test_out_of_range_references(self):
        with pytest.raises(AutomatonValidationError):
            load_ldba(document(initial=4))
        with pytest.raises(AutomatonValidationError):
            load_ldba(document(edges=[{"from": 0, "guard": "p", "to": 7}]))
        with pytest.raises(AutomatonValidationError):
            load_ldba(document(acc=[[3]]))


# ======================== Accepting frontier ========================

class TestAcceptingFrontier:
    def test_removes_visited_set(self, phi1):
        assert accepting_frontier(3, frozenset({0, 1}), phi1) == {1}
        assert accepting_frontier(4, frozenset({0, 1}), phi1) == {0}

    def test_restarts_without_visited_set(self, phi1):
        assert accepting_frontier(4, frozenset({1}), phi1) == {0}
        assert accepting_frontier(3, frozenset({0}), phi1) == {1}

    def test_non_accepting_state_keeps_frontier(self, phi1):
        assert accepting_frontier(0, frozenset({1}), phi1) == {1}

    def test_single_set_restarts_full(self, gfp):
        assert accepting_frontier(1, gfp.full_frontier, gfp) == gfp.full_frontier

    def test_never_empty_on_random_walks(self, automata):
        rng = np.random.default_rng(5)
        for automaton in automata.values():
            labels = all_labels(automaton.ap)
            q, frontier = automaton.initial, automaton.full_frontier
            for _ in range(2000):
                q = step(automaton, q, labels[rng.integers(len(labels))])
                frontier = accepting_frontier(q, frontier, automaton)
                assert frontier
                assert frontier <= automaton.full_frontier
                if q == automaton.sink:
                    q = automaton.initial


# ======================== Lasso acceptance ========================

class TestAcceptsLasso:
    def test_gfp(self, gfp):
        assert accepts_lasso(gfp, Lasso(prefix=[set()], period=[{"p"}, set()]))
        assert not accepts_lasso(gfp, Lasso(prefix=[{"p"}], period=[set()]))

    def test_fgp_guesses_with_epsilon(self, fgp):
        assert accepts_lasso(fgp, Lasso(prefix=[set(), set()], period=[{"p"}]))
        assert not accepts_lasso(fgp, Lasso(prefix=[], period=[{"p"}, set()]))

    def test_phi1_alternation(self, phi1):
        good = Lasso(prefix=[{"target1"}], period=[{"target2"}, set(), {"user"}])
        user_first = Lasso(prefix=[{"user"}, {"target1"}], period=[{"target2"}, {"user"}])
        obstacle = Lasso(prefix=[{"target1"}, {"obs"}], period=[{"target2"}, {"user"}])
        assert accepts_lasso(phi1, good)
        assert not accepts_lasso(phi1, user_first)
        assert not accepts_lasso(phi1, obstacle)
