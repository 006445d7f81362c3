"""
Product Service
On-the-fly product of a PL-MDP with an LDBA, epsilon actions, the
frontier reward, and explicit enumeration for the verifier
"""
import logging
from collections import deque
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from shared.config import get_settings
from specsynth.errors import ActionNotEnabledError, ModelValidationError, ProductSizeError
from specsynth.models.automaton import AcceptingFrontier, LDBA
from specsynth.models.plmdp import PLMDP
from specsynth.models.product import ExplicitProduct, ProductState, RewardConfig
from specsynth.services.automaton import accepting_frontier, detect_sinks, step
from specsynth.services.plmdp import EPSILON_PREFIX

logger = logging.getLogger(__name__)


def epsilon_action(q: int) -> str:
    return f"{EPSILON_PREFIX}{q}"


class ProductMDP:
    """
    The product of a model and an automaton, explored lazily.

    Actions are addressed by their index in enabled_actions(s): model
    actions first, then one epsilon action per epsilon successor of q.
    """

    def __init__(
        self,
        model: PLMDP,
        automaton: LDBA,
        reward: Optional[RewardConfig] = None,
        preread_initial_label: bool = False,
    ):
        missing = set(automaton.ap) - set(model.ap)
        if missing:
            raise ModelValidationError(
                f"AP mismatch: automaton atoms {sorted(missing)} are not propositions of the model"
            )
        self.model = model
        self.automaton = automaton
        self.reward = reward or RewardConfig()
        self.preread_initial_label = preread_initial_label
        self.sinks = detect_sinks(automaton)
        self._actions: Dict[Tuple[int, int], Tuple[str, ...]] = {}

    def initial_state(self, rng: np.random.Generator, label_rng: Optional[np.random.Generator] = None) -> ProductState:
        """(x0, l0, q0) with l0 ~ P_L(x0, .)"""
        x0 = self.model.initial
        label = self.model.labels[x0].sample((label_rng or rng).random())
        q0 = self.automaton.initial
        if self.preread_initial_label:
            q0 = step(self.automaton, q0, label)
        return ProductState(x0, label, q0)

    def initial_distribution(self) -> Dict[ProductState, float]:
        x0 = self.model.initial
        dist: Dict[ProductState, float] = {}
        for label, p in self.model.labels[x0].as_dict().items():
            q0 = self.automaton.initial
            if self.preread_initial_label:
                q0 = step(self.automaton, q0, label)
            s = ProductState(x0, label, q0)
            dist[s] = dist.get(s, 0.0) + p
        return dist

    def enabled_actions(self, s: ProductState) -> Tuple[str, ...]:
        key = (s.x, s.q)
        names = self._actions.get(key)
        if names is None:
            names = self.model.actions[s.x] + tuple(epsilon_action(q) for q in self.automaton.eps[s.q])
            self._actions[key] = names
        return names

    def n_actions(self, s: ProductState) -> int:
        return len(self.model.actions[s.x]) + len(self.automaton.eps[s.q])

    def step(
        self,
        s: ProductState,
        a: int,
        rng: np.random.Generator,
        label_rng: Optional[np.random.Generator] = None,
    ) -> ProductState:
        """Successor of s under the action with index a"""
        model_actions = len(self.model.actions[s.x])
        if a >= model_actions:
            return ProductState(s.x, s.label, self.automaton.eps[s.q][a - model_actions])
        x_next = self.model.transitions[s.x][a].sample(rng.random())
        label = self.model.labels[x_next].sample((label_rng or rng).random())
        return ProductState(x_next, label, step(self.automaton, s.q, label))

    def step_product(
        self,
        s: ProductState,
        action: str,
        rng: np.random.Generator,
        label_rng: Optional[np.random.Generator] = None,
    ) -> ProductState:
        """
        Successor of s under a named action.

        Raises:
            ActionNotEnabledError: If action is not enabled at s
        """
        try:
            a = self.enabled_actions(s).index(action)
        except ValueError:
            raise ActionNotEnabledError(action, s) from None
        return self.step(s, a, rng, label_rng)

    def reward_and_update(self, q_next: int, frontier: AcceptingFrontier) -> Tuple[float, AcceptingFrontier]:
        """
        Reward r when q_next belongs to a set still in the frontier, and the
        frontier after the visit. The frontier only moves on rewarded steps.
        """
        if self.automaton.membership[q_next] & frontier:
            return self.reward.reward, accepting_frontier(q_next, frontier, self.automaton)
        return 0.0, frontier

    def is_sink(self, s: ProductState) -> bool:
        return s.q in self.sinks

    def successor_distribution(self, s: ProductState, a: int) -> Dict[ProductState, float]:
        """Exact successor law P_C * P_L of one action (epsilon actions are deterministic)"""
        model_actions = len(self.model.actions[s.x])
        if a >= model_actions:
            return {ProductState(s.x, s.label, self.automaton.eps[s.q][a - model_actions]): 1.0}
        dist: Dict[ProductState, float] = {}
        transition = self.model.transitions[s.x][a]
        for x_next, p in zip(transition.support, transition.probs):
            if p <= 0:
                continue
            labels = self.model.labels[x_next]
            for label, pl in zip(labels.support, labels.probs):
                if pl <= 0:
                    continue
                nxt = ProductState(x_next, label, step(self.automaton, s.q, label))
                dist[nxt] = dist.get(nxt, 0.0) + p * pl
        return dist


def enumerate_product(
    model: PLMDP,
    automaton: LDBA,
    max_states: Optional[int] = None,
    preread_initial_label: bool = False,
) -> ExplicitProduct:
    """
    Build every product state reachable from the initial distribution.

    Args:
        model: Environment model
        automaton: LDBA over (a subset of) the model's propositions
        max_states: Cap on the number of states; defaults to the configured cap
        preread_initial_label: Whether q0 reads the initial label

    Returns:
        ExplicitProduct: States, choice rows and accepting sets

    Raises:
        ProductSizeError: When more than max_states states are reachable
    """
    cap = max_states if max_states is not None else get_settings().max_product_states
    product = ProductMDP(model, automaton, preread_initial_label=preread_initial_label)

    index: Dict[ProductState, int] = {}
    states: List[ProductState] = []

    def intern(s: ProductState) -> int:
        i = index.get(s)
        if i is None:
            if len(states) >= cap:
                raise ProductSizeError(f"Product exceeds {cap} states")
            i = index[s] = len(states)
            states.append(s)
            queue.append(s)
        return i

    queue: deque = deque()
    initial = {intern(s): p for s, p in product.initial_distribution().items()}

    actions: List[Tuple[str, ...]] = []
    row_start = [0]
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    n_rows = 0
    while queue:
        s = queue.popleft()
        names = product.enabled_actions(s)
        actions.append(names)
        for a in range(len(names)):
            for nxt, p in product.successor_distribution(s, a).items():
                rows.append(n_rows)
                cols.append(intern(nxt))
                vals.append(p)
            n_rows += 1
        row_start.append(n_rows)

    matrix = sp.csr_matrix(
        (np.asarray(vals, dtype=float), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n_rows, len(states)),
    )
    accepting = [
        frozenset(i for i, s in enumerate(states) if s.q in members) for members in automaton.acc
    ]
    explicit = ExplicitProduct(
        states=states,
        actions=actions,
        row_start=np.asarray(row_start, dtype=np.int64),
        matrix=matrix,
        initial=initial,
        accepting=accepting,
        sink_states=frozenset(i for i, s in enumerate(states) if s.q in product.sinks),
        automaton=automaton.name,
        preread_initial_label=preread_initial_label,
    )
    logger.info("Enumerated product %s x %s: %d states, %d choices", model.name, automaton.name, len(states), n_rows)
    return explicit
