"""
Verifier Service
Exact analysis of the enumerated product: end components, maximal
satisfaction probability, evaluation of a fixed policy, closeness, and
the closed-form returns of the two-action counterexample
"""
import itertools
import logging
import math
from typing import Callable, Iterator, List, Optional, Tuple

import networkx as nx
import numpy as np

from shared.config import get_settings
from specsynth.errors import InvalidParameterError, PolicyGapError
from specsynth.models.learning import Policy
from specsynth.models.product import ExplicitProduct
from specsynth.models.report import (
    ChainDecomposition,
    ClassSummary,
    EndComponent,
    MaxSatisfaction,
    PolicyEvaluation,
    RecurrentClass,
    VerificationReport,
)
from specsynth.services.envs import make_counterexample
from specsynth.services.product import enumerate_product

logger = logging.getLogger(__name__)


def _successor_sets(product: ExplicitProduct) -> List[frozenset]:
    return [frozenset(product.successors(r)[0].tolist()) for r in range(product.matrix.shape[0])]


def mec_decomposition(product: ExplicitProduct) -> List[EndComponent]:
    """
    Maximal end components by iterated SCC refinement.

    A candidate set keeps only the actions whose successors stay inside it;
    states left without actions are dropped, and the remainder is split
    into SCCs until every candidate is a single SCC.
    """
    succ = _successor_sets(product)
    starts = product.row_start
    work = [set(range(product.n_states))]
    mecs: List[EndComponent] = []
    while work:
        candidate = work.pop()
        enabled = {
            s: [a for a in range(starts[s + 1] - starts[s]) if succ[starts[s] + a] <= candidate]
            for s in candidate
        }
        while True:
            dead = [s for s, acts in enabled.items() if not acts]
            if not dead:
                break
            for s in dead:
                del enabled[s]
                candidate.discard(s)
            for s, acts in enabled.items():
                enabled[s] = [a for a in acts if succ[starts[s] + a] <= candidate]
        if not candidate:
            continue
        graph = nx.DiGraph()
        graph.add_nodes_from(candidate)
        for s, acts in enabled.items():
            for a in acts:
                graph.add_edges_from((s, t) for t in succ[starts[s] + a])
        components = list(nx.strongly_connected_components(graph))
        if len(components) == 1:
            mecs.append(EndComponent(
                states=frozenset(candidate),
                actions={s: tuple(acts) for s, acts in enabled.items()},
            ))
        else:
            work.extend(components)
    mecs.sort(key=lambda m: min(m.states))
    return mecs


def accepting_mecs(mecs: List[EndComponent], accepting: List[frozenset]) -> List[EndComponent]:
    """End components meeting every product accepting set"""
    return [m for m in mecs if len(m.hits(accepting)) == len(accepting)]


def choice_in_amec(product: ExplicitProduct, mec: EndComponent, succ: List[frozenset], choice: List[int]) -> None:
    """
    Pick staying actions that keep the run cycling through the accepting sets.

    A state in F_j heads for F_{j+1} (indices mod f), any other state for F_0.
    Each state takes the staying action with a successor closest to its
    target, so every target is reached with probability 1.
    """
    f = len(product.accepting)
    distances = []
    for j in range(f):
        goal = mec.states & product.accepting[j]
        dist = {s: 0 for s in goal}
        level = 0
        while len(dist) < len(mec.states):
            level += 1
            layer = [
                s for s in mec.states
                if s not in dist and any(
                    any(dist.get(t, level) < level for t in succ[product.row_start[s] + a])
                    for a in mec.actions[s]
                )
            ]
            if not layer:
                break
            for s in layer:
                dist[s] = level
        distances.append(dist)

    for s in mec.states:
        hit = [j for j in range(f) if s in product.accepting[j]]
        dist = distances[(hit[-1] + 1) % f if hit else 0]
        choice[s] = min(
            mec.actions[s],
            key=lambda a: min(dist.get(t, math.inf) for t in succ[product.row_start[s] + a]),
        )


def max_satisfaction_probability(
    product: ExplicitProduct,
    mecs: Optional[List[EndComponent]] = None,
    on_sweep: Optional[Callable[[np.ndarray], None]] = None,
) -> MaxSatisfaction:
    """
    Maximal probability of reaching the union of accepting end components.

    Value iteration starts from 1 on AMEC states and 0 elsewhere and stops
    once the sup-norm change drops below the configured tolerance. The
    returned policy cycles through the accepting sets on AMEC states (see
    choice_in_amec) and elsewhere picks an optimal action that moves closer
    to the target. on_sweep, when given, receives a copy of every iterate.
    """
    settings = get_settings()
    if mecs is None:
        mecs = mec_decomposition(product)
    amecs = accepting_mecs(mecs, product.accepting)
    n = product.n_states
    target = np.zeros(n, dtype=bool)
    for m in amecs:
        target[list(m.states)] = True

    starts = product.row_start[:-1]
    values = target.astype(float)
    sweeps = 0
    if amecs:
        for sweeps in range(1, settings.vi_max_sweeps + 1):
            updated = np.maximum.reduceat(product.matrix @ values, starts)
            updated[target] = 1.0
            delta = float(np.max(np.abs(updated - values)))
            values = updated
            if on_sweep is not None:
                on_sweep(values.copy())
            if delta < settings.vi_tolerance:
                break
        else:
            logger.warning("Value iteration stopped at the sweep cap (%d)", settings.vi_max_sweeps)

    choice = [0] * n
    assigned = target.copy()
    succ = _successor_sets(product)
    for m in amecs:
        choice_in_amec(product, m, succ, choice)
    q_values = product.matrix @ values
    slack = max(1e-9, 1000 * settings.vi_tolerance)
    pending = {int(s) for s in np.flatnonzero((values > 0) & ~target)}
    optimal = {
        s: [a for a, r in enumerate(product.rows(s)) if q_values[r] >= values[s] - slack]
        for s in pending
    }
    while pending:
        progressed = []
        for s in sorted(pending):
            for a in optimal[s]:
                if any(assigned[t] for t in succ[product.row_start[s] + a]):
                    choice[s] = a
                    assigned[s] = True
                    progressed.append(s)
                    break
        if not progressed:
            break
        pending.difference_update(progressed)
    for s in pending:
        rows = list(product.rows(s))
        choice[s] = int(np.argmax(q_values[rows]))

    initial_probability = sum(p * float(values[i]) for i, p in product.initial.items())
    logger.info("Max satisfaction probability %.6f (%d AMECs, %d sweeps)", initial_probability, len(amecs), sweeps)
    return MaxSatisfaction(
        values=values,
        actions=choice,
        initial_probability=initial_probability,
        sweeps=sweeps,
        amec_count=len(amecs),
    )


def optimal_policy(product: ExplicitProduct, result: MaxSatisfaction) -> Policy:
    return Policy(
        actions={s: product.actions[i][result.actions[i]] for i, s in enumerate(product.states)},
        automaton=product.automaton,
        preread_initial_label=product.preread_initial_label,
    )


def _induced_rows(product: ExplicitProduct, policy: Policy, strict: bool) -> Tuple[dict, List[int]]:
    chosen, gaps = {}, []
    queue = sorted(product.initial)
    seen = set(queue)
    while queue:
        i = queue.pop()
        state = product.states[i]
        names = product.actions[i]
        action = policy.get(state)
        if action in names:
            a = names.index(action)
        elif i in product.sink_states:
            a = 0
        elif strict:
            raise PolicyGapError(f"Policy has no enabled action for reachable state {state.key()}")
        else:
            a = 0
            gaps.append(i)
        row = int(product.row_start[i]) + a
        chosen[i] = row
        for t in product.successors(row)[0].tolist():
            if t not in seen:
                seen.add(t)
                queue.append(t)
    if gaps:
        logger.warning("%d reachable states fell back to their first action", len(gaps))
    return chosen, sorted(gaps)


def policy_satisfaction_probability(
    product: ExplicitProduct,
    policy: Policy,
    strict: bool = True,
) -> PolicyEvaluation:
    """
    Satisfaction probability of a fixed policy from the initial distribution.

    Args:
        product: Enumerated product
        policy: Product policy to evaluate
        strict: Raise on reachable states the policy does not cover; otherwise
            they take their first action and are reported

    Returns:
        PolicyEvaluation: Probability of absorption into accepting recurrent
        classes and the chain decomposition

    Raises:
        PolicyGapError: In strict mode, on an uncovered reachable state
    """
    settings = get_settings()
    chosen, gaps = _induced_rows(product, policy, strict)
    reach = sorted(chosen)
    local = {s: k for k, s in enumerate(reach)}

    graph = nx.DiGraph()
    graph.add_nodes_from(reach)
    for s in reach:
        graph.add_edges_from((s, t) for t in product.successors(chosen[s])[0].tolist())
    bottom = sorted((sorted(c) for c in nx.attracting_components(graph)), key=lambda c: c[0])

    chain = product.matrix[[chosen[s] for s in reach]][:, reach].tocsr()
    absorbed = np.zeros((len(reach), len(bottom)))
    recurrent = np.zeros(len(reach), dtype=bool)
    for c, members in enumerate(bottom):
        rows = [local[s] for s in members]
        absorbed[rows, c] = 1.0
        recurrent[rows] = True
    if bottom and not recurrent.all():
        fixed = absorbed[recurrent]
        for _ in range(settings.vi_max_sweeps):
            updated = chain @ absorbed
            updated[recurrent] = fixed
            delta = float(np.max(np.abs(updated - absorbed)))
            absorbed = updated
            if delta < settings.vi_tolerance:
                break

    classes = []
    for c, members in enumerate(bottom):
        member_set = set(members)
        hit = [j for j, acc in enumerate(product.accepting) if member_set & acc]
        probability = sum(p * float(absorbed[local[i], c]) for i, p in product.initial.items())
        classes.append(RecurrentClass(
            states=members,
            accepting_sets=hit,
            accepting=len(hit) == len(product.accepting),
            probability=probability,
        ))
    transient = [s for s in reach if not recurrent[local[s]]]
    probability = min(1.0, sum(c.probability for c in classes if c.accepting))
    return PolicyEvaluation(
        probability=probability,
        chain=ChainDecomposition(transient=transient, classes=classes),
        fallback_states=gaps,
    )


def closeness(product: ExplicitProduct, policy: Policy, strict: bool = True) -> int:
    """Largest number of distinct accepting sets met by one recurrent class of the induced chain"""
    return policy_satisfaction_probability(product, policy, strict).closeness


def max_closeness(product: ExplicitProduct, mecs: Optional[List[EndComponent]] = None) -> int:
    """
    Largest number of accepting sets met by one end component.

    An upper bound on the closeness of any policy; attained by a memoryless
    policy whenever an AMEC exists or there are at most two accepting sets.
    """
    if mecs is None:
        mecs = mec_decomposition(product)
    return max((len(m.hits(product.accepting)) for m in mecs), default=0)


def enumerate_memoryless_policies(product: ExplicitProduct, limit: int = 200_000) -> Iterator[Policy]:
    """Every deterministic memoryless product policy; refuses instances with more than limit policies"""
    sizes = [len(names) for names in product.actions]
    total = math.prod(sizes)
    if total > limit:
        raise InvalidParameterError(f"{total} memoryless policies exceed the enumeration limit {limit}")
    for picks in itertools.product(*(range(k) for k in sizes)):
        yield Policy(
            actions={s: product.actions[i][a] for i, (s, a) in enumerate(zip(product.states, picks))},
            automaton=product.automaton,
            preread_initial_label=product.preread_initial_label,
        )


def brute_force_max_closeness(product: ExplicitProduct, limit: int = 200_000) -> int:
    return max(closeness(product, policy) for policy in enumerate_memoryless_policies(product, limit))


def verify(
    product: ExplicitProduct,
    policy: Optional[Policy] = None,
    strict: bool = True,
    model_name: Optional[str] = None,
) -> VerificationReport:
    """
    Full verifier report. Without a policy, the optimal policy from value
    iteration is evaluated.
    """
    mecs = mec_decomposition(product)
    best = max_satisfaction_probability(product, mecs)
    if policy is None:
        policy = optimal_policy(product, best)
    evaluation = policy_satisfaction_probability(product, policy, strict)
    report = VerificationReport(
        model=model_name,
        automaton=product.automaton,
        product_states=product.n_states,
        mec_count=len(mecs),
        amec_count=best.amec_count,
        max_prob=best.initial_probability,
        policy_prob=evaluation.probability,
        closeness=evaluation.closeness,
        max_closeness=max_closeness(product, mecs),
        fallback_states=len(evaluation.fallback_states),
        recurrent_class_summary=[
            ClassSummary(
                size=len(c.states),
                accepting_sets=c.accepting_sets,
                accepting=c.accepting,
                probability=c.probability,
            )
            for c in evaluation.chain.classes
        ],
    )
    logger.info("Verified: max_prob=%.6f policy_prob=%.6f closeness=%s/%d",
                report.max_prob, report.policy_prob, report.closeness, report.max_closeness)
    return report


def counterexample_returns(gamma: float, nu: float, reward: float = 1.0, n: float = math.inf) -> Tuple[float, float]:
    """
    Discounted returns at s0 of the two actions of the counterexample model.

    Args:
        gamma: Discount factor in [0, 1]
        nu: Probability that right leads to the non-accepting loop
        reward: Reward per frontier visit
        n: Number of rewarded visits (math.inf for the infinite run)

    Returns:
        Tuple of (U_right, U_left)

    Raises:
        InvalidParameterError: On parameters out of range, including gamma = 1 with n infinite
    """
    if not 0.0 <= gamma <= 1.0 or not 0.0 <= nu <= 1.0:
        raise InvalidParameterError("gamma and nu must lie in [0, 1]")
    if reward <= 0:
        raise InvalidParameterError("reward must be positive")
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    if gamma == 1.0:
        if math.isinf(n):
            raise InvalidParameterError("The undiscounted return of an infinite run diverges")
        return n * (1.0 - nu) * reward, n * reward
    right = (1.0 - nu) * reward * (1.0 - gamma ** n) / (1.0 - gamma)
    left = gamma ** 2 * reward * (1.0 - gamma ** (3 * n)) / (1.0 - gamma ** 3)
    return right, left


def counterexample_threshold(nu: float) -> float:
    """Discount above which left beats right on the infinite run; infinite when nu = 0"""
    if nu <= 0:
        return math.inf
    return ((math.sqrt(1.0 / nu ** 2 + 2.0 / nu - 3.0) - 1.0) * nu + 1.0) / (2.0 * nu)


def counterexample_margin(gamma: float, nu: float) -> float:
    """Has the sign of U_left - U_right for the infinite run"""
    return gamma ** 2 / (1.0 + gamma + gamma ** 2) - (1.0 - nu)


def rollout_returns(
    product: ExplicitProduct,
    first_action: str,
    gamma: float,
    reward: float,
    n_rollouts: int,
    horizon: int,
    rng: np.random.Generator,
) -> float:
    """
    Monte-Carlo estimate of the discounted return of first_action at the
    initial state, following the first action of every later state.

    Rewards follow the single-accepting-set rule: every entry into F_1 pays.
    """
    if len(product.accepting) != 1:
        raise InvalidParameterError("Rollouts support automata with a single accepting set")
    if len(product.initial) != 1:
        raise InvalidParameterError("Rollouts need a deterministic initial state")
    rewarding = np.zeros(product.n_states, dtype=bool)
    rewarding[list(product.accepting[0])] = True
    (start,) = product.initial
    current = np.full(n_rollouts, start, dtype=np.int64)
    returns = np.zeros(n_rollouts)
    first = product.actions[start].index(first_action)
    discount = 1.0
    for t in range(horizon):
        rows = product.row_start[current] + (first if t == 0 else 0)
        draws = rng.random(n_rollouts)
        nxt = np.empty_like(current)
        for row in np.unique(rows):
            mask = rows == row
            succ, probs = product.successors(int(row))
            cdf = np.cumsum(probs)
            picks = np.searchsorted(cdf, draws[mask] * cdf[-1], side="right")
            nxt[mask] = succ[np.minimum(picks, len(succ) - 1)]
        returns += discount * reward * rewarding[nxt]
        discount *= gamma
        current = nxt
    return float(returns.mean())


def rollout_counterexample(
    gamma: float,
    nu: float,
    reward: float = 1.0,
    n_rollouts: int = 100_000,
    seed: Optional[int] = 0,
    horizon: Optional[int] = None,
) -> Tuple[float, float]:
    """Monte-Carlo counterpart of counterexample_returns for the infinite run (gamma < 1)"""
    if horizon is None:
        if gamma >= 1.0:
            raise InvalidParameterError("An explicit horizon is required when gamma = 1")
        horizon = max(3, math.ceil(math.log(1e-12) / math.log(gamma))) if gamma > 0 else 3
    model, automaton = make_counterexample(nu)
    product = enumerate_product(model, automaton)
    rng = np.random.default_rng(seed)
    right = rollout_returns(product, "right", gamma, reward, n_rollouts, horizon, rng)
    left = rollout_returns(product, "left", gamma, reward, n_rollouts, horizon, rng)
    return right, left
