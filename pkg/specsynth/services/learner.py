"""
Learner Service
Episodic tabular Q-learning over the on-the-fly product, greedy policy
extraction and policy execution on the model
"""
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from shared.config import get_settings
from shared.utils import get_logger, spawn_streams
from specsynth.errors import TimeInvarianceError
from specsynth.models.automaton import LDBA
from specsynth.models.learning import (
    CurvePoint,
    FrontierEvent,
    LearnConfig,
    LearningCurve,
    Policy,
    QTable,
    Trace,
    TraceStep,
)
from specsynth.models.plmdp import PLMDP
from specsynth.models.product import ProductState, RewardConfig
from specsynth.services.product import ProductMDP


def greedy_index(values) -> int:
    """Argmax with ties going to the lowest index"""
    best, best_value = 0, values[0]
    for i in range(1, len(values)):
        if values[i] > best_value:
            best, best_value = i, values[i]
    return best


def greedy_action(qtable: QTable, s: ProductState, actions: Optional[Tuple[str, ...]] = None) -> str:
    """Greedy action at s; the first of actions when s is not in the table"""
    if s not in qtable.values:
        if not actions:
            raise KeyError(s)
        return actions[0]
    return qtable.actions[s][greedy_index(qtable.values[s])]


def _initial_value(qtable: QTable, initial: Dict[ProductState, float]) -> float:
    return sum(p * qtable.value(s) for s, p in initial.items())


def run_learning(
    model: PLMDP,
    automaton: LDBA,
    config: LearnConfig,
    worker_id: Optional[str] = None,
    progress: Optional[Callable[[int, float], None]] = None,
) -> Tuple[QTable, LearningCurve]:
    """
    Learn Q over the product with epsilon-greedy exploration.

    Args:
        model: Environment model, sampled but never inspected
        automaton: LDBA of the objective
        config: Learning parameters
        worker_id: Log prefix for sweep workers
        progress: Optional callback(episode, u_s0) called at every recorded episode

    Returns:
        Tuple of (QTable, LearningCurve); curve.converged tells whether the
        window criterion was met before max_episodes. Quiet episodes only
        count once some Q value has moved off q_init.
    """
    log = get_logger(__name__, worker_id)
    stride = config.record_stride or get_settings().curve_stride
    product = ProductMDP(
        model,
        automaton,
        RewardConfig(reward=config.reward, gamma=config.gamma),
        preread_initial_label=config.preread_initial_label,
    )
    streams = spawn_streams(config.seed)
    env_rng, label_rng, learner_rng = streams.env, streams.labels, streams.learner
    gamma, tau = config.gamma, config.tau
    qtable = QTable(config.q_init)
    initial = product.initial_distribution()
    for s0 in initial:
        qtable.row(s0, product.enabled_actions(s0))

    curve = LearningCurve()
    frontier = automaton.full_frontier
    quiet_episodes = 0
    learning_started = False
    episode = 0
    for episode in range(1, config.max_episodes + 1):
        epsilon = max(1.0 / episode, config.epsilon_floor)
        if config.reset_frontier_per_episode:
            frontier = automaton.full_frontier
        s = product.initial_state(env_rng, label_rng)
        observed = {s.q: frontier} if config.check_time_invariance else None
        largest_change = 0.0

        for _ in range(tau):
            if product.is_sink(s):
                break
            values = qtable.row(s, product.enabled_actions(s))
            if learner_rng.random() < epsilon:
                a = int(learner_rng.integers(len(values)))
            else:
                a = greedy_index(values)
            s_next = product.step(s, a, env_rng, label_rng)
            reward, next_frontier = product.reward_and_update(s_next.q, frontier)
            next_values = qtable.row(s_next, product.enabled_actions(s_next))
            target = reward if product.is_sink(s_next) else reward + gamma * max(next_values)

            counts = qtable.counts[s]
            counts[a] += 1
            change = (target - values[a]) / counts[a]
            values[a] += change
            if abs(change) > largest_change:
                largest_change = abs(change)

            frontier = next_frontier
            if observed is not None and not product.is_sink(s_next):
                first = observed.setdefault(s_next.q, frontier)
                if first != frontier:
                    raise TimeInvarianceError(
                        f"Episode {episode}: state {s_next.q} seen with frontier {sorted(first)} "
                        f"and later {sorted(frontier)}"
                    )
            s = s_next

        # A table nothing has moved yet is not a fixpoint, only unexplored.
        learning_started = learning_started or largest_change > 0
        if learning_started:
            quiet_episodes = quiet_episodes + 1 if largest_change < config.tolerance else 0
        converged = quiet_episodes >= config.window
        if episode % stride == 0 or converged or episode == config.max_episodes:
            u_s0 = _initial_value(qtable, initial)
            curve.points.append(CurvePoint(episode=episode, u_s0=u_s0))
            log.debug("episode %d: u_s0=%.6f epsilon=%.4f states=%d", episode, u_s0, epsilon, len(qtable))
            if progress is not None:
                progress(episode, u_s0)
        if converged:
            curve.converged = True
            break

    curve.episodes = episode
    if curve.converged:
        log.info("Converged after %d episodes (%d product states)", episode, len(qtable))
    else:
        log.warning("No convergence within %d episodes (window %d, tolerance %g)",
                    config.max_episodes, config.window, config.tolerance)
    return qtable, curve


def extract_policy(qtable: QTable, automaton: Optional[LDBA] = None, preread_initial_label: bool = False) -> Policy:
    """
    Greedy policy over every state the table knows.

    States that were only seen as successors map to their first action and
    are listed in Policy.fallback.
    """
    actions, fallback = {}, set()
    for s, values in qtable.values.items():
        if qtable.visited(s):
            actions[s] = qtable.actions[s][greedy_index(values)]
        else:
            actions[s] = qtable.actions[s][0]
            fallback.add(s)
    return Policy(
        actions=actions,
        fallback=frozenset(fallback),
        automaton=automaton.name if automaton is not None else None,
        preread_initial_label=preread_initial_label,
    )


def execute_policy(
    policy: Policy,
    model: PLMDP,
    automaton: LDBA,
    rng: np.random.Generator,
    horizon: int,
    reward: Optional[RewardConfig] = None,
    label_rng: Optional[np.random.Generator] = None,
) -> Trace:
    """
    Run the projected policy on the model for horizon steps.

    The automaton is advanced alongside the model and supplies the memory
    the policy is keyed on. States missing from the policy take their first
    action and are flagged in the trace.
    """
    product = ProductMDP(model, automaton, reward, preread_initial_label=policy.preread_initial_label)
    trace = Trace()
    frontier = automaton.full_frontier
    s = product.initial_state(rng, label_rng)
    for t in range(horizon):
        names = product.enabled_actions(s)
        action = policy.get(s)
        fallback = action is None or action not in names
        if fallback:
            action = names[0]
        trace.steps.append(TraceStep(x=s.x, label=sorted(s.label), q=s.q, action=action, fallback=fallback))
        s_next = product.step(s, names.index(action), rng, label_rng)
        reward_value, frontier = product.reward_and_update(s_next.q, frontier)
        if reward_value > 0:
            trace.events.append(FrontierEvent(step=t, q=s_next.q, frontier=sorted(frontier)))
        s = s_next
    trace.steps.append(TraceStep(x=s.x, label=sorted(s.label), q=s.q))
    return trace
