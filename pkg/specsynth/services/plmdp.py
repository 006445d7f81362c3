"""
PL-MDP Service
Loading, validating, saving and sampling probabilistically-labeled MDPs
"""
import logging
from collections import deque
from typing import Dict, List, Optional, Tuple

import numpy as np

from specsynth.errors import ActionNotEnabledError, ModelValidationError
from specsynth.models.plmdp import (
    PROBABILITY_TOLERANCE,
    Distribution,
    LabelDocument,
    LabelOutcomeDocument,
    OutcomeDocument,
    PLMDP,
    PLMDPDocument,
    TransitionDocument,
)

logger = logging.getLogger(__name__)

EPSILON_PREFIX = "eps:"


def load_plmdp(document: PLMDPDocument) -> PLMDP:
    """
    Validate a model document and compile it.

    Args:
        document: Parsed model file

    Returns:
        PLMDP: Runtime model

    Raises:
        ModelValidationError: On normalization violations or unknown references
    """
    n = document.states
    if document.initial >= n:
        raise ModelValidationError(f"Initial state {document.initial} out of range")
    if len(document.actions) != n:
        raise ModelValidationError(f"actions lists {len(document.actions)} states, expected {n}")
    ap = frozenset(document.ap)

    for x, names in enumerate(document.actions):
        if not names:
            raise ModelValidationError(f"State {x} has no enabled action")
        if len(set(names)) != len(names):
            raise ModelValidationError(f"State {x} lists an action twice")
        reserved = [a for a in names if a.startswith(EPSILON_PREFIX)]
        if reserved:
            raise ModelValidationError(f"State {x}: action names {reserved} use the reserved prefix {EPSILON_PREFIX!r}")

    kernel: Dict[Tuple[int, str], Distribution] = {}
    for row in document.trans:
        if row.x >= n:
            raise ModelValidationError(f"Transition from unknown state {row.x}")
        if row.a not in document.actions[row.x]:
            raise ModelValidationError(f"Action {row.a!r} is not enabled at state {row.x}")
        if (row.x, row.a) in kernel:
            raise ModelValidationError(f"Duplicate transition row for ({row.x}, {row.a!r})")
        for outcome in row.dist:
            if outcome.to >= n:
                raise ModelValidationError(f"Transition ({row.x}, {row.a!r}) references unknown state {outcome.to}")
        total = sum(o.p for o in row.dist)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ModelValidationError(f"P_C({row.x}, {row.a!r}, .) sums to {total}")
        kernel[(row.x, row.a)] = Distribution.of([o.to for o in row.dist], [o.p for o in row.dist])

    transitions = []
    for x, names in enumerate(document.actions):
        missing = [a for a in names if (x, a) not in kernel]
        if missing:
            raise ModelValidationError(f"State {x}: no transition row for actions {missing}")
        transitions.append(tuple(kernel[(x, a)] for a in names))

    label_rows: Dict[int, Distribution] = {}
    for row in document.labels:
        if row.x >= n:
            raise ModelValidationError(f"Label row for unknown state {row.x}")
        if row.x in label_rows:
            raise ModelValidationError(f"Duplicate label row for state {row.x}")
        for outcome in row.dist:
            undeclared = set(outcome.labels) - ap
            if undeclared:
                raise ModelValidationError(f"State {row.x}: label uses undeclared atoms {sorted(undeclared)}")
        total = sum(o.p for o in row.dist)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ModelValidationError(f"P_L({row.x}, .) sums to {total}")
        label_rows[row.x] = Distribution.of([frozenset(o.labels) for o in row.dist], [o.p for o in row.dist])
    missing = [x for x in range(n) if x not in label_rows]
    if missing:
        raise ModelValidationError(f"No label distribution for states {missing[:10]}")

    model = PLMDP(
        n_states=n,
        initial=document.initial,
        ap=tuple(sorted(ap)),
        actions=tuple(tuple(names) for names in document.actions),
        transitions=tuple(transitions),
        labels=tuple(label_rows[x] for x in range(n)),
        name=document.name,
    )
    unreachable = n - len(reachable_states(model))
    if unreachable:
        logger.info("%r: %d states unreachable from the initial state", model, unreachable)
    logger.info("Loaded %r", model)
    return model


def to_document(model: PLMDP) -> PLMDPDocument:
    """Inverse of load_plmdp; outcome order is preserved"""
    trans = []
    for x, names in enumerate(model.actions):
        for a, dist in zip(names, model.transitions[x]):
            trans.append(TransitionDocument(
                x=x, a=a, dist=[OutcomeDocument(to=t, p=p) for t, p in zip(dist.support, dist.probs)]
            ))
    labels = [
        LabelDocument(x=x, dist=[
            LabelOutcomeDocument(labels=sorted(label), p=p) for label, p in zip(dist.support, dist.probs)
        ])
        for x, dist in enumerate(model.labels)
    ]
    return PLMDPDocument(
        name=model.name,
        states=model.n_states,
        initial=model.initial,
        ap=list(model.ap),
        actions=[list(names) for names in model.actions],
        trans=trans,
        labels=labels,
    )


def reachable_states(model: PLMDP) -> set:
    seen = {model.initial}
    queue = deque([model.initial])
    while queue:
        x = queue.popleft()
        for dist in model.transitions[x]:
            for nxt, p in zip(dist.support, dist.probs):
                if p > 0 and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return seen


def action_index(model: PLMDP, x: int, action: str) -> int:
    try:
        return model.action_index[x][action]
    except KeyError:
        raise ActionNotEnabledError(action, x) from None


def sample_transition(model: PLMDP, x: int, action: str, rng: np.random.Generator) -> int:
    """
    Draw x' ~ P_C(x, action, .).

    Raises:
        ActionNotEnabledError: If action is not enabled at x
    """
    return model.transitions[x][action_index(model, x, action)].sample(rng.random())


def sample_label(model: PLMDP, x: int, rng: np.random.Generator) -> frozenset:
    """Draw a label-set from P_L(x, .)"""
    return model.labels[x].sample(rng.random())


def same_model(left: PLMDP, right: PLMDP, tolerance: float = PROBABILITY_TOLERANCE) -> bool:
    """Semantic equality: same states, actions and kernels regardless of listing order"""
    if (left.n_states, left.initial, set(left.ap)) != (right.n_states, right.initial, set(right.ap)):
        return False
    for x in range(left.n_states):
        if set(left.actions[x]) != set(right.actions[x]):
            return False
        for a in left.actions[x]:
            if not _close(left.transitions[x][left.action_index[x][a]].as_dict(),
                          right.transitions[x][right.action_index[x][a]].as_dict(), tolerance):
                return False
        if not _close(left.labels[x].as_dict(), right.labels[x].as_dict(), tolerance):
            return False
    return True


def _close(a: dict, b: dict, tolerance: float) -> bool:
    keys = set(a) | set(b)
    return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= tolerance for k in keys)


def build_plmdp(
    n_states: int,
    initial: int,
    ap: List[str],
    actions: List[List[str]],
    kernel: Dict[Tuple[int, str], Dict[int, float]],
    labels: Dict[int, Dict[frozenset, float]],
    name: Optional[str] = None,
) -> PLMDP:
    """Assemble a document from plain dictionaries and load it (used by the environment constructors)"""
    trans = [
        TransitionDocument(x=x, a=a, dist=[OutcomeDocument(to=t, p=min(p, 1.0)) for t, p in dist.items() if p > 0])
        for (x, a), dist in kernel.items()
    ]
    label_rows = [
        LabelDocument(x=x, dist=[LabelOutcomeDocument(labels=sorted(s), p=min(p, 1.0)) for s, p in dist.items() if p > 0])
        for x, dist in labels.items()
    ]
    document = PLMDPDocument(
        name=name, states=n_states, initial=initial, ap=list(ap),
        actions=actions, trans=trans, labels=label_rows,
    )
    return load_plmdp(document)
