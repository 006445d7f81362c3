"""
Automaton Service
Loading and validating LDBAs, stepping, sink detection, the accepting
frontier function and lasso acceptance
"""
import logging
from typing import List, Set

import networkx as nx

from specsynth.errors import AutomatonValidationError, LTLSyntaxError
from specsynth.models.automaton import (
    AcceptingFrontier,
    Guard,
    LDBA,
    LDBADocument,
    StatePart,
    all_labels,
)
from specsynth.models.formula import Lasso, TrueFormula
from specsynth.services.ltl import atoms, evaluate_label, is_propositional, parse_ltl

logger = logging.getLogger(__name__)


def _compile_guard(text: str, ap: frozenset, state: int):
    try:
        formula = parse_ltl(text)
    except LTLSyntaxError as exc:
        raise AutomatonValidationError(f"State {state}: bad guard {text!r}: {exc}") from exc
    if not is_propositional(formula):
        raise AutomatonValidationError(f"State {state}: guard {text!r} uses a temporal operator")
    undeclared = atoms(formula) - ap
    if undeclared:
        raise AutomatonValidationError(f"State {state}: guard {text!r} uses undeclared atoms {sorted(undeclared)}")
    return formula


def load_ldba(document: LDBADocument) -> LDBA:
    """
    Validate a document and build the runtime automaton.

    Args:
        document: Parsed .ldba file

    Returns:
        LDBA: With an explicit sink state appended at index document.states

    Raises:
        AutomatonValidationError: On any structural violation
    """
    n = document.states
    ap = frozenset(document.ap)
    if len(ap) != len(document.ap):
        raise AutomatonValidationError("Duplicate atomic propositions")
    if len(document.part) != n:
        raise AutomatonValidationError(f"part has {len(document.part)} tags for {n} states")
    if document.initial >= n:
        raise AutomatonValidationError(f"Initial state {document.initial} out of range")
    part = tuple(StatePart(p) for p in document.part)

    guards: List[List[Guard]] = [[] for _ in range(n)]
    for edge in document.edges:
        if edge.source >= n or edge.to >= n:
            raise AutomatonValidationError(f"Edge {edge.source}->{edge.to} references an unknown state")
        if part[edge.source] is StatePart.D and part[edge.to] is StatePart.N:
            raise AutomatonValidationError(f"Edge {edge.source}->{edge.to} leaves the deterministic part")
        formula = _compile_guard(edge.guard, ap, edge.source)
        guards[edge.source].append(Guard(edge.guard, formula, edge.to))

    eps: List[Set[int]] = [set() for _ in range(n)]
    for jump in document.eps:
        if jump.source >= n or jump.to >= n:
            raise AutomatonValidationError(f"Epsilon edge {jump.source}->{jump.to} references an unknown state")
        if part[jump.source] is StatePart.D:
            raise AutomatonValidationError(f"Epsilon edge leaves deterministic state {jump.source}")
        if part[jump.to] is StatePart.N:
            raise AutomatonValidationError(f"Epsilon edge {jump.source}->{jump.to} must enter the deterministic part")
        eps[jump.source].add(jump.to)

    acc = []
    for j, members in enumerate(document.acc):
        if not members:
            raise AutomatonValidationError(f"Accepting set {j} is empty")
        for q in members:
            if q >= n:
                raise AutomatonValidationError(f"Accepting set {j} references unknown state {q}")
            if part[q] is StatePart.N:
                raise AutomatonValidationError(f"Accepting state {q} of set {j} is tagged N")
        acc.append(frozenset(members))

    for q in range(n):
        for label in all_labels(ap):
            matching = [g.text for g in guards[q] if evaluate_label(g.formula, label)]
            if len(matching) > 1:
                raise AutomatonValidationError(
                    f"State {q}: guards {matching} overlap on label {sorted(label)}"
                )

    sink = n
    ldba = LDBA(
        ap=tuple(sorted(ap)),
        declared_states=n,
        initial=document.initial,
        part=part + (StatePart.D,),
        guards=tuple(tuple(g) for g in guards) + ((Guard("true", TrueFormula(), sink),),),
        eps=tuple(tuple(sorted(e)) for e in eps) + ((),),
        acc=tuple(acc),
        name=document.name,
        formula=document.formula,
    )
    logger.info("Loaded %r", ldba)
    return ldba


def step(automaton: LDBA, q: int, label: frozenset) -> int:
    """Successor of q on label, or the sink when no guard matches"""
    key = (q, label)
    table = automaton._table
    if key not in table:
        target = automaton.sink
        for guard in automaton.guards[q]:
            if evaluate_label(guard.formula, label):
                target = guard.to
                break
        table[key] = target
    return table[key]


def epsilon_successors(automaton: LDBA, q: int) -> frozenset:
    return frozenset(automaton.eps[q])


def transition_graph(automaton: LDBA) -> nx.DiGraph:
    """States reachable from the initial state, with label and epsilon moves as edges"""
    labels = all_labels(automaton.ap)
    graph = nx.DiGraph()
    graph.add_node(automaton.initial)
    frontier = [automaton.initial]
    while frontier:
        q = frontier.pop()
        successors = {step(automaton, q, label) for label in labels} | set(automaton.eps[q])
        for nxt in successors:
            if nxt not in graph:
                frontier.append(nxt)
            graph.add_edge(q, nxt)
    return graph


def detect_sinks(automaton: LDBA) -> frozenset:
    """
    Union of the closed SCCs that miss at least one accepting set.

    Only states reachable from the initial state are considered, so an unused
    materialized sink is not reported.
    """
    graph = transition_graph(automaton)
    condensation = nx.condensation(graph)
    sinks = set()
    for node in condensation.nodes:
        if condensation.out_degree(node) > 0:
            continue
        members = condensation.nodes[node]["members"]
        if not all(members & f for f in automaton.acc):
            sinks |= members
    return frozenset(sinks)


def accepting_frontier(q: int, frontier: AcceptingFrontier, automaton: LDBA) -> AcceptingFrontier:
    """
    Update the frontier after visiting q.

    Sets containing q are removed from the frontier; once the frontier would
    become empty it restarts from every set not containing q, or from the full
    family when q belongs to all of them.
    """
    hit = automaton.membership[q]
    if not hit:
        return frontier
    remaining = frontier - hit
    if remaining:
        return remaining
    restart = automaton.full_frontier - hit
    return restart if restart else automaton.full_frontier


def accepts_lasso(automaton: LDBA, lasso: Lasso) -> bool:
    """
    Decide whether some run of the automaton on the lasso word is accepting.

    Nodes are (position, state). Reading a letter advances the position,
    epsilon moves keep it. The word is accepted when a reachable non-trivial
    SCC contains a state of every accepting set.
    """
    graph = nx.DiGraph()
    start = (0, automaton.initial)
    graph.add_node(start)
    pending = [start]
    while pending:
        node = pending.pop()
        position, q = node
        successors = [(lasso.successor(position), step(automaton, q, lasso.letter(position)))]
        successors.extend((position, nxt) for nxt in automaton.eps[q])
        for nxt in successors:
            if nxt not in graph:
                pending.append(nxt)
            graph.add_edge(node, nxt)
    for component in nx.strongly_connected_components(graph):
        if len(component) == 1:
            (only,) = component
            if not graph.has_edge(only, only):
                continue
        states = {q for _, q in component}
        if all(states & members for members in automaton.acc):
            return True
    return False
