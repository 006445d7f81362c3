"""
Automaton Model
LDBA file documents and the compiled runtime automaton
"""
from enum import Enum
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from specsynth.models.formula import Formula

# The accepting frontier is carried as the set of indices j of the accepting sets F_j it contains.
AcceptingFrontier = frozenset


class StatePart(str, Enum):
    """Partition tag: nondeterministic initial part or deterministic accepting part"""
    N = "N"
    D = "D"


class EdgeDocument(BaseModel):
    source: int = Field(..., alias="from", ge=0)
    guard: str = Field(..., description="Propositional formula over ap")
    to: int = Field(..., ge=0)

    model_config = ConfigDict(populate_by_name=True)


class EpsilonDocument(BaseModel):
    source: int = Field(..., alias="from", ge=0)
    to: int = Field(..., ge=0)

    model_config = ConfigDict(populate_by_name=True)


class LDBADocument(BaseModel):
    """Schema of a .ldba file"""
    name: Optional[str] = Field(None, description="Short name, e.g. phi1")
    formula: Optional[str] = Field(None, description="LTL formula the automaton recognizes")
    ap: List[str] = Field(..., description="Atomic propositions")
    states: int = Field(..., ge=1, description="Number of declared states")
    initial: int = Field(..., ge=0)
    part: List[StatePart] = Field(..., description="N/D tag per state")
    edges: List[EdgeDocument] = Field(default_factory=list)
    eps: List[EpsilonDocument] = Field(default_factory=list)
    acc: List[List[int]] = Field(..., min_length=1, description="Accepting sets F_1..F_f")

    model_config = ConfigDict(populate_by_name=True)

    def to_dict(self) -> dict:
        return self.model_dump(by_alias=True, exclude_none=True, mode="json")


class Guard(NamedTuple):
    text: str
    formula: Formula
    to: int


def all_labels(ap) -> List[frozenset]:
    """Every subset of ap, smallest first"""
    ap = sorted(ap)
    return [frozenset(c) for size in range(len(ap) + 1) for c in combinations(ap, size)]


class LDBA:
    """
    Validated automaton with the rejecting sink materialized as the last state.

    Built by specsynth.services.automaton.load_ldba; treat as immutable.
    """

    def __init__(
        self,
        ap: Tuple[str, ...],
        declared_states: int,
        initial: int,
        part: Tuple[StatePart, ...],
        guards: Tuple[Tuple[Guard, ...], ...],
        eps: Tuple[Tuple[int, ...], ...],
        acc: Tuple[frozenset, ...],
        name: Optional[str] = None,
        formula: Optional[str] = None,
    ):
        self.ap = ap
        self.declared_states = declared_states
        self.sink = declared_states
        self.n_states = declared_states + 1
        self.initial = initial
        self.part = part
        self.guards = guards
        self.eps = eps
        self.acc = acc
        self.name = name
        self.formula = formula
        self.membership: Tuple[frozenset, ...] = tuple(
            frozenset(j for j, members in enumerate(acc) if q in members) for q in range(self.n_states)
        )
        self._table: Dict[Tuple[int, frozenset], int] = {}

    @property
    def f(self) -> int:
        """Number of accepting sets"""
        return len(self.acc)

    @property
    def full_frontier(self) -> AcceptingFrontier:
        return frozenset(range(len(self.acc)))

    def __repr__(self) -> str:
        return f"LDBA(name={self.name!r}, states={self.declared_states}, f={self.f})"
