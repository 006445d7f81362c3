"""
PL-MDP Model
Model file documents and the compiled runtime model
"""
from bisect import bisect_right
from typing import Dict, List, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

PROBABILITY_TOLERANCE = 1e-9


class OutcomeDocument(BaseModel):
    to: int = Field(..., ge=0, description="Successor state")
    p: float = Field(..., ge=0.0, le=1.0)


class TransitionDocument(BaseModel):
    x: int = Field(..., ge=0)
    a: str = Field(..., description="Action name")
    dist: List[OutcomeDocument] = Field(..., min_length=1)


class LabelOutcomeDocument(BaseModel):
    labels: List[str] = Field(..., alias="set", description="Observed label-set")
    p: float = Field(..., ge=0.0, le=1.0)

    model_config = ConfigDict(populate_by_name=True)


class LabelDocument(BaseModel):
    x: int = Field(..., ge=0)
    dist: List[LabelOutcomeDocument] = Field(..., min_length=1)


class PLMDPDocument(BaseModel):
    """Schema of a model file"""
    name: Optional[str] = None
    states: int = Field(..., ge=1)
    initial: int = Field(..., ge=0)
    ap: List[str] = Field(default_factory=list)
    actions: List[List[str]] = Field(..., description="Enabled action names per state")
    trans: List[TransitionDocument]
    labels: List[LabelDocument]

    def to_dict(self) -> dict:
        return self.model_dump(by_alias=True, exclude_none=True, mode="json")


class Distribution(NamedTuple):
    """Finite distribution sampled by inverse CDF in listed order"""
    support: tuple
    probs: Tuple[float, ...]
    cdf: Tuple[float, ...]

    @classmethod
    def of(cls, support, probs) -> "Distribution":
        cdf, total = [], 0.0
        for p in probs:
            total += p
            cdf.append(total)
        return cls(tuple(support), tuple(probs), tuple(cdf))

    def sample(self, u: float):
        """Map a uniform draw u in [0, 1) to an outcome"""
        index = bisect_right(self.cdf, u * self.cdf[-1])
        return self.support[min(index, len(self.support) - 1)]

    def as_dict(self) -> dict:
        merged: Dict = {}
        for outcome, p in zip(self.support, self.probs):
            merged[outcome] = merged.get(outcome, 0.0) + p
        return merged


class PLMDP:
    """
    Validated probabilistically-labeled MDP.

    transitions[x][i] is the successor distribution of the i-th enabled action
    of x; labels[x] is the distribution over frozenset label-sets.
    """

    def __init__(
        self,
        n_states: int,
        initial: int,
        ap: Tuple[str, ...],
        actions: Tuple[Tuple[str, ...], ...],
        transitions: Tuple[Tuple[Distribution, ...], ...],
        labels: Tuple[Distribution, ...],
        name: Optional[str] = None,
    ):
        self.n_states = n_states
        self.initial = initial
        self.ap = ap
        self.actions = actions
        self.transitions = transitions
        self.labels = labels
        self.name = name
        self.action_index: Tuple[Dict[str, int], ...] = tuple(
            {a: i for i, a in enumerate(names)} for names in actions
        )

    def __repr__(self) -> str:
        return f"PLMDP(name={self.name!r}, states={self.n_states}, ap={list(self.ap)})"
