"""
Verification Models
End components, policy-induced chain decompositions and verifier reports
"""
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class EndComponent(BaseModel):
    """States plus, per state, the local action indices that stay inside"""
    states: frozenset
    actions: Dict[int, Tuple[int, ...]]

    def hits(self, accepting: List[frozenset]) -> List[int]:
        """Indices j whose product accepting set meets this component"""
        return [j for j, members in enumerate(accepting) if self.states & members]


class RecurrentClass(BaseModel):
    states: List[int]
    accepting_sets: List[int] = Field(default_factory=list, description="Indices j of the sets F_j the class meets")
    accepting: bool = False
    probability: float = Field(default=0.0, description="Probability of absorption from the initial distribution")


class ChainDecomposition(BaseModel):
    transient: List[int] = Field(default_factory=list)
    classes: List[RecurrentClass] = Field(default_factory=list)


class MaxSatisfaction(BaseModel):
    """Maximal probability of reaching an accepting end component, with an optimal memoryless policy"""
    values: np.ndarray
    actions: List[int] = Field(..., description="Optimal local action index per product state")
    initial_probability: float
    sweeps: int
    amec_count: int

    model_config = ConfigDict(arbitrary_types_allowed=True)


class PolicyEvaluation(BaseModel):
    probability: float
    chain: ChainDecomposition
    fallback_states: List[int] = Field(default_factory=list, description="Reachable states not covered by the policy")

    @property
    def closeness(self) -> int:
        return max((len(c.accepting_sets) for c in self.chain.classes), default=0)


class ClassSummary(BaseModel):
    size: int
    accepting_sets: List[int]
    accepting: bool
    probability: float


class VerificationReport(BaseModel):
    """Content of report.json written by the verify command"""
    model: Optional[str] = None
    automaton: Optional[str] = None
    product_states: int
    mec_count: int
    amec_count: int
    max_prob: float
    policy_prob: Optional[float] = None
    closeness: Optional[int] = None
    max_closeness: int
    fallback_states: int = 0
    recurrent_class_summary: List[ClassSummary] = Field(default_factory=list)


class CrossCheckResult(BaseModel):
    """Formula semantics against automaton acceptance on random lassos"""
    formula: str
    automaton: Optional[str] = None
    agree: int
    total: int
    disagreements: List[dict] = Field(default_factory=list, description="Up to ten lassos the two sides judge differently")

    @property
    def ok(self) -> bool:
        return self.agree == self.total

    def summary(self) -> str:
        return f"{self.agree}/{self.total} agree"
