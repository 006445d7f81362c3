"""
Product Model
Product states, reward settings and the enumerated product used by the verifier
"""
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr


class ProductState(NamedTuple):
    x: int
    label: frozenset
    q: int

    def key(self) -> dict:
        return {"x": self.x, "label": sorted(self.label), "q": self.q}


class RewardConfig(BaseModel):
    reward: float = Field(default=1.0, gt=0, description="Reward r for reaching the frontier")
    gamma: float = Field(default=0.99, ge=0.0, le=1.0, description="Discount factor")


class ExplicitProduct(BaseModel):
    """
    Fully enumerated product MDP.

    Choice rows row_start[i]..row_start[i+1]-1 of matrix belong to states[i],
    one row per entry of actions[i], in the same order.
    """
    states: List[ProductState]
    actions: List[Tuple[str, ...]]
    row_start: np.ndarray = Field(..., description="Row-group offsets, length len(states)+1")
    matrix: sp.csr_matrix = Field(..., description="Choice rows x states transition probabilities")
    initial: Dict[int, float] = Field(..., description="Initial distribution over state indices")
    accepting: List[frozenset] = Field(..., description="State indices of each product accepting set")
    sink_states: frozenset = Field(default=frozenset(), description="States whose automaton part is a sink")
    automaton: Optional[str] = None
    preread_initial_label: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True)

    _index: Optional[Dict[ProductState, int]] = PrivateAttr(default=None)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def index(self) -> Dict[ProductState, int]:
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.states)}
        return self._index

    def rows(self, i: int) -> range:
        return range(int(self.row_start[i]), int(self.row_start[i + 1]))

    def successors(self, row: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self.matrix.indptr[row], self.matrix.indptr[row + 1]
        return self.matrix.indices[lo:hi], self.matrix.data[lo:hi]
