"""
Learning Models
Learning configuration, the Q-table, greedy policies, learning curves and traces
"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from specsynth.models.product import ProductState


class LearnConfig(BaseModel):
    """Parameters of one Q-learning run"""
    gamma: float = Field(default=0.99, ge=0.0, le=1.0, description="Discount factor")
    reward: float = Field(default=1.0, gt=0.0, description="Reward for reaching the accepting frontier")
    tau: int = Field(default=100, ge=1, description="Episode horizon in iterations")
    max_episodes: int = Field(default=10_000, ge=1)
    window: int = Field(default=1000, ge=1, description="Convergence window W in episodes")
    tolerance: float = Field(default=1e-3, gt=0.0, description="Largest Q change tolerated inside the window")
    seed: Optional[int] = Field(default=0, description="Root seed of the env, labels and learner streams")
    reset_frontier_per_episode: bool = Field(default=True, description="Restart the frontier at every episode")
    epsilon_floor: float = Field(default=0.01, ge=0.0, le=1.0, description="Lower bound of epsilon = 1/episode")
    q_init: float = Field(default=0.0, description="Initial value of unvisited Q entries")
    preread_initial_label: bool = False
    record_stride: Optional[int] = Field(default=None, ge=1, description="Curve recording stride; settings default when unset")
    check_time_invariance: bool = Field(default=False, description="Fail when a state is revisited under another frontier")


class QTable:
    """
    Lazily grown action values Q(s, a) and visit counts C(s, a).

    Rows are lists indexed like ProductMDP.enabled_actions(s).
    """

    def __init__(self, q_init: float = 0.0):
        self.q_init = q_init
        self.values: Dict[ProductState, List[float]] = {}
        self.counts: Dict[ProductState, List[int]] = {}
        self.actions: Dict[ProductState, Tuple[str, ...]] = {}

    def row(self, s: ProductState, actions: Tuple[str, ...]) -> List[float]:
        values = self.values.get(s)
        if values is None:
            values = self.values[s] = [self.q_init] * len(actions)
            self.counts[s] = [0] * len(actions)
            self.actions[s] = actions
        return values

    def q(self, s: ProductState, action: str) -> float:
        if s not in self.values:
            return self.q_init
        return self.values[s][self.actions[s].index(action)]

    def count(self, s: ProductState, action: str) -> int:
        if s not in self.counts:
            return 0
        return self.counts[s][self.actions[s].index(action)]

    def value(self, s: ProductState) -> float:
        """U(s) = max_a Q(s, a)"""
        if s not in self.values:
            return self.q_init
        return max(self.values[s])

    def visited(self, s: ProductState) -> bool:
        return s in self.counts and any(self.counts[s])

    def __len__(self) -> int:
        return len(self.values)


class Policy(BaseModel):
    """Greedy product policy; fallback lists states whose action is a default choice"""
    actions: Dict[ProductState, str] = Field(default_factory=dict)
    fallback: frozenset = Field(default=frozenset(), description="States mapped to their first action without evidence")
    automaton: Optional[str] = None
    preread_initial_label: bool = False

    def get(self, s: ProductState) -> Optional[str]:
        return self.actions.get(s)

    def __len__(self) -> int:
        return len(self.actions)


class CurvePoint(BaseModel):
    episode: int = Field(..., ge=1)
    u_s0: float


class LearningCurve(BaseModel):
    points: List[CurvePoint] = Field(default_factory=list)
    episodes: int = Field(default=0, ge=0, description="Episodes actually run")
    converged: bool = False

    @property
    def values(self) -> List[float]:
        return [p.u_s0 for p in self.points]


class TraceStep(BaseModel):
    x: int
    label: List[str]
    q: int
    action: Optional[str] = None
    fallback: bool = False


class FrontierEvent(BaseModel):
    step: int = Field(..., description="Index of the step that reached the frontier")
    q: int
    frontier: List[int] = Field(..., description="Accepting set indices still owed after the visit")


class Trace(BaseModel):
    """A finite run x0 l0 a0 x1 l1 a1 ... of the policy on the model"""
    steps: List[TraceStep] = Field(default_factory=list)
    events: List[FrontierEvent] = Field(default_factory=list)

    @property
    def cells(self) -> List[int]:
        return [s.x for s in self.steps]
