"""
Environment Spec Models
Layouts of the gridworld and Pacman environments as stored in .spec files
"""
from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field

from specsynth.models.plmdp import LabelOutcomeDocument

Cell = Tuple[int, int]


class GridCase(str, Enum):
    """Case I: deterministic moves. Case II: noisy moves"""
    I = "I"
    II = "II"


class CellLabels(BaseModel):
    cell: Cell = Field(..., description="(x, y), y growing downwards")
    dist: List[LabelOutcomeDocument] = Field(..., min_length=1)


class GridSpec(BaseModel):
    """Gridworld layout; cells not listed observe the empty label"""
    kind: Literal["grid"] = "grid"
    name: Optional[str] = None
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    start: Cell = (0, 0)
    noise: Optional[float] = Field(
        default=None, gt=0.0, le=1.0,
        description="Probability of the intended move in case II (0.8 when unset)"
    )
    ap: List[str] = Field(default_factory=lambda: ["obs", "target1", "target2", "user"])
    cells: List[CellLabels] = Field(default_factory=list)


class PacmanSpec(BaseModel):
    kind: Literal["pacman"] = "pacman"
    name: Optional[str] = None
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    walls: List[Cell] = Field(default_factory=list)
    pacman_start: Cell = (0, 0)
    ghost_starts: List[Cell] = Field(..., min_length=1, description="One entry per ghost")
    food1: Cell
    food2: Cell
    food_probability: float = Field(default=0.9, gt=0.0, le=1.0, description="Chance of observing food on its cell")
    p_g: float = Field(default=0.9, ge=0.0, le=1.0, description="Chance that a ghost chases")


EnvSpec = Annotated[Union[GridSpec, PacmanSpec], Field(discriminator="kind")]
