"""
Run Manifest Model
Everything needed to reproduce a learn/verify/simulate run
"""
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from specsynth.models.envs import GridCase
from specsynth.models.learning import LearnConfig


class RunManifest(BaseModel):
    """Exactly one of model/env, and an automaton or a formula with a shipped automaton"""
    command: str = "learn"
    model: Optional[str] = Field(default=None, description="Path of a PL-MDP model file")
    env: Optional[str] = Field(default=None, description="Name or path of an environment spec")
    case: GridCase = GridCase.I
    automaton: Optional[str] = None
    formula: Optional[str] = None
    config: LearnConfig = Field(default_factory=LearnConfig)
    out: str

    @model_validator(mode="after")
    def check_sources(self) -> "RunManifest":
        if (self.model is None) == (self.env is None):
            raise ValueError("exactly one of model and env must be given")
        if self.automaton is None and self.formula is None:
            raise ValueError("an automaton or a formula is required")
        return self

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")
