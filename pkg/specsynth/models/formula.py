"""
Formula Model
LTL syntax tree nodes and ultimately periodic (lasso) words
"""
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Formula(BaseModel):
    """Base class of every syntax-tree node; nodes are immutable and compare structurally"""

    model_config = ConfigDict(frozen=True)


class TrueFormula(Formula):
    pass


class Atom(Formula):
    name: str = Field(..., description="Atomic proposition")


class Not(Formula):
    operand: Formula


class And(Formula):
    left: Formula
    right: Formula


class Or(Formula):
    left: Formula
    right: Formula


class Next(Formula):
    operand: Formula


class Until(Formula):
    left: Formula
    right: Formula


class Eventually(Formula):
    operand: Formula


class Always(Formula):
    operand: Formula


BINARY = (And, Or, Until)
TEMPORAL = (Next, Until, Eventually, Always)


class Lasso(BaseModel):
    """
    The infinite word prefix . period^omega
    Positions 0..len(prefix)+len(period)-1; the last one is followed by position len(prefix)
    """
    prefix: Tuple[frozenset[str], ...] = Field(default=(), description="Finite stem")
    period: Tuple[frozenset[str], ...] = Field(..., min_length=1, description="Repeated loop")

    model_config = ConfigDict(frozen=True)

    @field_validator("prefix", "period", mode="before")
    @classmethod
    def _coerce_letters(cls, value):
        return tuple(frozenset(letter) for letter in value)

    @property
    def size(self) -> int:
        return len(self.prefix) + len(self.period)

    def letter(self, position: int) -> frozenset[str]:
        if position < len(self.prefix):
            return self.prefix[position]
        return self.period[position - len(self.prefix)]

    def successor(self, position: int) -> int:
        nxt = position + 1
        return nxt if nxt < self.size else len(self.prefix)
