"""
Cross-Check Service
Compares a formula with an automaton on seeded random lasso words
"""
import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from specsynth.models.automaton import LDBA
from specsynth.models.formula import Formula, Lasso
from specsynth.models.report import CrossCheckResult
from specsynth.services.automaton import accepts_lasso
from specsynth.services.ltl import holds_on_lasso, to_text

logger = logging.getLogger(__name__)

MAX_REPORTED = 10


def random_lasso(rng: np.random.Generator, ap: Sequence[str], max_prefix: int = 6, max_period: int = 6) -> Lasso:
    """
    Draw prefix and period lengths uniformly, then each letter atom by atom.

    Every lasso gets its own atom density in [0.1, 0.9], so both sparse and
    dense words show up (dense ones satisfy liveness more often, sparse ones
    safety).
    """
    density = rng.uniform(0.1, 0.9)
    prefix_len = int(rng.integers(0, max_prefix + 1))
    period_len = int(rng.integers(1, max_period + 1))

    def letter() -> frozenset:
        return frozenset(a for a in ap if rng.random() < density)

    return Lasso(
        prefix=[letter() for _ in range(prefix_len)],
        period=[letter() for _ in range(period_len)],
    )


def _describe(lasso: Lasso) -> dict:
    return {
        "prefix": [sorted(letter) for letter in lasso.prefix],
        "period": [sorted(letter) for letter in lasso.period],
    }


def cross_validate(
    formula: Formula,
    automaton: LDBA,
    n: int = 1000,
    seed: Optional[int] = 0,
    ap: Optional[Iterable[str]] = None,
) -> CrossCheckResult:
    """
    Count lassos on which holds_on_lasso and accepts_lasso agree.

    Args:
        formula: Parsed LTL formula
        automaton: Automaton claimed to recognise the formula
        n: Number of lassos
        seed: Seed of the lasso generator
        ap: Atoms to draw letters over (automaton AP by default)

    Returns:
        CrossCheckResult with the agreement count and a sample of disagreements
    """
    rng = np.random.default_rng(seed)
    alphabet = sorted(ap) if ap is not None else sorted(automaton.ap)
    agree = 0
    disagreements = []
    for _ in range(n):
        lasso = random_lasso(rng, alphabet)
        expected = holds_on_lasso(formula, lasso, alphabet)
        actual = accepts_lasso(automaton, lasso)
        if expected == actual:
            agree += 1
        elif len(disagreements) < MAX_REPORTED:
            disagreements.append({**_describe(lasso), "formula": expected, "automaton": actual})

    result = CrossCheckResult(
        formula=to_text(formula), automaton=automaton.name, agree=agree, total=n, disagreements=disagreements
    )
    if result.ok:
        logger.info("Cross-check %s vs %s: %s", result.formula, automaton.name, result.summary())
    else:
        logger.warning("Cross-check %s vs %s: %s", result.formula, automaton.name, result.summary())
    return result
