"""
LTL Service
Parsing, printing and lasso-word evaluation of LTL formulas
"""
from typing import Iterable, List, Optional

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from specsynth.errors import LTLSyntaxError, UndeclaredAtomError
from specsynth.models.formula import (
    BINARY,
    TEMPORAL,
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Lasso,
    Next,
    Not,
    Or,
    TrueFormula,
    Until,
)

# Precedence, loosest first: |  &  U  unary. U associates to the right.
GRAMMAR = r"""
?start: disj

?disj: disj "|" conj      -> or_
     | conj

?conj: conj "&" until     -> and_
     | until

?until: unary "U" until   -> until_
      | unary

?unary: "!" unary         -> not_
      | "X" unary         -> next_
      | "F" unary         -> eventually
      | "G" unary         -> always
      | primary

?primary: "true"          -> true
        | NAME            -> atom
        | "(" disj ")"

// Exact matches of X, F, G, U and true lex as keywords, so operators need a
// separating space or parenthesis next to a name.
NAME: /[A-Za-z_][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""


@v_args(inline=True)
class FormulaBuilder(Transformer):
    """Turns the parse tree into Formula nodes"""

    def true(self):
        return TrueFormula()

    def atom(self, token):
        return Atom(name=str(token))

    def not_(self, operand):
        return Not(operand=operand)

    def next_(self, operand):
        return Next(operand=operand)

    def eventually(self, operand):
        return Eventually(operand=operand)

    def always(self, operand):
        return Always(operand=operand)

    def and_(self, left, right):
        return And(left=left, right=right)

    def or_(self, left, right):
        return Or(left=left, right=right)

    def until_(self, left, right):
        return Until(left=left, right=right)


_parser = Lark(GRAMMAR, parser="lalr", transformer=FormulaBuilder())


def parse_ltl(text: str) -> Formula:
    """
    Parse formula text into a syntax tree.

    Args:
        text: Formula using true, !, &, |, X, U, F, G and parentheses

    Returns:
        Formula: Root node

    Raises:
        LTLSyntaxError: On unknown tokens or malformed input
    """
    try:
        return _parser.parse(text)
    except UnexpectedCharacters as exc:
        raise LTLSyntaxError(f"Unknown token {text[exc.pos_in_stream]!r}", exc.line, exc.column) from exc
    except UnexpectedEOF as exc:
        raise LTLSyntaxError("Unexpected end of formula") from exc
    except UnexpectedToken as exc:
        if exc.token.type == "$END":
            raise LTLSyntaxError("Unexpected end of formula") from exc
        raise LTLSyntaxError(f"Unexpected {exc.token.value!r}", exc.line, exc.column) from exc
    except UnexpectedInput as exc:
        raise LTLSyntaxError(f"Syntax error: {exc.get_context(text).strip()}", exc.line, exc.column) from exc


_SYMBOLS = {Not: "!", Next: "X", Eventually: "F", Always: "G", And: "&", Or: "|", Until: "U"}


def to_text(formula: Formula) -> str:
    """Print a formula so that parse_ltl(to_text(f)) == f. Binary operators are always parenthesized."""
    if isinstance(formula, TrueFormula):
        return "true"
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, BINARY):
        return f"({to_text(formula.left)} {_SYMBOLS[type(formula)]} {to_text(formula.right)})"
    inner = to_text(formula.operand)
    if not isinstance(formula.operand, (TrueFormula, Atom) + BINARY):
        inner = f"({inner})"
    return f"{_SYMBOLS[type(formula)]} {inner}"


def atoms(formula: Formula) -> frozenset[str]:
    if isinstance(formula, Atom):
        return frozenset([formula.name])
    if isinstance(formula, TrueFormula):
        return frozenset()
    if isinstance(formula, BINARY):
        return atoms(formula.left) | atoms(formula.right)
    return atoms(formula.operand)


def is_propositional(formula: Formula) -> bool:
    if isinstance(formula, TEMPORAL):
        return False
    if isinstance(formula, (Atom, TrueFormula)):
        return True
    if isinstance(formula, BINARY):
        return is_propositional(formula.left) and is_propositional(formula.right)
    return is_propositional(formula.operand)


def evaluate_label(formula: Formula, label: frozenset[str]) -> bool:
    """Evaluate a propositional formula (an automaton guard) on one label-set"""
    if isinstance(formula, TrueFormula):
        return True
    if isinstance(formula, Atom):
        return formula.name in label
    if isinstance(formula, Not):
        return not evaluate_label(formula.operand, label)
    if isinstance(formula, And):
        return evaluate_label(formula.left, label) and evaluate_label(formula.right, label)
    if isinstance(formula, Or):
        return evaluate_label(formula.left, label) or evaluate_label(formula.right, label)
    raise ValueError(f"Temporal operator {type(formula).__name__} in a propositional context")


def expand_sugar(formula: Formula) -> Formula:
    """Rewrite F, G and | into the core grammar (true, atoms, !, &, X, U)"""
    if isinstance(formula, (TrueFormula, Atom)):
        return formula
    if isinstance(formula, Eventually):
        return Until(left=TrueFormula(), right=expand_sugar(formula.operand))
    if isinstance(formula, Always):
        return Not(operand=Until(left=TrueFormula(), right=Not(operand=expand_sugar(formula.operand))))
    if isinstance(formula, Or):
        return Not(operand=And(
            left=Not(operand=expand_sugar(formula.left)),
            right=Not(operand=expand_sugar(formula.right)),
        ))
    if isinstance(formula, BINARY):
        return type(formula)(left=expand_sugar(formula.left), right=expand_sugar(formula.right))
    return type(formula)(operand=expand_sugar(formula.operand))


def _fixpoint(lasso: Lasso, start: bool, step) -> List[bool]:
    # Each round propagates along the successor chain; |positions| + 1 rounds always suffice.
    values = [start] * lasso.size
    for _ in range(lasso.size + 1):
        updated = [step(i, values[lasso.successor(i)]) for i in range(lasso.size)]
        if updated == values:
            break
        values = updated
    return values


def _valuation(formula: Formula, lasso: Lasso) -> List[bool]:
    n = lasso.size
    if isinstance(formula, TrueFormula):
        return [True] * n
    if isinstance(formula, Atom):
        return [formula.name in lasso.letter(i) for i in range(n)]
    if isinstance(formula, Not):
        return [not v for v in _valuation(formula.operand, lasso)]
    if isinstance(formula, And):
        left, right = _valuation(formula.left, lasso), _valuation(formula.right, lasso)
        return [a and b for a, b in zip(left, right)]
    if isinstance(formula, Or):
        left, right = _valuation(formula.left, lasso), _valuation(formula.right, lasso)
        return [a or b for a, b in zip(left, right)]
    if isinstance(formula, Next):
        inner = _valuation(formula.operand, lasso)
        return [inner[lasso.successor(i)] for i in range(n)]
    if isinstance(formula, Until):
        left, right = _valuation(formula.left, lasso), _valuation(formula.right, lasso)
        return _fixpoint(lasso, False, lambda i, nxt: right[i] or (left[i] and nxt))
    if isinstance(formula, Eventually):
        inner = _valuation(formula.operand, lasso)
        return _fixpoint(lasso, False, lambda i, nxt: inner[i] or nxt)
    if isinstance(formula, Always):
        inner = _valuation(formula.operand, lasso)
        return _fixpoint(lasso, True, lambda i, nxt: inner[i] and nxt)
    raise TypeError(f"Unknown formula node {type(formula).__name__}")


def holds_on_lasso(formula: Formula, lasso: Lasso, ap: Optional[Iterable[str]] = None) -> bool:
    """
    Decide whether prefix . period^omega satisfies the formula.

    Args:
        formula: Formula to check
        lasso: Ultimately periodic word
        ap: Declared alphabet; when given, every atom of the formula must belong to it

    Returns:
        bool: Truth value at position 0

    Raises:
        UndeclaredAtomError: If ap is given and the formula uses an atom outside it
    """
    if ap is not None:
        undeclared = atoms(formula) - frozenset(ap)
        if undeclared:
            raise UndeclaredAtomError(f"Atoms not in the alphabet: {sorted(undeclared)}")
    return _valuation(formula, lasso)[0]
