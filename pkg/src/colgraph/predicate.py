"""Edge predicate parsing and evaluation.

Grammar (NOT binds tighter than AND, AND tighter than OR)::

    expr   := term (OR term)*
    term   := factor (AND factor)*
    factor := NOT factor | '(' expr ')' | atom | '*'
    atom   := attr op literal       op in  = != < <= > >=

Unicode connectives (and-sign, or-sign, negation sign) and their ASCII
keywords and/or/not are both accepted. '*' is the constant TRUE.
Evaluation produces the per-query active-edge list: a bitset over edge
positions with one bit per edge satisfying the predicate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import PredicateSyntaxError, UnknownAttributeError
from .storage import EdgeColumnGroup

_OPS = ("<=", ">=", "!=", "=", "<", ">", "≤", "≥", "≠")
_OP_CANON = {"≤": "<=", "≥": ">=", "≠": "!="}


@dataclass(frozen=True)
class Atom:
    attr: str
    op: str
    literal: str


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


class TrueConst:
    def __repr__(self):
        return "TrueConst"

    def __eq__(self, other):
        return isinstance(other, TrueConst)

    def __hash__(self):
        return hash("TrueConst")


@dataclass(frozen=True)
class Predicate:
    root: object
    text: str

    def attributes(self) -> set:
        out = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Atom):
                out.add(node.attr)
            elif isinstance(node, Not):
                stack.append(node.child)
            elif isinstance(node, (And, Or)):
                stack.extend((node.left, node.right))
        return out


_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<lpar>\()|(?P<rpar>\))|
        (?P<star>\*)|
        (?P<op><=|>=|!=|=|<|>|≤|≥|≠)|
        (?P<and>∧|\band\b)|(?P<or>∨|\bor\b)|(?P<not>¬|\bnot\b)|
        (?P<quoted>'[^']*'|"[^"]*")|
        (?P<word>[^\s()<>=!≤≥≠∧∨¬]+)
    )""",
    re.VERBOSE | re.IGNORECASE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            raise PredicateSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] == "or":
            self.advance()
            node = Or(node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "and":
            self.advance()
            node = And(node, self.factor())
        return node

    def factor(self):
        kind, value, offset = self.peek()
        if kind == "not":
            self.advance()
            return Not(self.factor())
        if kind == "lpar":
            self.advance()
            node = self.expr()
            kind, _, offset = self.advance()
            if kind != "rpar":
                raise PredicateSyntaxError("expected ')'", offset)
            return node
        if kind == "star":
            self.advance()
            return TrueConst()
        if kind in ("word", "quoted"):
            return self.atom()
        raise PredicateSyntaxError(f"unexpected token {value!r}", offset)

    def atom(self):
        kind, attr, offset = self.advance()
        if kind != "word":
            raise PredicateSyntaxError("attribute name expected", offset)
        kind, op, offset = self.advance()
        if kind != "op":
            raise PredicateSyntaxError("comparison operator expected", offset)
        kind, literal, offset = self.advance()
        if kind == "quoted":
            literal = literal[1:-1]
        elif kind != "word":
            raise PredicateSyntaxError("comparison literal expected", offset)
        return Atom(attr, _OP_CANON.get(op, op), literal)


def parse(text: str) -> Predicate:
    """Parse predicate text into an AST."""
    parser = _Parser(_tokenize(text))
    root = parser.expr()
    kind, value, offset = parser.peek()
    if kind != "end":
        raise PredicateSyntaxError(f"trailing input {value!r}", offset)
    return Predicate(root, text)


@dataclass
class ActiveEdgeList:
    """Per-query validity bitset over edge positions; 1 = active."""

    bits: np.ndarray

    def __len__(self):
        return len(self.bits)

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def copy(self) -> "ActiveEdgeList":
        return ActiveEdgeList(self.bits.copy())


def _compare(stored: str, op: str, literal: str) -> bool:
    """Numeric comparison when both sides parse as decimals, else string."""
    try:
        left, right = float(stored), float(literal)
    except ValueError:
        left, right = stored, literal
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def _atom_value_mask(atom: Atom, g: EdgeColumnGroup) -> np.ndarray:
    """Truth of the atom per dictionary code of the referenced column."""
    col = g.attributes[atom.attr]
    return np.fromiter(
        (_compare(v, atom.op, atom.literal) for v in col.dictionary.values),
        dtype=bool, count=len(col.dictionary))


def _eval_rows(node, g: EdgeColumnGroup, n: int) -> np.ndarray:
    if isinstance(node, TrueConst):
        return np.ones(n, dtype=bool)
    if isinstance(node, Atom):
        col = g.attributes[node.attr]
        by_code = _atom_value_mask(node, g)
        out = np.zeros(n, dtype=bool)
        mask = col.present_mask()
        out[mask] = by_code[col.codes[mask]]
        return out
    if isinstance(node, Not):
        return ~_eval_rows(node.child, g, n)
    if isinstance(node, And):
        return _eval_rows(node.left, g, n) & _eval_rows(node.right, g, n)
    if isinstance(node, Or):
        return _eval_rows(node.left, g, n) | _eval_rows(node.right, g, n)
    raise TypeError(f"unknown predicate node {node!r}")


def _eval_type_value(node, type_value: str) -> bool:
    if isinstance(node, TrueConst):
        return True
    if isinstance(node, Atom):
        return _compare(type_value, node.op, node.literal)
    if isinstance(node, Not):
        return not _eval_type_value(node.child, type_value)
    if isinstance(node, And):
        return (_eval_type_value(node.left, type_value)
                and _eval_type_value(node.right, type_value))
    if isinstance(node, Or):
        return (_eval_type_value(node.left, type_value)
                or _eval_type_value(node.right, type_value))
    raise TypeError(f"unknown predicate node {node!r}")


def evaluate(p: Predicate, g: EdgeColumnGroup,
             visibility: ActiveEdgeList | None = None) -> ActiveEdgeList:
    """Evaluate the predicate over all edges, intersected with visibility.

    When the predicate touches only the type attribute and the group is
    type-clustered, whole type ranges are set instead of scanning rows
    (disjunctions simply union several ranges).
    """
    attrs = p.attributes()
    for attr in attrs:
        if attr not in g.attributes:
            raise UnknownAttributeError(f"unknown edge attribute {attr!r}")
    n = g.edge_count

    if attrs <= {"type"} and g.type_ranges is not None and attrs:
        bits = np.zeros(n, dtype=bool)
        type_dict = g.attributes["type"].dictionary
        for code, (start, end) in g.type_ranges.items():
            if _eval_type_value(p.root, type_dict.decode(code)):
                bits[start:end] = True
    else:
        bits = _eval_rows(p.root, g, n)

    if visibility is not None:
        bits &= visibility.bits
    return ActiveEdgeList(bits)
