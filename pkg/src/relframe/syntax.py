"""Predicate terms: AST, parser, printer and desugaring.

The core signature has atoms, the identity constant ``1'``, join ``+``,
complement ``-``, relative product ``;`` and converse ``^``.  Everything
else (meet, dagger, the constants 0, 1, 0', and the relevance operators)
is kept in the tree as written and only expanded by :func:`desugar`.

Concrete syntax, loosest binding first::

    ->            implication
    +  |          join, disjunction
    !             relative sum (dagger)
    &  .          conjunction, meet
    ;  o          relative product, fusion
    -X ~X not X   complement, De Morgan negation, Boolean negation
    X^ X*         converse, Routley star

All binary operators associate to the left.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator


class PredicateSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.text = text


class Term:
    """Base class of predicate terms.  Subclasses are frozen dataclasses."""

    __slots__ = ()

    def children(self) -> tuple["Term", ...]:
        return ()

    def __str__(self) -> str:
        return print_predicate(self)


# ---- core constructors -------------------------------------------------

@dataclass(frozen=True)
class Atom(Term):
    name: str


@dataclass(frozen=True)
class Identity(Term):
    pass


@dataclass(frozen=True)
class Join(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Complement(Term):
    arg: Term

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class RelProd(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Converse(Term):
    arg: Term

    def children(self):
        return (self.arg,)


# ---- derived constructors ----------------------------------------------

@dataclass(frozen=True)
class Meet(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Dagger(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class One(Term):
    pass


@dataclass(frozen=True)
class Diversity(Term):
    pass


@dataclass(frozen=True)
class Or(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class And(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class BoolNeg(Term):
    arg: Term

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class DeMorganNeg(Term):
    arg: Term

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Implies(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Fusion(Term):
    left: Term
    right: Term

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Star(Term):
    arg: Term

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Truth(Term):
    pass


CORE_TYPES = (Atom, Identity, Join, Complement, RelProd, Converse)
BINARY_TYPES = (Join, RelProd, Meet, Dagger, Or, And, Implies, Fusion)
UNARY_TYPES = (Complement, Converse, BoolNeg, DeMorganNeg, Star)
CONSTANT_TYPES = (Identity, Zero, One, Diversity, Truth)


class VocabularyClass(enum.Enum):
    CORE = "core"
    CLASSICAL_RELEVANT = "classical-relevant"
    RELEVANCE_ONLY = "relevance-only"


# ---- desugaring --------------------------------------------------------

def _meet(a: Term, b: Term) -> Term:
    return Complement(Join(Complement(a), Complement(b)))


def _one() -> Term:
    return Join(Identity(), Complement(Identity()))


def desugar(p: Term) -> Term:
    """Rewrite ``p`` into the core signature."""
    if isinstance(p, (Atom, Identity)):
        return p
    if isinstance(p, Join) or isinstance(p, Or):
        return Join(desugar(p.left), desugar(p.right))
    if isinstance(p, Complement) or isinstance(p, BoolNeg):
        return Complement(desugar(p.arg))
    if isinstance(p, RelProd):
        return RelProd(desugar(p.left), desugar(p.right))
    if isinstance(p, Converse) or isinstance(p, Star):
        return Converse(desugar(p.arg))
    if isinstance(p, Meet) or isinstance(p, And):
        return _meet(desugar(p.left), desugar(p.right))
    if isinstance(p, Dagger):
        return Complement(RelProd(Complement(desugar(p.left)),
                                  Complement(desugar(p.right))))
    if isinstance(p, Zero):
        return Complement(_one())
    if isinstance(p, One):
        return _one()
    if isinstance(p, Diversity):
        return Complement(Identity())
    if isinstance(p, DeMorganNeg):
        return Complement(Converse(desugar(p.arg)))
    if isinstance(p, Implies):
        return Complement(RelProd(Converse(desugar(p.left)),
                                  Complement(desugar(p.right))))
    if isinstance(p, Fusion):
        return RelProd(desugar(p.right), desugar(p.left))
    if isinstance(p, Truth):
        return Identity()
    raise TypeError(f"not a predicate term: {p!r}")


def is_core(p: Term) -> bool:
    return isinstance(p, CORE_TYPES) and all(is_core(c) for c in p.children())


# ---- inspection ----------------------------------------------------------

def subterms(p: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    stack = [p]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(t.children()))


def variables_of(p: Term) -> frozenset[str]:
    return frozenset(t.name for t in subterms(p) if isinstance(t, Atom))


def variables_in_order(p: Term) -> list[str]:
    """Atom names in order of first occurrence."""
    seen: dict[str, None] = {}
    for t in subterms(p):
        if isinstance(t, Atom):
            seen.setdefault(t.name, None)
    return list(seen)


_RELEVANCE_OPS = (Atom, Or, And, DeMorganNeg, Implies, Fusion, Truth)
_CLASSICAL_OPS = _RELEVANCE_OPS + (BoolNeg, Star)


def vocabulary_class(p: Term) -> VocabularyClass:
    kinds = {type(t) for t in subterms(p)}
    if all(issubclass(k, _RELEVANCE_OPS) for k in kinds):
        return VocabularyClass.RELEVANCE_ONLY
    if all(issubclass(k, _CLASSICAL_OPS) for k in kinds):
        return VocabularyClass.CLASSICAL_RELEVANT
    return VocabularyClass.CORE


def size(p: Term) -> int:
    return sum(1 for _ in subterms(p))


def substitute(p: Term, mapping: dict[str, Term]) -> Term:
    """Replace atoms by terms, simultaneously."""
    if isinstance(p, Atom):
        return mapping.get(p.name, p)
    kids = p.children()
    if not kids:
        return p
    return type(p)(*(substitute(c, mapping) for c in kids))


# ---- printing ------------------------------------------------------------

# binding strength: higher binds tighter
_BINARY_SYMBOL = {
    Implies: ("->", 1),
    Join: ("+", 2),
    Or: ("|", 2),
    Dagger: ("!", 3),
    Meet: (".", 4),
    And: ("&", 4),
    RelProd: (";", 5),
    Fusion: ("o", 5),
}
_PREFIX_SYMBOL = {Complement: "-", DeMorganNeg: "~", BoolNeg: "not "}
_POSTFIX_SYMBOL = {Converse: "^", Star: "*"}
_CONSTANT_SYMBOL = {Identity: "1'", Truth: "t", Zero: "0", One: "1", Diversity: "0'"}
_PREFIX_LEVEL = 6
_POSTFIX_LEVEL = 7
_ATOMIC_LEVEL = 8


def _level(p: Term) -> int:
    t = type(p)
    if t in _BINARY_SYMBOL:
        return _BINARY_SYMBOL[t][1]
    if t in _PREFIX_SYMBOL:
        return _PREFIX_LEVEL
    if t in _POSTFIX_SYMBOL:
        return _POSTFIX_LEVEL
    return _ATOMIC_LEVEL


def _show(p: Term, need: int) -> str:
    lvl = _level(p)
    t = type(p)
    if t is Atom:
        s = p.name
    elif t in _CONSTANT_SYMBOL:
        s = _CONSTANT_SYMBOL[t]
    elif t in _BINARY_SYMBOL:
        sym = _BINARY_SYMBOL[t][0]
        s = f"{_show(p.left, lvl)} {sym} {_show(p.right, lvl + 1)}"
    elif t in _PREFIX_SYMBOL:
        s = _PREFIX_SYMBOL[t] + _show(p.arg, _PREFIX_LEVEL)
    elif t in _POSTFIX_SYMBOL:
        s = _show(p.arg, _POSTFIX_LEVEL) + _POSTFIX_SYMBOL[t]
    else:
        raise TypeError(f"not a predicate term: {p!r}")
    return f"({s})" if lvl < need else s


def print_predicate(p: Term) -> str:
    return _show(p, 0)


# ---- lexing and parsing ------------------------------------------------

RESERVED = frozenset({"o", "t", "not"})

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<const>1'|0'|1(?![A-Za-z0-9_'])|0(?![A-Za-z0-9_']))
      | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
      | (?P<op>->|[-+|!&.·;~^*()])
    )""",
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, value, position) triples, ending with an 'end' token."""
    out = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise PredicateSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        kind, val = m.lastgroup, m.group(m.lastgroup)
        if kind == "ident" and val in RESERVED:
            kind = "op"
        if val == "·":
            val = "."
        out.append((kind, val, start))
        pos = m.end()
    out.append(("end", "", n))
    return out


_INFIX = {
    "->": (1, Implies),
    "+": (2, Join),
    "|": (2, Or),
    "!": (3, Dagger),
    ".": (4, Meet),
    "&": (4, And),
    ";": (5, RelProd),
    "o": (5, Fusion),
}
_PREFIX = {"-": Complement, "~": DeMorganNeg, "not": BoolNeg}
_POSTFIX = {"^": Converse, "*": Star}
_CONSTS = {"1'": Identity, "0'": Diversity, "1": One, "0": Zero, "t": Truth}


class _Parser:
    def __init__(self, text: str, tokens=None):
        self.text = text
        self.toks = tokens if tokens is not None else tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str):
        raise PredicateSyntaxError(msg, self.peek()[2], self.text)

    def expr(self, min_level: int = 1) -> Term:
        left = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind != "op" or val not in _INFIX:
                return left
            lvl, ctor = _INFIX[val]
            if lvl < min_level:
                return left
            self.advance()
            right = self.expr(lvl + 1)
            left = ctor(left, right)

    def unary(self) -> Term:
        kind, val, _ = self.peek()
        if kind == "op" and val in _PREFIX:
            self.advance()
            return _PREFIX[val](self.unary())
        return self.postfix()

    def postfix(self) -> Term:
        t = self.primary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in _POSTFIX:
                self.advance()
                t = _POSTFIX[val](t)
            else:
                return t

    def primary(self) -> Term:
        kind, val, _ = self.peek()
        if kind == "const" or (kind == "op" and val == "t"):
            self.advance()
            return _CONSTS[val]()
        if kind == "ident":
            self.advance()
            return Atom(val)
        if kind == "op" and val == "(":
            self.advance()
            t = self.expr()
            if self.peek()[1] != ")":
                self.fail("expected ')'")
            self.advance()
            return t
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {val!r}")


def parse_predicate(text: str) -> Term:
    p = _Parser(text)
    t = p.expr()
    if p.peek()[0] != "end":
        p.fail(f"unexpected token {p.peek()[1]!r}")
    return t


def parse(text: str) -> Term:
    return parse_predicate(text)
