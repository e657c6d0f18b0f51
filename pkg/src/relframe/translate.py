"""First-order formulas over binary relations, the translations G, J, H,
and satisfaction in finite structures."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from . import syntax as S


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnassignedVariable(KeyError):
    pass


# ---- formulas ----------------------------------------------------------------

class Formula:
    def children(self) -> tuple["Formula", ...]:
        return ()


@dataclass(frozen=True)
class AtomFml(Formula):
    left_var: int
    pred: S.Term
    right_var: int


@dataclass(frozen=True)
class Equation(Formula):
    lhs: S.Term
    rhs: S.Term


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class ForAll(Formula):
    var: int
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Exists(Formula):
    var: int
    body: Formula

    def children(self):
        return (self.body,)


def basic(phi: Formula) -> Formula:
    """Rewrite Or/And/Iff/Exists into Implies/Not/ForAll."""
    if isinstance(phi, (AtomFml, Equation)):
        return phi
    if isinstance(phi, Implies):
        return Implies(basic(phi.left), basic(phi.right))
    if isinstance(phi, Not):
        return Not(basic(phi.arg))
    if isinstance(phi, ForAll):
        return ForAll(phi.var, basic(phi.body))
    if isinstance(phi, Or):
        return Implies(Not(basic(phi.left)), basic(phi.right))
    if isinstance(phi, And):
        return Not(Implies(basic(phi.left), Not(basic(phi.right))))
    if isinstance(phi, Iff):
        a, b = basic(phi.left), basic(phi.right)
        return Not(Implies(Implies(a, b), Not(Implies(b, a))))
    if isinstance(phi, Exists):
        return Not(ForAll(phi.var, Not(basic(phi.body))))
    raise TypeError(phi)


def free_vars(phi: Formula) -> frozenset[int]:
    if isinstance(phi, AtomFml):
        return frozenset((phi.left_var, phi.right_var))
    if isinstance(phi, Equation):
        return frozenset()
    if isinstance(phi, (ForAll, Exists)):
        return free_vars(phi.body) - {phi.var}
    out = frozenset()
    for c in phi.children():
        out |= free_vars(c)
    return out


def variables(phi: Formula) -> frozenset[int]:
    """Every variable index occurring in phi, free or bound."""
    if isinstance(phi, AtomFml):
        return frozenset((phi.left_var, phi.right_var))
    if isinstance(phi, Equation):
        return frozenset()
    out = frozenset([phi.var]) if isinstance(phi, (ForAll, Exists)) else frozenset()
    for c in phi.children():
        out |= variables(c)
    return out


def closure(phi: Formula) -> Formula:
    """Universally quantify the free variables, the last one innermost."""
    fv = free_vars(phi)
    while fv:
        phi = ForAll(max(fv), phi)
        fv = free_vars(phi)
    return phi


# ---- printing and parsing -----------------------------------------------------

_FLEVEL = {Iff: 1, Implies: 2, Or: 3, And: 4}
_FSYM = {Iff: "<=>", Implies: "=>", Or: "||", And: "&&"}


def print_formula(phi: Formula) -> str:
    def show(f: Formula, need: int) -> str:
        if isinstance(f, AtomFml):
            p = S.print_predicate(f.pred)
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*'?|1'|0'", p):
                p = f"({p})"
            return f"v{f.left_var} {p} v{f.right_var}"
        if isinstance(f, Equation):
            text = f"{S.print_predicate(f.lhs)} == {S.print_predicate(f.rhs)}"
            return f"({text})" if need > 0 else text
        if isinstance(f, Not):
            return "!" + show(f.arg, 9)
        if isinstance(f, (ForAll, Exists)):
            q = "forall" if isinstance(f, ForAll) else "exists"
            return f"{q} v{f.var} ({show(f.body, 0)})"
        lvl = _FLEVEL[type(f)]
        # left-associative: the right operand needs a strictly tighter level
        text = f"{show(f.left, lvl)} {_FSYM[type(f)]} {show(f.right, lvl + 1)}"
        return f"({text})" if lvl < need else text
    return show(phi, 0)


_FTOKEN = re.compile(r"\s*(<=>|=>|&&|\|\||==|forall\b|exists\b|v\d+\b|\(|\)|!)")


class _FParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str | None:
        self._skip()
        m = _FTOKEN.match(self.text, self.pos)
        return m.group(1) if m else (None if self.pos >= len(self.text) else "")

    def take(self, tok: str):
        if self.peek() != tok:
            raise FormulaSyntaxError(f"expected {tok!r}", self.pos)
        self._skip()
        self.pos += len(tok)

    def var(self) -> int:
        t = self.peek()
        if not t or not re.fullmatch(r"v\d+", t):
            raise FormulaSyntaxError("expected a variable vI", self.pos)
        self.take(t)
        return int(t[1:])

    def parse(self) -> Formula:
        f = self.iff()
        self._skip()
        if self.pos != len(self.text):
            raise FormulaSyntaxError("unexpected trailing text", self.pos)
        return f

    def binary(self, sym, ctor, sub):
        left = sub()
        while self.peek() == sym:
            self.take(sym)
            left = ctor(left, sub())
        return left

    def iff(self):
        return self.binary("<=>", Iff, self.imp)

    def imp(self):
        return self.binary("=>", Implies, self.disj)

    def disj(self):
        return self.binary("||", Or, self.conj)

    def conj(self):
        return self.binary("&&", And, self.unary)

    def unary(self) -> Formula:
        t = self.peek()
        if t == "!":
            self.take("!")
            return Not(self.unary())
        if t in ("forall", "exists"):
            self.take(t)
            v = self.var()
            body = self.unary()
            return ForAll(v, body) if t == "forall" else Exists(v, body)
        if t == "(":
            save = self.pos
            try:
                self.take("(")
                f = self.iff()
                self.take(")")
                if self.peek() != "==":
                    return f
            except (FormulaSyntaxError, S.PredicateSyntaxError):
                pass
            self.pos = save
            return self.equation()
        if t and re.fullmatch(r"v\d+", t):
            return self.atomic()
        return self.equation()

    def _chunk(self, stop) -> tuple[str, int]:
        """Raw predicate text up to a stop token at bracket depth 0."""
        self._skip()
        start = self.pos
        depth = 0
        i = start
        while i < len(self.text):
            ch = self.text[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                if depth == 0:
                    break
                depth -= 1
            elif depth == 0 and stop(i):
                break
            i += 1
        self.pos = i
        return self.text[start:i], start

    def _pred(self, text: str, start: int) -> S.Term:
        if not text.strip():
            raise FormulaSyntaxError("expected a predicate", start)
        try:
            return S.parse_predicate(text)
        except S.PredicateSyntaxError as e:
            raise FormulaSyntaxError(f"bad predicate {text.strip()!r}: {e}", start) from None

    def atomic(self) -> Formula:
        x = self.var()
        var_re = re.compile(r"v\d+\b")

        def stop(i):
            return var_re.match(self.text, i) and (i == 0 or not (self.text[i - 1].isalnum() or self.text[i - 1] == "_"))
        text, start = self._chunk(stop)
        p = self._pred(text, start)
        y = self.var()
        return AtomFml(x, p, y)

    def equation(self) -> Formula:
        text, start = self._chunk(lambda i: self.text.startswith("==", i))
        lhs = self._pred(text, start)
        self.take("==")
        ops = ("<=>", "=>", "&&", "||")
        text, start = self._chunk(lambda i: any(self.text.startswith(o, i) for o in ops)
                                  and not self.text.startswith("->", i - 1))
        return Equation(lhs, self._pred(text, start))


def parse_formula(text: str) -> Formula:
    return _FParser(text).parse()


# ---- structures ----------------------------------------------------------------

@dataclass
class Structure:
    size: int
    interp: dict[str, np.ndarray]

    @staticmethod
    def of(size: int, rels: Mapping[str, object]) -> "Structure":
        out = {}
        for name, pairs in rels.items():
            if isinstance(pairs, np.ndarray):
                m = pairs.astype(bool)
            else:
                m = np.zeros((size, size), dtype=bool)
                for i, j in pairs:
                    m[i, j] = True
            if m.shape != (size, size):
                raise ValueError(f"relation {name} has the wrong shape")
            out[name] = m
        return Structure(size, out)

    def pairs(self, name: str) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in zip(*np.nonzero(self.interp[name]))}


def parse_structure(text: str) -> Structure:
    size = None
    rels: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("base"):
            size = int(line.split()[1])
        elif line.startswith("rel"):
            m = re.fullmatch(r"rel\s+([A-Za-z][A-Za-z0-9_]*)\s*:(.*)", line)
            if not m:
                raise ValueError(f"line {lineno}: expected 'rel <Atom>: (i,j) ...'")
            pairs = [(int(a), int(b)) for a, b in re.findall(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)", m.group(2))]
            rels[m.group(1)] = pairs
        else:
            raise ValueError(f"line {lineno}: unknown directive {line.split()[0]!r}")
    if size is None:
        raise ValueError("missing 'base <m>' line")
    if size > 6:
        raise ValueError("structures are limited to 6 elements")
    for name, pairs in rels.items():
        for i, j in pairs:
            if not (0 <= i < size and 0 <= j < size):
                raise ValueError(f"pair ({i},{j}) of {name} is outside the base")
    return Structure.of(size, rels)


def format_structure(st: Structure) -> str:
    lines = [f"base {st.size}"]
    for name in sorted(st.interp):
        pairs = " ".join(f"({i},{j})" for i, j in sorted(st.pairs(name)))
        lines.append(f"rel {name}: {pairs}")
    return "\n".join(lines) + "\n"


def load_structure(path: str) -> Structure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def random_structure(size: int, atoms, rng: np.random.Generator, density: float = 0.5) -> Structure:
    return Structure(size, {a: rng.random((size, size)) < density for a in atoms})


def denote(st: Structure, p: S.Term) -> np.ndarray:
    """The relation a predicate denotes, as a boolean matrix."""
    cache: dict[S.Term, np.ndarray] = {}
    n = st.size

    def go(t: S.Term) -> np.ndarray:
        got = cache.get(t)
        if got is not None:
            return got
        if isinstance(t, S.Atom):
            if t.name not in st.interp:
                raise KeyError(f"atom {t.name} is not interpreted")
            r = st.interp[t.name]
        elif isinstance(t, S.Identity):
            r = np.eye(n, dtype=bool)
        elif isinstance(t, S.Join):
            r = go(t.left) | go(t.right)
        elif isinstance(t, S.Complement):
            r = ~go(t.arg)
        elif isinstance(t, S.RelProd):
            r = (go(t.left).astype(np.uint8) @ go(t.right).astype(np.uint8)) > 0
        elif isinstance(t, S.Converse):
            r = go(t.arg).T
        else:
            raise TypeError(t)
        cache[t] = r
        return r

    return go(S.desugar(p))


def satisfies(st: Structure, phi: Formula, s: Mapping[int, int] | None = None) -> bool:
    s = dict(s or {})
    missing = free_vars(phi) - set(s)
    if missing:
        raise UnassignedVariable(f"no value for v{min(missing)}")
    dens: dict[S.Term, np.ndarray] = {}

    def den(p):
        got = dens.get(p)
        if got is None:
            got = dens[p] = denote(st, p)
        return got

    def sat(f: Formula, env: dict) -> bool:
        if isinstance(f, AtomFml):
            return bool(den(f.pred)[env[f.left_var], env[f.right_var]])
        if isinstance(f, Equation):
            return bool(np.array_equal(den(f.lhs), den(f.rhs)))
        if isinstance(f, Implies):
            return (not sat(f.left, env)) or sat(f.right, env)
        if isinstance(f, Not):
            return not sat(f.arg, env)
        if isinstance(f, Or):
            return sat(f.left, env) or sat(f.right, env)
        if isinstance(f, And):
            return sat(f.left, env) and sat(f.right, env)
        if isinstance(f, Iff):
            return sat(f.left, env) == sat(f.right, env)
        if isinstance(f, (ForAll, Exists)):
            want = isinstance(f, ForAll)
            for u in range(st.size):
                env2 = dict(env)
                env2[f.var] = u
                if sat(f.body, env2) != want:
                    return not want
            return want
        raise TypeError(f)

    return sat(phi, s)


def assignments(st: Structure, vars_: Iterator[int] | frozenset) -> Iterator[dict[int, int]]:
    vs = sorted(vars_)
    for vals in itertools.product(range(st.size), repeat=len(vs)):
        yield dict(zip(vs, vals))


# ---- G ----------------------------------------------------------------------------

def translate_G(phi: Formula) -> Formula:
    """Eliminate predicate operators; the result mentions atomic predicates only."""
    if isinstance(phi, AtomFml):
        return _g_atom(phi.left_var, S.desugar(phi.pred), phi.right_var)
    if isinstance(phi, Equation):
        return closure(Iff(_g_atom(0, S.desugar(phi.lhs), 1), _g_atom(0, S.desugar(phi.rhs), 1)))
    if isinstance(phi, Implies):
        return Implies(translate_G(phi.left), translate_G(phi.right))
    if isinstance(phi, Not):
        return Not(translate_G(phi.arg))
    if isinstance(phi, ForAll):
        return ForAll(phi.var, translate_G(phi.body))
    if isinstance(phi, Exists):
        return Exists(phi.var, translate_G(phi.body))
    if isinstance(phi, (Or, And, Iff)):
        return type(phi)(translate_G(phi.left), translate_G(phi.right))
    raise TypeError(phi)


def _first_other(x: int, y: int) -> int:
    z = 0
    while z in (x, y):
        z += 1
    return z


def _g_atom(x: int, p: S.Term, y: int) -> Formula:
    if isinstance(p, (S.Atom, S.Identity)):
        return AtomFml(x, p, y)
    if isinstance(p, S.Join):
        return Or(_g_atom(x, p.left, y), _g_atom(x, p.right, y))
    if isinstance(p, S.Complement):
        return Not(_g_atom(x, p.arg, y))
    if isinstance(p, S.RelProd):
        z = _first_other(x, y)
        return Exists(z, And(_g_atom(x, p.left, z), _g_atom(z, p.right, y)))
    if isinstance(p, S.Converse):
        return _g_atom(y, p.arg, x)
    raise TypeError(p)


# ---- J and H -------------------------------------------------------------------------

Clause = tuple[S.Term, S.Term, S.Term]


@dataclass(frozen=True)
class ClauseForm:
    """Conjunction over i of (v0 R_i v2 or v2 S_i v1 or v0 T_i v1)."""
    clauses: tuple[Clause, ...]

    def formula(self) -> Formula:
        parts = [Or(Or(AtomFml(0, r, 2), AtomFml(2, s, 1)), AtomFml(0, t, 1))
                 for r, s, t in self.clauses]
        # balanced, so that long conjunctions stay shallow
        while len(parts) > 1:
            parts = [And(parts[i], parts[i + 1]) if i + 1 < len(parts) else parts[i]
                     for i in range(0, len(parts), 2)]
        return parts[0]

    def table(self, st: "Structure") -> np.ndarray:
        """Truth value at every (v0, v1, v2), as an n x n x n boolean array."""
        n = st.size
        out = np.ones((n, n, n), dtype=bool)
        dens: dict[S.Term, np.ndarray] = {}

        def den(p):
            got = dens.get(p)
            if got is None:
                got = dens[p] = denote(st, p)
            return got

        for r, q, t in self.clauses:
            out &= den(r)[:, None, :] | den(q).T[None, :, :] | den(t)[:, :, None]
        return out

    def holds(self, st: "Structure", s: Mapping[int, int]) -> bool:
        return bool(self.table(st)[s[0], s[1], s[2]])

    def __len__(self):
        return len(self.clauses)


_ZERO, _ONE, _ID = S.Zero(), S.One(), S.Identity()


def _sum(terms: list[S.Term]) -> S.Term:
    if not terms:
        return _ZERO
    out = terms[0]
    for t in terms[1:]:
        out = S.Join(out, t)
    return out


def _j_atom(x: int, a: S.Term, y: int) -> Clause:
    z = _ZERO
    meet_id = S.Meet(a, _ID)
    table = {
        (0, 1): (z, z, a),
        (1, 0): (z, z, S.Converse(a)),
        (1, 2): (z, S.Converse(a), z),
        (2, 1): (z, a, z),
        (0, 2): (a, z, z),
        (2, 0): (S.Converse(a), z, z),
        (0, 0): (z, z, S.RelProd(meet_id, _ONE)),
        (1, 1): (z, z, S.RelProd(_ONE, meet_id)),
        (2, 2): (S.RelProd(_ONE, meet_id), z, z),
    }
    return table[(x, y)]


class ClauseBudgetError(ValueError):
    pass


def clause_count(phi: Formula) -> int:
    """How many clauses J produces; negation is exponential in this."""
    phi = basic(phi)

    def go(f):
        if isinstance(f, (AtomFml, Equation)):
            return 1
        if isinstance(f, Not):
            k = go(f.arg)
            if k > 64:
                return 1 << 200
            return 3 ** k
        if isinstance(f, Implies):
            k = go(f.left)
            if k > 64:
                return 1 << 200
            return 3 ** k * go(f.right)
        return go(f.body)
    return go(phi)


def translate_J(phi: Formula, max_clauses: int = 200_000) -> ClauseForm:
    """The clause form of a formula whose variables are among v0, v1, v2."""
    bad = [v for v in variables(phi) if v >= 3]
    if bad:
        raise ValueError(f"variable v{min(bad)} is outside v0, v1, v2")
    k = clause_count(phi)
    if k > max_clauses:
        raise ClauseBudgetError(f"J would produce more than {max_clauses} clauses")
    return ClauseForm(tuple(_j(basic(phi))))


def _j(phi: Formula) -> list[Clause]:
    if isinstance(phi, AtomFml):
        return [_j_atom(phi.left_var, phi.pred, phi.right_var)]
    if isinstance(phi, Equation):
        a, b = phi.lhs, phi.rhs
        agree = S.Join(S.Meet(a, b), S.Meet(S.Complement(a), S.Complement(b)))
        return [(_ZERO, _ZERO, S.Dagger(S.Dagger(_ZERO, agree), _ZERO))]
    if isinstance(phi, Not):
        cs = _j(phi.arg)
        return [_negated(cs, f) for f in itertools.product(range(3), repeat=len(cs))]
    if isinstance(phi, Implies):
        cs, ds = _j(phi.left), _j(phi.right)
        out = []
        for f in itertools.product(range(3), repeat=len(cs)):
            r, s, t = _negated_parts(cs, f)
            for r2, s2, t2 in ds:
                out.append((_sum(r + [r2]), _sum(s + [s2]), _sum(t + [t2])))
        return out
    if isinstance(phi, ForAll):
        cs = _j(phi.body)
        if phi.var == 0:
            return [(_ZERO, S.Join(S.Dagger(S.Converse(r), t), s), _ZERO) for r, s, t in cs]
        if phi.var == 1:
            return [(S.Join(S.Dagger(t, S.Converse(s)), r), _ZERO, _ZERO) for r, s, t in cs]
        return [(_ZERO, _ZERO, S.Join(S.Dagger(r, s), t)) for r, s, t in cs]
    raise TypeError(phi)


def _negated_parts(cs: list[Clause], f) -> tuple[list, list, list]:
    parts = ([], [], [])
    for (r, s, t), k in zip(cs, f):
        parts[k].append(S.Complement((r, s, t)[k]))
    return parts


def _negated(cs: list[Clause], f) -> Clause:
    r, s, t = _negated_parts(cs, f)
    return (_sum(r), _sum(s), _sum(t))


def translate_H(phi: Formula, max_clauses: int = 200_000) -> Equation:
    """An equation equivalent to a sentence over v0, v1, v2."""
    if free_vars(phi):
        raise ValueError("H is defined on sentences only")
    # the v2 case leaves every clause as (0, 0, (R † S) + T)
    terms = [t for _, _, t in translate_J(ForAll(2, phi), max_clauses).clauses]
    while len(terms) > 1:
        terms = [S.Meet(terms[i], terms[i + 1]) if i + 1 < len(terms) else terms[i]
                 for i in range(0, len(terms), 2)]
    return Equation(_ONE, terms[0])


def holds_everywhere(st: Structure, phi: Formula) -> bool:
    """True iff phi is satisfied under every assignment of its free variables."""
    return all(satisfies(st, phi, s) for s in assignments(st, free_vars(phi)))
