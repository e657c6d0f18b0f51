"""The n-variable sequent calculus: checking proof scripts and searching for proofs.

Literals ``x A y`` are compared after desugaring, so steps that only unfold
a definition (``A -> B`` into ``-(A^ ; -B)`` and so on) are no-ops.  Sides
of a sequent are sets.

A justification may chain several rules (``7, convL, negR``).  The checker
does not need the intermediate sequents: it tracks an interval
``[lo, hi]`` of sequents obtainable from the premises (``lo`` drops every
active literal, ``hi`` keeps them) and accepts the line when it falls
inside the interval.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from . import syntax as S


class ScriptError(ValueError):
    def __init__(self, line: int | None, reason: str):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + reason)
        self.line = line
        self.reason = reason


class AssumptionKind(enum.Enum):
    DENSITY = "density"
    COMMUTATIVITY = "commutativity"
    SYMMETRY = "symmetry"


RULES = ("axiom", "id-axiom", "cut", "idL", "idR", "plusL", "plusR", "dotL", "dotR",
         "negL", "negR", "compL", "compR", "convL", "convR", "weaken")
MACROS = ("imp-intro", "imp-elim", "id-shift", "diag-shift", "flip", "diag-close", "diag-transfer")
TWO_PREMISE = {"cut", "plusL", "dotR", "compR"}


# ---- hash-consed core predicates ------------------------------------------

ATOM, IDENT, JOIN, COMP, PROD, CONV = "atom", "id", "+", "-", ";", "^"


class _Interner:
    def __init__(self):
        self.nodes: list[tuple] = []
        self.index: dict[tuple, int] = {}

    def node(self, *key) -> int:
        got = self.index.get(key)
        if got is None:
            got = len(self.nodes)
            self.nodes.append(key)
            self.index[key] = got
        return got

    def of(self, t: S.Term) -> int:
        """Id of the desugared form of ``t``."""
        return self._core(S.desugar(t))

    def _core(self, t: S.Term) -> int:
        if isinstance(t, S.Atom):
            return self.node(ATOM, t.name)
        if isinstance(t, S.Identity):
            return self.node(IDENT)
        if isinstance(t, S.Join):
            return self.node(JOIN, self._core(t.left), self._core(t.right))
        if isinstance(t, S.RelProd):
            return self.node(PROD, self._core(t.left), self._core(t.right))
        if isinstance(t, S.Complement):
            return self.node(COMP, self._core(t.arg))
        if isinstance(t, S.Converse):
            return self.node(CONV, self._core(t.arg))
        raise TypeError(f"not a core term: {t!r}")

    def term(self, i: int) -> S.Term:
        key = self.nodes[i]
        op = key[0]
        if op == ATOM:
            return S.Atom(key[1])
        if op == IDENT:
            return S.Identity()
        if op == JOIN:
            return S.Join(self.term(key[1]), self.term(key[2]))
        if op == PROD:
            return S.RelProd(self.term(key[1]), self.term(key[2]))
        if op == COMP:
            return S.Complement(self.term(key[1]))
        return S.Converse(self.term(key[1]))


_I = _Interner()
IDENT_ID = _I.node(IDENT)


def pred_id(t: S.Term) -> int:
    return _I.of(t)


# ---- literals and sequents ---------------------------------------------------

Key = tuple[int, int, int]   # (left var, predicate id, right var)


@dataclass(frozen=True)
class SequentLit:
    left_var: int
    pred: S.Term
    right_var: int

    @property
    def key(self) -> Key:
        return (self.left_var, _pid(self.pred), self.right_var)

    def __str__(self):
        return f"{self.left_var}:{S.print_predicate(self.pred)}:{self.right_var}"


@lru_cache(maxsize=None)
def _pid(t: S.Term) -> int:
    return _I.of(t)


@dataclass(frozen=True)
class Sequent:
    left: frozenset[SequentLit]
    right: frozenset[SequentLit]

    @staticmethod
    def of(left: Iterable[SequentLit] = (), right: Iterable[SequentLit] = ()) -> "Sequent":
        return Sequent(frozenset(left), frozenset(right))

    @property
    def keys(self) -> tuple[frozenset[Key], frozenset[Key]]:
        return frozenset(l.key for l in self.left), frozenset(l.key for l in self.right)

    def variables(self) -> set[int]:
        out = set()
        for l in self.left | self.right:
            out.update((l.left_var, l.right_var))
        return out

    def __str__(self):
        def side(lits):
            return ", ".join(sorted(str(l) for l in lits))
        lhs = side(self.left)
        return (lhs + " " if lhs else "") + "|- " + side(self.right)


def _key_str(k: Key) -> str:
    return f"{k[0]}:{S.print_predicate(_I.term(k[1]))}:{k[2]}"


def keys_to_sequent(left: Iterable[Key], right: Iterable[Key]) -> Sequent:
    return Sequent.of((SequentLit(x, _I.term(p), y) for x, p, y in left),
                      (SequentLit(x, _I.term(p), y) for x, p, y in right))


# ---- axioms and assumptions ----------------------------------------------------

def _is_axiom_keys(L: frozenset[Key], R: frozenset[Key]) -> bool:
    return bool(L & R) or any(p == IDENT_ID and x == y for x, p, y in R)


def is_axiom(s: Sequent) -> bool:
    return _is_axiom_keys(*s.keys)


def _assumption_pair(kind: AssumptionKind, X: int, Y: int) -> bool:
    nx, ny = _I.nodes[X], _I.nodes[Y]
    if kind is AssumptionKind.DENSITY:
        return ny[0] == PROD and ny[1] == X and ny[2] == X
    if kind is AssumptionKind.COMMUTATIVITY:
        return nx[0] == PROD and ny[0] == PROD and nx[1] == ny[2] and nx[2] == ny[1]
    return (ny[0] == CONV and ny[1] == X) or (nx[0] == CONV and nx[1] == Y)


def _assumption_keys(L, R, kind: AssumptionKind) -> bool:
    for (x, X, y) in L:
        for (u, Y, v) in R:
            if (x, y) == (u, v) and _assumption_pair(kind, X, Y):
                return True
    return False


def assumption_matches(s: Sequent, k: AssumptionKind | str) -> bool:
    return _assumption_keys(*s.keys, AssumptionKind(k))


# ---- intervals and rule application ---------------------------------------------

@dataclass(frozen=True)
class Interval:
    """All sequents ``lo <= s <= hi`` (componentwise); ``hi`` None means unbounded."""
    loL: frozenset[Key]
    loR: frozenset[Key]
    hiL: frozenset[Key] | None
    hiR: frozenset[Key] | None

    @staticmethod
    def exact(L, R) -> "Interval":
        return Interval(frozenset(L), frozenset(R), frozenset(L), frozenset(R))

    def contains(self, L, R) -> bool:
        return (self.loL <= L and self.loR <= R
                and (self.hiL is None or L <= self.hiL)
                and (self.hiR is None or R <= self.hiR))

    def pool(self, side: str) -> frozenset[Key]:
        hi = self.hiL if side == "L" else self.hiR
        return hi if hi is not None else (self.loL if side == "L" else self.loR)

    def step(self, side: str, actives: Sequence[Key], principal: Key, pside: str) -> "Interval":
        loL, loR, hiL, hiR = set(self.loL), set(self.loR), self.hiL, self.hiR
        lo = loL if side == "L" else loR
        for a in actives:
            lo.discard(a)
        (loL if pside == "L" else loR).add(principal)
        if pside == "L" and hiL is not None:
            hiL = hiL | {principal}
        if pside == "R" and hiR is not None:
            hiR = hiR | {principal}
        return Interval(frozenset(loL), frozenset(loR), hiL, hiR)

    @property
    def exact_sequent(self) -> tuple[frozenset[Key], frozenset[Key]] | None:
        if self.loL == self.hiL and self.loR == self.hiR:
            return self.loL, self.loR
        return None


def _uses(k: Key, v: int) -> bool:
    return k[0] == v or k[2] == v


def _single(iv: Interval, rule: str, n: int, fresh: int | None):
    """Forward applications of a one-premise rule; yields (interval, info)."""
    N = _I.nodes
    if rule == "weaken":
        yield Interval(iv.loL, iv.loR, None, None), None
        return
    if rule == "convL" or rule == "convR":
        side = "L" if rule == "convL" else "R"
        for a in iv.pool(side):
            x, A, y = a
            yield iv.step(side, [a], (y, _I.node(CONV, A), x), side), None
        return
    if rule == "negL":
        for a in iv.pool("R"):
            yield iv.step("R", [a], (a[0], _I.node(COMP, a[1]), a[2]), "L"), None
        return
    if rule == "negR":
        for a in iv.pool("L"):
            yield iv.step("L", [a], (a[0], _I.node(COMP, a[1]), a[2]), "R"), None
        return
    if rule == "plusR":
        pool = iv.pool("R")
        for a in pool:
            for b in pool:
                if a[0] == b[0] and a[2] == b[2]:
                    yield iv.step("R", [a, b], (a[0], _I.node(JOIN, a[1], b[1]), a[2]), "R"), None
        return
    if rule == "dotL":
        # meet is -(-A + -B)
        pool = iv.pool("L")
        for a in pool:
            for b in pool:
                if a[0] == b[0] and a[2] == b[2]:
                    meet = _I.node(COMP, _I.node(JOIN, _I.node(COMP, a[1]), _I.node(COMP, b[1])))
                    yield iv.step("L", [a, b], (a[0], meet, a[2]), "L"), None
        return
    if rule == "idL":
        for a in iv.pool("L"):
            x, A, y = a
            for z in range(n):
                out = iv.step("L", [a], (x, A, z), "L")
                out = out.step("L", [], (z, IDENT_ID, y), "L")
                yield out, z
        return
    if rule == "compL":
        pool = iv.pool("L")
        for a in pool:
            x, A, y = a
            if fresh is not None and y != fresh:
                continue
            for b in pool:
                if b[0] != y:
                    continue
                B, z = b[1], b[2]
                if y in (x, z):
                    continue
                out = iv.step("L", [a, b], (x, _I.node(PROD, A, B), z), "L")
                # y must not occur in the conclusion
                if any(_uses(k, y) for k in out.loL | out.loR):
                    continue
                hiL = None if out.hiL is None else frozenset(k for k in out.hiL if not _uses(k, y))
                hiR = None if out.hiR is None else frozenset(k for k in out.hiR if not _uses(k, y))
                yield Interval(out.loL, out.loR, hiL, hiR), y
        return
    raise ScriptError(None, f"unknown one-premise rule {rule!r}")


def _union(a: Interval, b: Interval, dropL=(), dropR=()) -> Interval:
    loL = (a.loL | b.loL) - set(dropL)
    loR = (a.loR | b.loR) - set(dropR)
    hiL = None if a.hiL is None or b.hiL is None else a.hiL | b.hiL
    hiR = None if a.hiR is None or b.hiR is None else a.hiR | b.hiR
    return Interval(loL, loR, hiL, hiR)


def _lo_without(iv: Interval, side: str, k: Key) -> Interval:
    if side == "L":
        return Interval(iv.loL - {k}, iv.loR, iv.hiL, iv.hiR)
    return Interval(iv.loL, iv.loR - {k}, iv.hiL, iv.hiR)


def _double(p: Interval, q: Interval, rule: str, n: int):
    """Forward applications of a two-premise rule with premises in this order."""
    if rule == "cut":
        for k in p.pool("R"):
            if k in q.pool("L"):
                a = _lo_without(p, "R", k)
                b = _lo_without(q, "L", k)
                yield _union(a, b), None
        return
    if rule == "plusL":
        for a in p.pool("L"):
            for b in q.pool("L"):
                if a[0] == b[0] and a[2] == b[2]:
                    u = _union(_lo_without(p, "L", a), _lo_without(q, "L", b))
                    yield u.step("L", [], (a[0], _I.node(JOIN, a[1], b[1]), a[2]), "L"), None
        return
    if rule == "dotR":
        for a in p.pool("R"):
            for b in q.pool("R"):
                if a[0] == b[0] and a[2] == b[2]:
                    meet = _I.node(COMP, _I.node(JOIN, _I.node(COMP, a[1]), _I.node(COMP, b[1])))
                    u = _union(_lo_without(p, "R", a), _lo_without(q, "R", b))
                    yield u.step("R", [], (a[0], meet, a[2]), "R"), None
        return
    if rule == "compR":
        for a in p.pool("R"):
            for b in q.pool("R"):
                if a[2] == b[0]:
                    u = _union(_lo_without(p, "R", a), _lo_without(q, "R", b))
                    yield u.step("R", [], (a[0], _I.node(PROD, a[1], b[1]), b[2]), "R"), None
        return
    raise ScriptError(None, f"unknown two-premise rule {rule!r}")


# ---- derived rules -----------------------------------------------------------

def _imp(A: int, B: int) -> int:
    return _I.node(COMP, _I.node(PROD, _I.node(CONV, A), _I.node(COMP, B)))


def _imp_parts(P: int) -> tuple[int, int] | None:
    k = _I.nodes[P]
    if k[0] != COMP:
        return None
    k1 = _I.nodes[k[1]]
    if k1[0] != PROD:
        return None
    ka, kb = _I.nodes[k1[1]], _I.nodes[k1[2]]
    if ka[0] != CONV or kb[0] != COMP:
        return None
    return ka[1], kb[1]


def _macro_outputs(name: str, L: frozenset[Key], R: frozenset[Key], n: int):
    """Conclusions of a derived rule applied to an exact sequent, with the index choice."""
    if name == "imp-intro":
        if len(L) == 1 and len(R) == 1:
            (i, A, j), = L
            (i2, B, j2), = R
            if (i, j) == (i2, j2) and i != j:
                yield frozenset(), frozenset([(j, _imp(A, B), j)]), (i, j)
    elif name == "imp-elim":
        if not L and len(R) == 1:
            (j, P, j2), = R
            parts = _imp_parts(P)
            if parts and j == j2:
                A, B = parts
                for i in range(n):
                    yield frozenset([(i, A, j)]), frozenset([(i, B, j)]), (i, j)
    elif name == "id-shift":
        if not L and len(R) == 1:
            (i, A, i2), = R
            if i == i2:
                for j in range(n):
                    for k in range(n):
                        if i not in (j, k):
                            yield frozenset([(j, IDENT_ID, k)]), frozenset([(j, A, k)]), (i, j, k)
    elif name == "diag-shift":
        if not L and len(R) == 1:
            (i, A, i2), = R
            if i == i2:
                for j in range(n):
                    yield frozenset(), frozenset([(j, A, j)]), (i, j)
    elif name in ("flip", "diag-transfer"):
        if len(L) == 1 and len(R) == 1:
            (i, A, j), = L
            (i2, B, j2), = R
            if (i, j) == (i2, j2):
                if name == "flip":
                    yield frozenset([(j, A, i)]), frozenset([(j, B, i)]), (i, j)
                else:
                    yield frozenset([(i, A, i)]), frozenset([(i, B, i)]), (i, j)
    elif name == "diag-close":
        if len(L) == 1 and len(R) == 1:
            (i, P, j), = L
            (i2, A, j2), = R
            if P == IDENT_ID and (i, j) == (i2, j2) and i != j:
                yield frozenset(), frozenset([(i, A, i)]), (i, j)
    else:
        raise ScriptError(None, f"unknown derived rule {name!r}")


def _macro(iv: Interval, name: str, n: int):
    """Apply a derived rule to a single-literal-per-side member of ``iv``."""
    poolL, poolR = iv.pool("L"), iv.pool("R")
    if len(iv.loL) > 1 or len(iv.loR) > 1:
        return
    choicesL = [frozenset()] if not iv.loL else []
    choicesL += [frozenset([k]) for k in poolL if iv.loL <= {k}]
    choicesR = [frozenset()] if not iv.loR else []
    choicesR += [frozenset([k]) for k in poolR if iv.loR <= {k}]
    for L in choicesL:
        for R in choicesR:
            for outL, outR, idx in _macro_outputs(name, L, R, n):
                yield Interval.exact(outL, outR), (name, L, R, idx)


# ---- scripts -----------------------------------------------------------------

@dataclass
class Justification:
    premises: list[int]
    steps: list[str]          # rule names, "macro:<name>", "def"
    fresh: int | None = None  # the variable named by "no vK"
    kind: str = "rule"        # rule | axiom | assumption | premise

    def __str__(self):
        if self.kind == "axiom":
            return self.steps[0]
        if self.kind in ("assumption", "premise"):
            return self.steps[0]
        parts = [str(p) for p in self.premises]
        for s in self.steps:
            if s == "compL" and self.fresh is not None:
                parts.append(f"compL no v{self.fresh}")
            else:
                parts.append(s)
        return ", ".join(parts)


@dataclass
class ProofLine:
    number: int
    sequent: Sequent
    just: Justification
    text: str = ""


@dataclass
class ProofScript:
    name: str
    n: int
    assumptions: set[AssumptionKind] = field(default_factory=set)
    lines: list[ProofLine] = field(default_factory=list)
    goal_line: int | None = None
    predicate: S.Term | None = None
    hypotheses: list[S.Term] = field(default_factory=list)
    source: str = ""

    def line(self, k: int) -> ProofLine:
        for l in self.lines:
            if l.number == k:
                return l
        raise KeyError(k)


@dataclass
class Ok:
    script: str
    lines: int

    def __bool__(self):
        return True


@dataclass
class Error:
    line: int | None
    reason: str

    def __bool__(self):
        return False

    def __str__(self):
        return (f"line {self.line}: " if self.line is not None else "") + self.reason


_RULE_ALIASES = {
    "W": "weaken", "weakening": "weaken", "Cut": "cut",
    "idR": "id-axiom", "id-axiom": "id-axiom",
}
_MACRO_ALIASES = {f"equiv-{i}": m for i, m in enumerate(MACROS, 1)}


def _parse_lit(text: str, pos_line: int) -> SequentLit:
    m = re.fullmatch(r"\s*(\d+)\s*:(.*):\s*(\d+)\s*", text)
    if not m:
        raise ScriptError(pos_line, f"bad literal {text.strip()!r}; expected i:<predicate>:j")
    try:
        pred = S.parse_predicate(m.group(2))
    except S.PredicateSyntaxError as e:
        raise ScriptError(pos_line, f"in literal {text.strip()!r}: {e}") from None
    return SequentLit(int(m.group(1)), pred, int(m.group(3)))


def parse_sequent(text: str, line: int | None = None) -> Sequent:
    if "|-" not in text:
        raise ScriptError(line, "sequent needs '|-'")
    lhs, rhs = text.split("|-", 1)
    side = lambda s: [_parse_lit(p, line) for p in s.split(",") if p.strip()]
    return Sequent.of(side(lhs), side(rhs))


def parse_justification(text: str, line: int | None = None) -> Justification:
    items = [t.strip() for t in text.split(",") if t.strip()]
    premises, steps, fresh = [], [], None
    for it in items:
        if it.isdigit():
            premises.append(int(it))
            continue
        m = re.fullmatch(r"compL(?:\s+no\s+v?(\d+))?", it)
        if m:
            steps.append("compL")
            if m.group(1) is not None:
                fresh = int(m.group(1))
            continue
        m = re.fullmatch(r"no\s+v?(\d+)", it)
        if m:
            fresh = int(m.group(1))
            continue
        it = _RULE_ALIASES.get(it, it)
        if it.startswith("macro:"):
            name = it[6:]
            name = _MACRO_ALIASES.get(name, name)
            if name not in MACROS:
                raise ScriptError(line, f"unknown derived rule {name!r}")
            steps.append("macro:" + name)
        elif it in RULES or it == "def":
            steps.append(it)
        elif it in ("density", "commutativity", "symmetry", "premise"):
            steps.append(it)
        else:
            raise ScriptError(line, f"unknown rule {it!r}")
    kind = "rule"
    if steps and steps[0] in ("axiom", "id-axiom") and not premises:
        kind = "axiom"
    elif steps and steps[0] in ("density", "commutativity", "symmetry"):
        kind = "assumption"
    elif steps == ["premise"]:
        kind = "premise"
    return Justification(premises, steps, fresh, kind)


_LINE = re.compile(r"\s*(\d+)\.\s+(.*?)\s{2,}(\S.*)$")


def parse_script(text: str, name: str = "") -> ProofScript:
    script = ProofScript(name=name, n=0, source=text)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.split(None, 1)
        word, rest = head[0], head[1] if len(head) > 1 else ""
        if word == "proof":
            script.name = rest.strip()
        elif word == "vars":
            script.n = int(rest)
        elif word == "assume":
            try:
                script.assumptions.add(AssumptionKind(rest.strip()))
            except ValueError:
                raise ScriptError(None, f"unknown assumption {rest.strip()!r}") from None
        elif word == "predicate":
            script.predicate = S.parse_predicate(rest)
        elif word == "rule":
            if "=>" not in rest:
                raise ScriptError(None, "rule header needs '=>'")
            hyps, concl = rest.split("=>", 1)
            script.hypotheses = [S.parse_predicate(h) for h in hyps.split(",") if h.strip()]
            script.predicate = S.parse_predicate(concl)
        elif word == "qed":
            script.goal_line = int(rest)
        else:
            m = _LINE.match(line)
            if not m:
                raise ScriptError(None, f"cannot parse {raw.strip()!r}")
            k = int(m.group(1))
            seq = parse_sequent(m.group(2), k)
            just = parse_justification(m.group(3), k)
            script.lines.append(ProofLine(k, seq, just, raw.strip()))
    if script.n < 1:
        raise ScriptError(None, "missing or bad 'vars' header")
    return script


def load_script(path: str) -> ProofScript:
    with open(path, encoding="utf-8") as fh:
        return parse_script(fh.read(), name=path)


# ---- checking ----------------------------------------------------------------

@dataclass
class _Trace:
    """How one line was derived: the list of chain steps with choices."""
    steps: list[tuple] = field(default_factory=list)


def _search_chain(starts: list[Interval], steps: list[str], fresh: int | None, n: int,
                  target: tuple[frozenset[Key], frozenset[Key]], max_repeat: int = 2):
    """Find an application order of ``steps`` turning ``starts`` into ``target``.

    Returns the list of applied steps with their choices, or None.
    """
    names = [s for s in steps if s != "def"]
    counts = {}
    for s in names:
        counts[s] = counts.get(s, 0) + 1
    budget = len(names) + 2
    seen = set()
    tL, tR = target

    def rec(state: tuple[Interval, ...], used: dict, depth: int, path: list):
        if len(state) == 1 and all(used.get(k, 0) >= c for k, c in counts.items()):
            if state[0].contains(tL, tR):
                return path
        if depth >= budget:
            return None
        key = (state, tuple(sorted(used.items())))
        if key in seen:
            return None
        seen.add(key)
        for name in counts:
            if used.get(name, 0) >= counts[name] * max_repeat:
                continue
            nused = dict(used)
            nused[name] = nused.get(name, 0) + 1
            if name.startswith("macro:"):
                for i, iv in enumerate(state):
                    for out, info in _macro(iv, name[6:], n):
                        got = rec(state[:i] + (out,) + state[i + 1:], nused, depth + 1,
                                  path + [(name, i, info, out)])
                        if got is not None:
                            return got
            elif name in TWO_PREMISE:
                pairs = [(i, j) for i in range(len(state)) for j in range(len(state)) if i != j]
                if len(state) == 1:
                    pairs = [(0, 0)]
                for i, j in pairs:
                    for out, info in _double(state[i], state[j], name, n):
                        rest = tuple(s for k, s in enumerate(state) if k not in (i, j))
                        got = rec((out,) + rest, nused, depth + 1, path + [(name, (i, j), info, out)])
                        if got is not None:
                            return got
            else:
                for i, iv in enumerate(state):
                    for out, info in _single(iv, name, n, fresh):
                        got = rec(state[:i] + (out,) + state[i + 1:], nused, depth + 1,
                                  path + [(name, i, info, out)])
                        if got is not None:
                            return got
        return None

    return rec(tuple(starts), {}, 0, [])


def _goal_forms(p: S.Term, n: int) -> list[tuple[frozenset[Key], frozenset[Key]]]:
    P = _pid(p)
    out = [(frozenset(), frozenset([(i, P, i)])) for i in range(n)]
    if isinstance(p, S.Implies):
        A, B = _pid(p.left), _pid(p.right)
        out += [(frozenset([(i, A, j)]), frozenset([(i, B, j)]))
                for i in range(n) for j in range(n) if i != j]
    return out


def check_script(p: ProofScript, allow_macros: bool = True, traces: dict | None = None) -> Ok | Error:
    """Check every line and the goal."""
    known: dict[int, tuple[frozenset[Key], frozenset[Key]]] = {}
    hyp_forms = [f for h in p.hypotheses for f in _goal_forms(h, p.n)]
    for line in p.lines:
        k = line.number
        if k in known:
            return Error(k, "duplicate line number")
        for l in line.sequent.left | line.sequent.right:
            if not (0 <= l.left_var < p.n and 0 <= l.right_var < p.n):
                return Error(k, f"variable index in {l} is not below {p.n}")
        L, R = line.sequent.keys
        j = line.just
        if j.kind == "axiom":
            if j.steps[0] == "id-axiom":
                ok = any(q == IDENT_ID and x == y for x, q, y in R)
            else:
                ok = _is_axiom_keys(L, R)
            if not ok:
                return Error(k, "not an axiom")
        elif j.kind == "assumption":
            kind = AssumptionKind(j.steps[0])
            if kind not in p.assumptions:
                return Error(k, f"assumption {kind.value} is not declared")
            if not _assumption_keys(L, R, kind):
                return Error(k, f"not a {kind.value} sequent")
        elif j.kind == "premise":
            if (L, R) not in hyp_forms:
                return Error(k, "premise does not match any hypothesis of the rule")
        else:
            if not allow_macros and any(s.startswith("macro:") for s in j.steps):
                return Error(k, "derived rules are disabled")
            for q in j.premises:
                if q not in known:
                    return Error(k, f"cites line {q}, which does not precede it")
            if not j.premises:
                return Error(k, "no premises cited")
            starts = [Interval.exact(*known[q]) for q in j.premises]
            if j.fresh is not None and not 0 <= j.fresh < p.n:
                return Error(k, f"variable v{j.fresh} is not below {p.n}")
            path = _search_chain(starts, j.steps, j.fresh, p.n, (L, R))
            if path is None:
                return Error(k, f"does not follow from {', '.join(map(str, j.premises))} by "
                                f"{', '.join(s for s in j.steps) or 'definitions'}")
            if traces is not None:
                traces[k] = path
        known[k] = (L, R)
    if p.goal_line is None:
        return Error(None, "no qed line")
    if p.goal_line not in known:
        return Error(None, f"qed cites missing line {p.goal_line}")
    if p.predicate is not None and known[p.goal_line] not in _goal_forms(p.predicate, p.n):
        return Error(p.goal_line, "goal line does not state the predicate")
    return Ok(p.name, len(p.lines))


# ---- macro expansion ----------------------------------------------------------------

@dataclass
class _Line:
    L: frozenset[Key]
    R: frozenset[Key]
    prem: list[int]      # indices into the output list
    steps: list[str]
    fresh: int | None = None
    kind: str = "rule"


def _lit(x, P, y) -> Key:
    return (x, P, y)


def expand_macro(m: str, premise: Sequent | tuple, n: int, target: Sequent | tuple | None = None) -> list[tuple[Sequent, str]]:
    """The standard derivation of a derived rule, as primitive lines.

    ``premise`` must have the rule's shape.  Returns ``(sequent, justification)``
    pairs; justifications cite ``0`` for the premise and ``k`` for the k-th
    returned line.
    """
    m = _MACRO_ALIASES.get(m, m)
    if isinstance(premise, Sequent):
        premise = premise.keys
    if isinstance(target, Sequent):
        target = target.keys
    outs = list(_macro_outputs(m, premise[0], premise[1], n))
    if target is not None:
        outs = [o for o in outs if (o[0], o[1]) == tuple(target)]
    if not outs:
        raise ScriptError(None, f"premise does not have the shape required by {m}")
    outL, outR, idx = outs[0]
    lines = _expand(m, premise, idx, n)
    if lines and (lines[-1].L, lines[-1].R) != (outL, outR):
        raise AssertionError("derived rule expansion ended on the wrong sequent")
    result = []
    for ln in lines:
        just = ", ".join([str(q) for q in ln.prem] +
                         [("compL no v%d" % ln.fresh) if s == "compL" and ln.fresh is not None else s
                          for s in ln.steps])
        result.append((keys_to_sequent(ln.L, ln.R), just))
    return result


def _expand(m: str, premise, idx, n: int) -> list[_Line]:
    """Lines after the premise (which is index 0); premises refer to 1-based positions."""
    pL, pR = premise
    out: list[_Line] = []

    def add(L, R, prem, steps, fresh=None, kind="rule"):
        out.append(_Line(frozenset(L), frozenset(R), prem, steps, fresh, kind))
        return len(out)

    def sub(name, at: int, L, R, idx2):
        # nested derived rule: splice its expansion, rebasing references
        base = len(out)
        inner = _expand(name, (L, R), idx2, n)
        for ln in inner:
            prem = [at if q == 0 else base + q for q in ln.prem]
            out.append(_Line(ln.L, ln.R, prem, ln.steps, ln.fresh, ln.kind))
        return len(out)

    C, N, P, V = (lambda a: _I.node(CONV, a)), (lambda a: _I.node(COMP, a)), \
        (lambda a, b: _I.node(PROD, a, b)), IDENT_ID
    if m == "imp-intro":
        i, j = idx
        (_, A, _), = pL
        (_, B, _), = pR
        l2 = add([(j, C(A), i)], [(i, B, j)], [0], ["convL"])
        l3 = add([(j, C(A), i), (i, N(B), j)], [], [l2], ["negL"])
        l4 = add([(j, P(C(A), N(B)), j)], [], [l3], ["compL"], fresh=i)
        l5 = add([], [(j, N(P(C(A), N(B))), j)], [l4], ["negR"])
        add([], [(j, _imp(A, B), j)], [l5], ["def"])
    elif m == "imp-elim":
        i, j = idx
        (_, Pj, _), = pR
        A, B = _imp_parts(Pj)
        X = P(C(A), N(B))
        l2 = add([], [(j, N(X), j)], [0], ["def"])
        l3 = add([(j, X, j)], [(j, X, j)], [], ["axiom"], kind="axiom")
        l4 = add([(j, X, j), (j, N(X), j)], [], [l3], ["negL"])
        l5 = add([(j, X, j)], [], [l2, l4], ["cut"])
        l6 = add([(i, A, j)], [(i, A, j)], [], ["axiom"], kind="axiom")
        l7 = add([(i, A, j)], [(j, C(A), i)], [l6], ["convR"])
        l8 = add([(i, B, j)], [(i, B, j)], [], ["axiom"], kind="axiom")
        l9 = add([], [(i, B, j), (i, N(B), j)], [l8], ["negR"])
        l10 = add([(i, A, j)], [(i, B, j), (j, X, j)], [l7, l9], ["compR"])
        add([(i, A, j)], [(i, B, j)], [l5, l10], ["cut"])
    elif m == "id-shift":
        i, j, k = idx
        (_, A, _), = pR
        l2 = add([], [(i, C(A), i)], [0], ["convR"])
        l3 = add([(j, A, k)], [(j, A, k)], [], ["axiom"], kind="axiom")
        l4 = add([(j, A, i), (i, V, k)], [(j, A, k)], [l3], ["idL"])
        l5 = add([(i, C(A), j), (i, V, k)], [(j, A, k)], [l4], ["convL"])
        l6 = add([(i, C(A), i), (i, V, j), (i, V, k)], [(j, A, k)], [l5], ["idL"])
        l7 = add([(i, V, j), (i, V, k)], [(j, A, k)], [l2, l6], ["cut"])
        l8 = add([(j, C(V), i), (i, V, k)], [(j, A, k)], [l7], ["convL"])
        l9 = add([(j, P(C(V), V), k)], [(j, A, k)], [l8], ["compL"], fresh=i)
        l10 = add([(j, V, k)], [(j, V, k)], [], ["axiom"], kind="axiom")
        l11 = add([], [(j, V, j)], [], ["id-axiom"], kind="axiom")
        l12 = add([], [(j, C(V), j)], [l11], ["convR"])
        l13 = add([(j, V, k)], [(j, P(C(V), V), k)], [l12, l10], ["compR"])
        add([(j, V, k)], [(j, A, k)], [l13, l9], ["cut"])
    elif m == "diag-shift":
        i, j = idx
        if i == j:
            return out
        (_, A, _), = pR
        l2 = sub("id-shift", 0, pL, pR, (i, j, j))
        l3 = add([], [(j, V, j)], [], ["id-axiom"], kind="axiom")
        add([], [(j, A, j)], [l3, l2], ["cut"])
    elif m == "flip":
        i, j = idx
        if i == j:
            return out
        (_, A, _), = pL
        (_, B, _), = pR
        l2 = sub("imp-intro", 0, pL, pR, (i, j))
        l3 = sub("diag-shift", l2, out[-1].L, out[-1].R, (j, i))
        sub("imp-elim", l3, out[-1].L, out[-1].R, (j, i))
    elif m == "diag-close":
        i, j = idx
        (_, A, _), = pR
        l2 = add([(j, V, i)], [(j, V, i)], [], ["axiom"], kind="axiom")
        l3 = add([(i, V, j), (j, V, i)], [(i, P(A, V), i)], [0, l2], ["compR"])
        l4 = add([(i, P(V, V), i)], [(i, P(A, V), i)], [l3], ["compL"], fresh=j)
        l5 = add([], [(i, V, i)], [], ["id-axiom"], kind="axiom")
        l6 = add([], [(i, P(V, V), i)], [l5, l5], ["compR"])
        l7 = add([], [(i, P(A, V), i)], [l6, l4], ["cut"])
        l8 = add([(i, A, i)], [(i, A, i)], [], ["axiom"], kind="axiom")
        l9 = add([(i, A, j), (j, V, i)], [(i, A, i)], [l8], ["idL"])
        l10 = add([(i, P(A, V), i)], [(i, A, i)], [l9], ["compL"], fresh=j)
        add([], [(i, A, i)], [l7, l10], ["cut"])
    elif m == "diag-transfer":
        i, j = idx
        if i == j:
            return out
        (_, A, _), = pL
        (_, B, _), = pR
        l2 = add([(i, A, i), (i, V, j)], [(i, B, j)], [0], ["idL"])
        l3 = add([(j, V, i)], [(j, V, i)], [], ["axiom"], kind="axiom")
        l4 = add([(i, A, i), (i, V, j), (j, V, i)], [(i, P(B, V), i)], [l2, l3], ["compR"])
        l5 = add([(i, A, i), (i, P(V, V), i)], [(i, P(B, V), i)], [l4], ["compL"], fresh=j)
        l6 = add([], [(i, V, i)], [], ["id-axiom"], kind="axiom")
        l7 = add([], [(i, P(V, V), i)], [l6, l6], ["compR"])
        l8 = add([(i, A, i)], [(i, P(B, V), i)], [l7, l5], ["cut"])
        l9 = add([(i, B, i)], [(i, B, i)], [], ["axiom"], kind="axiom")
        l10 = add([(i, B, j), (j, V, i)], [(i, B, i)], [l9], ["idL"])
        l11 = add([(i, P(B, V), i)], [(i, B, i)], [l10], ["compL"], fresh=j)
        add([(i, A, i)], [(i, B, i)], [l8, l11], ["cut"])
    else:
        raise ScriptError(None, f"unknown derived rule {m!r}")
    return out


def expand_script(p: ProofScript) -> ProofScript:
    """An equivalent script in which every derived rule is replaced by primitive lines."""
    traces: dict[int, list] = {}
    res = check_script(p, traces=traces)
    if not res:
        raise ScriptError(res.line, "cannot expand a script that does not check: " + res.reason)
    out: list[_Line] = []
    where: dict[int, int] = {}   # original line number -> output index (1-based)

    def emit(L, R, prem, steps, fresh=None, kind="rule"):
        out.append(_Line(frozenset(L), frozenset(R), list(prem), list(steps), fresh, kind))
        return len(out)

    for line in p.lines:
        L, R = line.sequent.keys
        j = line.just
        if j.kind != "rule" or not any(s.startswith("macro:") for s in j.steps):
            prem = [where[q] for q in j.premises]
            where[line.number] = emit(L, R, prem, j.steps, j.fresh, j.kind)
            continue
        path = traces[line.number]
        # replay the chain, materialising the input and output of each derived rule
        state = [("line", where[q]) for q in j.premises]
        pending: list[str] = []
        for name, pos, info, result in path:
            if not name.startswith("macro:"):
                pending.append(name)
                continue
            mname, mL, mR, idx = info
            src = state[pos]
            if pending or src[0] != "line":
                refs = [s[1] for s in state if s[0] == "line"]
                src_idx = emit(mL, mR, refs, pending, j.fresh)
                pending = []
            else:
                src_idx = src[1]
            base = len(out)
            for ln in _expand(mname, (mL, mR), idx, p.n):
                prem = [src_idx if q == 0 else base + q for q in ln.prem]
                out.append(_Line(ln.L, ln.R, prem, ln.steps, ln.fresh, ln.kind))
            if len(out) == base:  # trivial instance
                state = [("line", src_idx)]
            else:
                state = [("line", len(out))]
        last = state[0][1]
        if (out[last - 1].L, out[last - 1].R) == (L, R) and not pending:
            where[line.number] = last
        else:
            where[line.number] = emit(L, R, [last], pending or ["def"], j.fresh)
    goal = where[p.goal_line] if p.goal_line is not None else None
    new = ProofScript(name=p.name, n=p.n, assumptions=set(p.assumptions),
                      predicate=p.predicate, hypotheses=list(p.hypotheses))
    for i, ln in enumerate(out, 1):
        steps = [s for s in ln.steps]
        new.lines.append(ProofLine(i, keys_to_sequent(ln.L, ln.R),
                                   Justification(ln.prem, steps, ln.fresh, ln.kind)))
    new.goal_line = goal
    return new


def format_script(p: ProofScript) -> str:
    out = [f"proof {p.name}", f"vars {p.n}"]
    for a in sorted(p.assumptions, key=lambda a: a.value):
        out.append(f"assume {a.value}")
    if p.hypotheses:
        out.append("rule " + ", ".join(S.print_predicate(h) for h in p.hypotheses)
                   + " => " + S.print_predicate(p.predicate))
    elif p.predicate is not None:
        out.append("predicate " + S.print_predicate(p.predicate))
    for ln in p.lines:
        out.append(f"{ln.number}. {ln.sequent}  {ln.just}")
    if p.goal_line is not None:
        out.append(f"qed {p.goal_line}")
    return "\n".join(out) + "\n"


def rename_variables(p: ProofScript, perm: dict[int, int]) -> ProofScript:
    """Apply a permutation of variable indices to every line."""
    def lit(l: SequentLit) -> SequentLit:
        return SequentLit(perm.get(l.left_var, l.left_var), l.pred, perm.get(l.right_var, l.right_var))
    new = ProofScript(name=p.name, n=p.n, assumptions=set(p.assumptions),
                      goal_line=p.goal_line, predicate=p.predicate, hypotheses=list(p.hypotheses))
    for ln in p.lines:
        j = ln.just
        fresh = perm.get(j.fresh, j.fresh) if j.fresh is not None else None
        new.lines.append(ProofLine(ln.number, Sequent.of(map(lit, ln.sequent.left), map(lit, ln.sequent.right)),
                                   Justification(list(j.premises), list(j.steps), fresh, j.kind)))
    return new


# ---- corpus --------------------------------------------------------------------

def _proof_dir():
    return resources.files("relframe") / "proofs"


def builtin_script_names() -> list[str]:
    return sorted(p.name[:-6] for p in _proof_dir().iterdir() if p.name.endswith(".proof"))


def builtin_script(name: str) -> ProofScript:
    path = _proof_dir() / f"{name}.proof"
    if not path.is_file():
        raise KeyError(f"no builtin proof named {name!r}")
    return parse_script(path.read_text(encoding="utf-8"), name=name)


def builtin_scripts() -> dict[str, ProofScript]:
    return {nm: builtin_script(nm) for nm in builtin_script_names()}


# ---- search --------------------------------------------------------------------

class SearchExhausted(Exception):
    pass


@dataclass
class _Node:
    L: frozenset[Key]
    R: frozenset[Key]
    rule: str
    kids: list["_Node"] = field(default_factory=list)
    fresh: int | None = None


def _vars_of(keys) -> set[int]:
    out = set()
    for x, _, y in keys:
        out.update((x, y))
    return out


def search_proof(goal: Sequent, n: int, depth: int,
                 assumptions: Iterable[AssumptionKind | str] = (),
                 node_budget: int = 200_000) -> ProofScript | None:
    """Bounded backward search over cut-free rule applications.

    Returns a checked script or None; ``None`` is not a proof of
    unprovability.  Raises SearchExhausted when the node budget runs out.
    """
    assumptions = {AssumptionKind(a) for a in assumptions}
    L0, R0 = goal.keys
    counter = [0]
    failed: dict[tuple, int] = {}

    def prove(L: frozenset, R: frozenset, d: int) -> _Node | None:
        counter[0] += 1
        if counter[0] > node_budget:
            raise SearchExhausted()
        if _is_axiom_keys(L, R):
            rule = "axiom" if L & R else "id-axiom"
            return _Node(L, R, rule)
        if d == 0:
            return None
        key = (L, R)
        if failed.get(key, -1) >= d:
            return None
        for node in _expansions(L, R, d):
            if node is not None:
                return node
        failed[key] = d
        return None

    def _expansions(L, R, d):
        N = _I.nodes
        # invertible rules first
        for k in sorted(R):
            x, P, y = k
            op = N[P]
            if op[0] == COMP:
                sub = prove(L | {(x, op[1], y)}, R - {k}, d - 1)
                if sub:
                    yield _Node(L, R, "negR", [sub])
                    return
            elif op[0] == JOIN:
                sub = prove(L, (R - {k}) | {(x, op[1], y), (x, op[2], y)}, d - 1)
                if sub:
                    yield _Node(L, R, "plusR", [sub])
                    return
            elif op[0] == CONV:
                sub = prove(L, (R - {k}) | {(y, op[1], x)}, d - 1)
                if sub:
                    yield _Node(L, R, "convR", [sub])
                    return
        for k in sorted(L):
            x, P, y = k
            op = N[P]
            if op[0] == COMP:
                sub = prove(L - {k}, R | {(x, op[1], y)}, d - 1)
                if sub:
                    yield _Node(L, R, "negL", [sub])
                    return
            elif op[0] == JOIN:
                a = prove((L - {k}) | {(x, op[1], y)}, R, d - 1)
                if a:
                    b = prove((L - {k}) | {(x, op[2], y)}, R, d - 1)
                    if b:
                        yield _Node(L, R, "plusL", [a, b])
                        return
            elif op[0] == CONV:
                sub = prove((L - {k}) | {(y, op[1], x)}, R, d - 1)
                if sub:
                    yield _Node(L, R, "convL", [sub])
                    return
            elif op[0] == PROD:
                used = _vars_of(L | R)
                free = [v for v in range(n) if v not in used]
                if free:
                    z = free[0]
                    sub = prove((L - {k}) | {(x, op[1], z), (z, op[2], y)}, R, d - 1)
                    if sub:
                        yield _Node(L, R, "compL", [sub], fresh=z)
                        return
        # non-invertible: relative product on the right, identity on the left
        for k in sorted(R):
            x, P, z = k
            op = N[P]
            if op[0] == PROD:
                for y in range(n):
                    a = prove(L, R | {(x, op[1], y)}, d - 1)
                    if a:
                        b = prove(L, R | {(y, op[2], z)}, d - 1)
                        if b:
                            yield _Node(L, R, "compR", [a, b])
                            return
        for k in sorted(L):
            z, P, y = k
            if P != IDENT_ID or z == y:
                continue
            for m in sorted(L):
                x, A, z2 = m
                if z2 == z and m != k:
                    sub = prove(L | {(x, A, y)}, R, d - 1)
                    if sub:
                        yield _Node(L, R, "idL", [sub])
                        return
        # assumption sequents, only for literals built with ; or ^
        for kind in sorted(assumptions, key=lambda a: a.value):
            for k in sorted(L):
                x, X, y = k
                for Y in _assumption_images(kind, X):
                    new = (x, Y, y)
                    if new in L:
                        continue
                    sub = prove(L | {new}, R, d - 1)
                    if sub:
                        yield _Node(L, R, "cut-" + kind.value, [sub])
                        return

    try:
        tree = prove(L0, R0, depth)
    except SearchExhausted:
        raise
    if tree is None:
        return None
    script = _linearize(tree, n, assumptions)
    res = check_script(script)
    if not res:
        raise AssertionError(f"search produced an unchecked script: {res}")
    return script


def _assumption_images(kind: AssumptionKind, X: int) -> list[int]:
    N = _I.nodes
    if kind is AssumptionKind.DENSITY:
        return [_I.node(PROD, X, X)] if N[X][0] in (CONV, PROD) else []
    if kind is AssumptionKind.COMMUTATIVITY:
        return [_I.node(PROD, N[X][2], N[X][1])] if N[X][0] == PROD else []
    if N[X][0] == CONV:
        return [N[X][1]]
    return [_I.node(CONV, X)] if N[X][0] in (CONV, PROD, ATOM) else []


def _linearize(tree: _Node, n: int, assumptions) -> ProofScript:
    script = ProofScript(name="search", n=n, assumptions=set(assumptions))

    def add(L, R, just: Justification) -> int:
        k = len(script.lines) + 1
        script.lines.append(ProofLine(k, keys_to_sequent(L, R), just))
        return k

    def walk(node: _Node) -> int:
        if node.rule in ("axiom", "id-axiom"):
            return add(node.L, node.R, Justification([], [node.rule], kind="axiom"))
        if node.rule.startswith("cut-"):
            kind = node.rule[4:]
            (sub,) = node.kids
            ref = walk(sub)
            new = next(iter(sub.L - node.L))
            x, Y, y = new
            X = next(p for (u, p, v) in node.L if (u, v) == (x, y)
                     and _assumption_pair(AssumptionKind(kind), p, Y))
            a = add({(x, X, y)}, {(x, Y, y)}, Justification([], [kind], kind="assumption"))
            return add(node.L, node.R, Justification([a, ref], ["cut"]))
        refs = [walk(k) for k in node.kids]
        return add(node.L, node.R, Justification(refs, [node.rule], node.fresh))

    script.goal_line = walk(tree)
    return script
