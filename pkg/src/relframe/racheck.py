"""Equational checks on complex algebras, relational bases and the diamond property."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import syntax as S
from .frames import Frame, bits
from .validity import equation_holds, BudgetError


class Axiom(enum.Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R4P = "R4'"
    R5 = "R5"
    R6 = "R6"
    R7 = "R7"
    R8 = "R8"
    R9 = "R9"
    R10 = "R10"


PROPERTIES = ("dense", "commutative", "symmetric", "integral")

AXIOM_EQUATIONS = {
    Axiom.R1: ("A + B", "B + A"),
    Axiom.R2: ("A + (B + C)", "(A + B) + C"),
    Axiom.R3: ("-(-A + -B) + -(-A + B)", "A"),
    Axiom.R4: ("A ; (B ; C)", "(A ; B) ; C"),
    Axiom.R4P: ("A ; (B ; 1)", "(A ; B) ; 1"),
    Axiom.R5: ("(A + B) ; C", "A ; C + B ; C"),
    Axiom.R6: ("A ; 1'", "A"),
    Axiom.R7: ("A^^", "A"),
    Axiom.R8: ("(A + B)^", "A^ + B^"),
    Axiom.R9: ("(A ; B)^", "B^ ; A^"),
    Axiom.R10: ("A^ ; -(A ; B) + -B", "-B"),
}

NA_AXIOMS = (Axiom.R1, Axiom.R2, Axiom.R3, Axiom.R5, Axiom.R6, Axiom.R7,
             Axiom.R8, Axiom.R9, Axiom.R10)


def parse_axiom(name: str) -> Axiom:
    name = name.strip().upper().replace("’", "'")
    for a in Axiom:
        if a.value.upper() == name:
            return a
    raise ValueError(f"unknown axiom {name!r}")


def check_axiom(f: Frame, a: Axiom | str, bit_budget: int = 24) -> bool:
    """Test the equation on every assignment of subsets of ``f``."""
    if isinstance(a, str):
        if a in PROPERTIES:
            return properties(f)[a]
        a = parse_axiom(a)
    lhs, rhs = AXIOM_EQUATIONS[a]
    return equation_holds(f, S.parse_predicate(lhs), S.parse_predicate(rhs), bit_budget)


def properties(f: Frame) -> dict[str, bool]:
    size = 1 << f.n
    if f.n > 12:
        raise BudgetError("subset-level property checks need at most 12 elements")
    X = np.arange(size)
    lut = f.compose_lut if f.n <= 10 else None
    if lut is not None:
        XX = lut[X, X].astype(np.int64)
        dense = bool(np.all(XX & X == X))
        commutative = bool(np.array_equal(lut, lut.T))
        zero_rows = lut == 0
        nonzero = X != 0
        # x;y = 0 with both nonzero breaks integrality
        integral = f.n > 0 and not bool(np.any(zero_rows[np.ix_(nonzero, nonzero)]))
    else:
        dense = all(f.compose(x, x) & x == x for x in range(size))
        commutative = all(f.compose(x, y) == f.compose(y, x) for x in range(size) for y in range(x))
        integral = all(f.compose(x, y) for x in range(1, size) for y in range(1, size))
    symmetric = all(f.converse(x) == x for x in range(size))
    return {"dense": dense, "commutative": commutative, "symmetric": symmetric,
            "integral": integral}


def algebra_class(f: Frame) -> dict[str, bool]:
    """NA/SA/RA membership decided by the axioms themselves."""
    na = all(check_axiom(f, a) for a in NA_AXIOMS)
    return {"NA": na, "SA": na and check_axiom(f, Axiom.R4P), "RA": na and check_axiom(f, Axiom.R4)}


# ---- relational bases ------------------------------------------------------

class PreconditionError(ValueError):
    pass


@dataclass
class BasisResult:
    exists: bool
    basis: list[np.ndarray]
    rounds: int
    initial: int

    def __bool__(self):
        return self.exists


def _pairs(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def _candidates(f: Frame, d: int, limit: int) -> np.ndarray:
    """All d x d atom matrices satisfying condition (1)."""
    n, star, T = f.n, f.star, f.compose_table
    ids = list(bits(f.identity))
    pairs = _pairs(d)
    m = np.full((d, d), -1, dtype=np.int16)
    mats: list[np.ndarray] = []

    def consistent(i, j):
        # triangles through the freshly set edge {i, j} whose edges are all known
        for k in range(d):
            for a, b, c in ((i, j, k), (j, i, k), (i, k, j), (j, k, i), (k, i, j), (k, j, i)):
                if m[a, b] < 0 or m[b, c] < 0 or m[a, c] < 0:
                    continue
                if not T[m[a, b]][m[b, c]] >> int(m[a, c]) & 1:
                    return False
        return True

    def rec(p):
        if p == len(pairs):
            mats.append(m.copy())
            if len(mats) > limit:
                raise BudgetError("too many basis candidates")
            return
        i, j = pairs[p]
        for a in range(n):
            m[i, j], m[j, i] = a, star[a]
            if consistent(i, j):
                rec(p + 1)
        m[i, j] = m[j, i] = -1

    for diag in itertools.product(ids, repeat=d):
        for i, e in enumerate(diag):
            m[i, i] = e
        if all(consistent(i, i) for i in range(d)):
            rec(0)
    return np.array(mats, dtype=np.int16).reshape(-1, d, d)


def relational_basis_exists(f: Frame, d: int, limit: int = 2_000_000,
                            check_precondition: bool = True) -> BasisResult:
    """Greatest-fixpoint search for a d-dimensional relational basis of Cm(f)."""
    from .frames import classify
    if d < 3:
        raise ValueError("dimension must be at least 3")
    if check_precondition and not classify(f).sa:
        raise PreconditionError("relational bases are only defined here for SA-frames")
    cands = _candidates(f, d, limit)
    initial = len(cands)
    T = f.compose_table
    alive = np.ones(len(cands), dtype=bool)
    rounds = 0
    # index matrices by everything except row/column k, for the witness lookups
    while True:
        rounds += 1
        keys: list[dict] = []
        for k in range(d):
            others = [x for x in range(d) if x != k]
            table: dict[tuple, set] = {}
            for idx in np.nonzero(alive)[0]:
                mtx = cands[idx]
                key = mtx[np.ix_(others, others)].tobytes()
                table.setdefault(key, set()).update(
                    (i, j, int(mtx[i, k]), int(mtx[k, j])) for i in others for j in others)
            keys.append(table)
        removed = False
        for idx in np.nonzero(alive)[0]:
            mtx = cands[idx]
            good = True
            for k in range(d):
                others = [x for x in range(d) if x != k]
                avail = keys[k].get(mtx[np.ix_(others, others)].tobytes(), set())
                for i in others:
                    for j in others:
                        xij = int(mtx[i, j])
                        for a in range(f.n):
                            row = T[a]
                            for b in range(f.n):
                                if row[b] >> xij & 1 and (i, j, a, b) not in avail:
                                    good = False
                                    break
                            if not good:
                                break
                        if not good:
                            break
                    if not good:
                        break
                if not good:
                    break
            if not good:
                alive[idx] = False
                removed = True
        if not removed:
            break
    survivors = [cands[i] for i in np.nonzero(alive)[0]]
    covered = {int(m[0, 1]) for m in survivors}
    exists = bool(survivors) and covered == set(range(f.n))
    return BasisResult(exists, survivors, rounds, initial)


def format_basis(f: Frame, mtx: np.ndarray) -> str:
    return "\n".join(" ".join(f.names[int(v)] for v in row) for row in mtx)


# ---- diamond property ------------------------------------------------------

def cycle_of(f: Frame, x: int, y: int, z: int) -> frozenset[tuple[int, int, int]]:
    """Closure of one triple under the reflections and commutativity."""
    s = f.star
    todo = [(x, y, z)]
    seen = set()
    while todo:
        t = todo.pop()
        if t in seen:
            continue
        seen.add(t)
        a, b, c = t
        todo.extend([(s[a], c, b), (c, s[b], a), (b, a, c)])
    return frozenset(seen)


def diamond(f: Frame, t: int) -> bool:
    """The diamond property D(t) for a frame whose identity is {0}."""
    if t < 1:
        raise ValueError("t must be positive")
    nz = range(1, f.n)
    if not nz:
        return False
    works: dict[tuple[int, int], int] = {}
    for x in nz:
        for y in nz:
            mask = 0
            for z in nz:
                if cycle_of(f, x, y, z) <= f.triples:
                    mask |= 1 << z
            works[x, y] = mask
    pairs = list(works)
    for combo in itertools.combinations_with_replacement(pairs, t):
        m = (1 << f.n) - 2
        for pr in combo:
            m &= works[pr]
        if not m:
            return False
    return True
