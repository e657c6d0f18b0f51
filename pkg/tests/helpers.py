"""Shared generators for the test suites."""

from __future__ import annotations

import itertools
import os

import numpy as np
from hypothesis import strategies as st

from relframe import census as C
from relframe import frames as F
from relframe import syntax as S

ATOMS = ("A", "B", "C")
EXTENDED = os.environ.get("RELFRAME_EXTENDED") == "1"


# ---- predicates ------------------------------------------------------------

def predicates(atoms=ATOMS, max_leaves: int = 12):
    """Terms over the full signature, core and derived."""
    leaves = st.one_of(
        st.sampled_from([S.Atom(a) for a in atoms]),
        st.sampled_from([S.Identity(), S.Zero(), S.One(), S.Diversity(), S.Truth()]),
    )
    unary = (S.Complement, S.Converse, S.BoolNeg, S.DeMorganNeg, S.Star)
    binary = (S.Join, S.RelProd, S.Meet, S.Dagger, S.Or, S.And, S.Implies, S.Fusion)

    def extend(children):
        return st.one_of(
            st.builds(lambda k, a: k(a), st.sampled_from(unary), children),
            st.builds(lambda k, a, b: k(a, b), st.sampled_from(binary), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def direct_value(f: F.Frame, h: dict[str, int], p: S.Term) -> int:
    """Set semantics of every operator, written out without desugaring."""
    full, ident = f.full, f.identity
    go = lambda t: direct_value(f, h, t)
    if isinstance(p, S.Atom):
        return h[p.name]
    if isinstance(p, (S.Identity, S.Truth)):
        return ident
    if isinstance(p, S.Zero):
        return 0
    if isinstance(p, S.One):
        return full
    if isinstance(p, S.Diversity):
        return full & ~ident
    if isinstance(p, (S.Join, S.Or)):
        return go(p.left) | go(p.right)
    if isinstance(p, (S.Meet, S.And)):
        return go(p.left) & go(p.right)
    if isinstance(p, (S.Complement, S.BoolNeg)):
        return full & ~go(p.arg)
    if isinstance(p, (S.Converse, S.Star)):
        return f.converse(go(p.arg))
    if isinstance(p, S.DeMorganNeg):
        return full & ~f.converse(go(p.arg))
    if isinstance(p, S.RelProd):
        return f.compose(go(p.left), go(p.right))
    if isinstance(p, S.Fusion):
        return f.compose(go(p.right), go(p.left))
    if isinstance(p, S.Dagger):
        return full & ~f.compose(full & ~go(p.left), full & ~go(p.right))
    if isinstance(p, S.Implies):
        return full & ~f.compose(f.converse(go(p.left)), full & ~go(p.right))
    raise TypeError(p)


# ---- frames ------------------------------------------------------------------

def involution_stars(n: int) -> list[tuple[int, ...]]:
    """One star per skeleton: 0 and the first s-1 elements fixed, the rest paired."""
    return [C.Skeleton(n, s).star for s in range(n, 0, -2)]


@st.composite
def frames(draw, min_n: int = 1, max_n: int = 3, single_identity: bool = False):
    """Arbitrary frames with an involutive star."""
    n = draw(st.integers(min_n, max_n))
    perm = draw(st.permutations(range(n)))
    base = draw(st.sampled_from(involution_stars(n)))
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i
    star = [perm[base[inv[x]]] for x in range(n)]
    if single_identity:
        ident = 1 << perm[0]
    else:
        ident = draw(st.integers(0, (1 << n) - 1))
    cube = draw(st.lists(st.booleans(), min_size=n ** 3, max_size=n ** 3))
    triples = [t for t, b in zip(itertools.product(range(n), repeat=3), cube) if b]
    return F.Frame(n, triples, star, ident)


def close_triples(triples, gens):
    out = set(triples)
    todo = list(out)
    while todo:
        t = todo.pop()
        for g in gens:
            u = g(t)
            if u not in out:
                out.add(u)
                todo.append(u)
    return out


def reflections(star):
    return (lambda t: (star[t[0]], t[2], t[1]), lambda t: (t[2], star[t[1]], t[0]))


@st.composite
def na_frames(draw, min_n: int = 2, max_n: int = 4):
    """Frames with identity {0} closed under both reflections: NA-frames."""
    n = draw(st.integers(min_n, max_n))
    star = draw(st.sampled_from(involution_stars(n)))
    seed = draw(st.lists(st.tuples(*[st.integers(1, n - 1)] * 3), max_size=8))
    ident = [(x, 0, x) for x in range(n)]
    return F.Frame(n, close_triples(ident + seed, reflections(star)), star, 1)


def orbits(n: int, star, gens, fixed_rows: bool = True) -> list[frozenset]:
    """Orbits of non-identity triples (no coordinate equal to 0) under ``gens``."""
    seen, out = set(), []
    for t in itertools.product(range(1, n), repeat=3):
        if t in seen:
            continue
        orb = frozenset(close_triples([t], gens))
        seen |= orb
        out.append(orb)
    return out


def identity_triples(n: int, star) -> set:
    return close_triples([(x, 0, x) for x in range(n)], reflections(star))


def all_na_frames(n: int) -> list[F.Frame]:
    """Every NA-frame on n elements with identity {0}, one per isomorphism type."""
    seen, out = set(), []
    for star in involution_stars(n):
        base = identity_triples(n, star)
        orbs = orbits(n, star, reflections(star))
        for bits in itertools.product((0, 1), repeat=len(orbs)):
            tr = set(base)
            for b, o in zip(bits, orbs):
                if b:
                    tr |= o
            f = F.Frame(n, tr, star, 1)
            key = C.canonical_form(f)
            if key not in seen:
                seen.add(key)
                out.append(f)
    return out


def random_identity_frames(n: int, count: int, seed: int, left_reflection: bool):
    """Frames with identity {0}: either closed under left reflection, or not."""
    rng = np.random.default_rng(seed)
    lr = lambda star: (lambda t: (star[t[0]], t[2], t[1]),)
    out = []
    stars = involution_stars(n)
    while len(out) < count:
        star = stars[rng.integers(len(stars))]
        tr = {(x, 0, x) for x in range(n)}
        if left_reflection:
            tr = close_triples(tr, lr(star))
        free = [t for t in itertools.product(range(n), range(1, n), range(n))
                if not (left_reflection and t[2] == 0)]
        pick = rng.random(len(free)) < rng.uniform(0.1, 0.9)
        tr |= {t for t, b in zip(free, pick) if b}
        if left_reflection:
            tr = close_triples(tr, lr(star))
        f = F.Frame(n, tr, star, 1)
        if not F.check_condition(f, "identity"):
            continue
        if F.check_condition(f, "left-reflection") != left_reflection:
            continue
        out.append(f)
    return out
