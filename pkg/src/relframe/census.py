"""Cycles, frame generation over a fixed involution, and isomorphism censuses."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .frames import Frame, FrameError

CLASSES = ("comm-na", "sym-na", "dense-comm-na", "dense-sym-na", "kr", "tr")

# 2**MAX_SELECTABLE frames is the most one skeleton may enumerate
MAX_SELECTABLE = 22


class CensusBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class Skeleton:
    """Carrier ``0..n-1`` with ``s`` star-fixed elements.

    Elements ``1..s-1`` are fixed by star and the rest come in consecutive
    pairs ``(s, s+1), (s+2, s+3), ...``.
    """
    n: int
    s: int

    def __post_init__(self):
        if not 1 <= self.s <= self.n:
            raise ValueError(f"need 1 <= s <= n, got n={self.n} s={self.s}")
        if (self.n - self.s) % 2:
            raise ValueError(f"n - s must be even, got n={self.n} s={self.s}")

    @property
    def star(self) -> tuple[int, ...]:
        st = list(range(self.n))
        for x in range(self.s, self.n, 2):
            st[x], st[x + 1] = x + 1, x
        return tuple(st)

    def names(self) -> list[str]:
        out = ["0"]
        letters = "abcdefghijklmnopqrstuvwxyz"
        out += [letters[i] for i in range(self.s - 1)]
        k = self.s - 1
        for x in range(self.s, self.n, 2):
            out += [letters[k], letters[k] + "*"]
            k += 1
        return out

    def frame(self, triples) -> Frame:
        return Frame(self.n, triples, self.star, 1, names=self.names())


def skeletons(n: int, symmetric_only: bool = False) -> list[Skeleton]:
    """One skeleton per admissible s, largest s first."""
    if symmetric_only:
        return [Skeleton(n, n)]
    return [Skeleton(n, s) for s in range(n, 0, -2)]


def base_triples(sk: Skeleton) -> frozenset[tuple[int, int, int]]:
    st = sk.star
    out = {(0, 0, 0)}
    for x in range(sk.n):
        sx = st[x]
        out |= {(0, x, x), (x, sx, 0), (sx, 0, sx), (x, 0, x), (sx, x, 0), (0, sx, sx)}
    return frozenset(out)


# ---- cycles ----------------------------------------------------------------

@dataclass(frozen=True)
class Cycle:
    triples: frozenset
    type: int

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(sorted(self.triples))


def cycle_closure(star: Sequence[int], t: tuple[int, int, int]) -> frozenset:
    """Close one triple under the two reflections and commutativity."""
    todo = [t]
    seen = set()
    while todo:
        a, b, c = todo.pop()
        if (a, b, c) in seen:
            continue
        seen.add((a, b, c))
        todo.extend([(star[a], c, b), (c, star[b], a), (b, a, c)])
    return frozenset(seen)


def cycle_type(star: Sequence[int], cyc: frozenset) -> int:
    elems = {v for t in cyc for v in t}
    sym = {e for e in elems if star[e] == e}
    pairs = {frozenset((e, star[e])) for e in elems if star[e] != e}
    key = (len(sym), len(pairs))
    simple = {(1, 0): 1, (2, 0): 2, (3, 0): 3, (2, 1): 7, (1, 2): 8, (0, 3): 13}
    if key in simple:
        return simple[key]
    if key == (1, 1):
        (a,) = sym
        if any(sum(v == a for v in t) == 2 for t in cyc):
            return 6
        if any(x == y and star[x] != x for x, y, _ in cyc):
            return 5
        return 4
    if key == (0, 1):
        return 9 if len(cyc) == 6 else 10
    if key == (0, 2):
        return 11 if any(x == y for x, y, _ in cyc) else 12
    raise ValueError(f"unexpected cycle shape {key}")


# rows whose cycles are forced in by density
DENSE_FORCED = frozenset({1, 9})


def cycles(sk: Skeleton) -> list[Cycle]:
    """All cycles of nonzero triples, in order of their least triple."""
    st = sk.star
    seen: set = set()
    out = []
    for t in itertools.product(range(1, sk.n), repeat=3):
        if t in seen:
            continue
        c = cycle_closure(st, t)
        seen |= c
        out.append(Cycle(c, cycle_type(st, c)))
    return out


def table_counts(n: int, s: int) -> dict[int, int]:
    """Expected number of cycles of each type."""
    m = n - s
    f = {
        1: Fraction(s - 1),
        2: Fraction((s - 1) * (s - 2)),
        3: Fraction((s - 1) * (s - 2) * (s - 3), 6),
        4: Fraction((s - 1) * m, 2),
        5: Fraction((s - 1) * m, 2),
        6: Fraction((s - 1) * m, 2),
        7: Fraction((s - 1) * (s - 2) * m, 4),
        8: Fraction((s - 1) * m * (m - 2), 4),
        9: Fraction(m, 2),
        10: Fraction(m, 2),
        11: Fraction(m * (m - 2), 2),
        12: Fraction(m * (m - 2), 4),
        13: Fraction(m * (m - 2) * (m - 4), 12),
    }
    return {k: int(v) for k, v in f.items()}


# ---- closed forms ----------------------------------------------------------

@dataclass(frozen=True)
class Counts:
    F: int
    G: int
    P: int

    def __iter__(self):
        return iter((self.F, self.G, self.P))


def count_formulas(n: int, s: int) -> Counts:
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got n={n} s={s}")
    if (n - s) % 2:
        raise ValueError(f"n - s must be even, got n={n} s={s}")
    m = n - s
    F = (Fraction((s - 1) * s * (s + 1), 6) + Fraction(m * (m + 1) * (m + 2), 12)
         + Fraction((s - 1) * m * (n + 2), 4))
    G = (Fraction((s - 1) * (s - 2) * (s + 3), 6) + Fraction(m * (m - 1) * (m + 4), 12)
         + Fraction((s - 1) * m * (n + 2), 4))
    P = math.factorial(s - 1) * math.factorial(m // 2) * 2 ** (m // 2)
    assert F.denominator == 1 and G.denominator == 1
    return Counts(int(F), int(G), P)


# ---- automorphisms and canonical forms --------------------------------------

def automorphisms(star: Sequence[int]) -> list[tuple[int, ...]]:
    """Permutations fixing 0 that commute with ``star``."""
    n = len(star)
    fixed = [x for x in range(1, n) if star[x] == x]
    pairs = [(x, star[x]) for x in range(1, n) if x < star[x]]
    out = []
    for pf in itertools.permutations(fixed):
        for pp in itertools.permutations(pairs):
            for flips in itertools.product((False, True), repeat=len(pairs)):
                perm = [0] * n
                for x, y in zip(fixed, pf):
                    perm[x] = y
                for (x, sx), (y, sy), flip in zip(pairs, pp, flips):
                    perm[x], perm[sx] = (sy, y) if flip else (y, sy)
                out.append(tuple(perm))
    return out


def brute_automorphisms(star: Sequence[int]) -> int:
    """Count by trying every permutation; the slow reference for ``automorphisms``."""
    n = len(star)
    count = 0
    for rest in itertools.permutations(range(1, n)):
        perm = (0,) + rest
        if all(perm[star[x]] == star[perm[x]] for x in range(n)):
            count += 1
    return count


def _encode(n: int, triples) -> bytes:
    cube = np.zeros(n ** 3, dtype=np.uint8)
    for x, y, z in triples:
        cube[(x * n + y) * n + z] = 1
    return np.packbits(cube).tobytes()


def canonical_form(f: Frame) -> tuple:
    """Least triple-cube encoding over all relabelings fixing 0 and commuting with star."""
    if f.identity != 1:
        raise FrameError("canonical forms need identity set {0}")
    best = None
    for perm in automorphisms(f.star):
        enc = _encode(f.n, ((perm[x], perm[y], perm[z]) for x, y, z in f.triples))
        if best is None or enc < best:
            best = enc
    return (f.n, f.star, best)


# ---- enumeration ----------------------------------------------------------

@dataclass
class Space:
    """The frames over one skeleton as bitmasks over the selectable cycles."""
    sk: Skeleton
    dense: bool
    cycles: list[Cycle]
    forced: list[Cycle]
    free: list[Cycle]

    @property
    def size(self) -> int:
        return 1 << len(self.free)

    def triples(self, mask: int) -> set:
        out = set(base_triples(self.sk))
        for c in self.forced:
            out |= c.triples
        for i, c in enumerate(self.free):
            if mask >> i & 1:
                out |= c.triples
        return out

    def frame(self, mask: int) -> Frame:
        return self.sk.frame(self.triples(mask))

    def cubes(self, masks: np.ndarray) -> np.ndarray:
        n = self.sk.n
        base = np.zeros((n, n, n), dtype=bool)
        for t in base_triples(self.sk):
            base[t] = True
        for c in self.forced:
            for t in c.triples:
                base[t] = True
        out = np.broadcast_to(base, (len(masks), n, n, n)).copy()
        for i, c in enumerate(self.free):
            on = (masks >> i) & 1 == 1
            if not on.any():
                continue
            idx = tuple(np.array(list(c.triples)).T)
            sub = out[on]
            sub[:, idx[0], idx[1], idx[2]] = True
            out[on] = sub
        return out

    @property
    def cycle_perms(self) -> np.ndarray:
        """For each automorphism, the permutation it induces on free cycles."""
        where = {}
        for i, c in enumerate(self.free):
            for t in c.triples:
                where[t] = i
        rows = []
        for perm in automorphisms(self.sk.star):
            row = []
            for c in self.free:
                x, y, z = next(iter(c.triples))
                row.append(where[(perm[x], perm[y], perm[z])])
            rows.append(row)
        return np.array(rows, dtype=np.int64).reshape(len(rows), len(self.free))


def space(sk: Skeleton, dense: bool = False) -> Space:
    cs = cycles(sk)
    forced = [c for c in cs if dense and c.type in DENSE_FORCED]
    free = [c for c in cs if not (dense and c.type in DENSE_FORCED)]
    return Space(sk, dense, cs, forced, free)


def pasch_mask(cubes: np.ndarray) -> np.ndarray:
    """Which frames satisfy (v;w);y within v;(w;y) at the level of atoms."""
    N, n = cubes.shape[0], cubes.shape[1]
    R = cubes.astype(np.float32)
    # lhs[v,w,y,u] = sum_z R[v,w,z] R[z,y,u]
    lhs = R.reshape(N, n * n, n) @ R.reshape(N, n, n * n)
    # rhs[v,w,y,u] = sum_t R[w,y,t] R[v,t,u]
    wy_t = R.reshape(N, 1, n * n, n)
    rhs = (wy_t @ R).reshape(N, n, n, n, n)
    lhs = lhs.reshape(N, n, n, n, n)
    bad = (lhs > 0) & ~(rhs > 0)
    return ~bad.reshape(N, -1).any(axis=1)


def _masks_passing(sp: Space, pasch: bool, chunk: int = 1 << 14) -> np.ndarray:
    if len(sp.free) > MAX_SELECTABLE:
        raise CensusBudgetError(f"{len(sp.free)} selectable cycles exceed the budget")
    masks = np.arange(sp.size, dtype=np.int64)
    if not pasch:
        return masks
    keep = []
    for start in range(0, len(masks), chunk):
        part = masks[start:start + chunk]
        keep.append(part[pasch_mask(sp.cubes(part))])
    return np.concatenate(keep) if keep else masks[:0]


def enumerate_frames(sk: Skeleton, dense: bool = False, pasch: bool = False) -> Iterator[Frame]:
    """Every frame R0 + union of cycles, optionally dense and/or Pasch."""
    sp = space(sk, dense)
    for m in _masks_passing(sp, pasch):
        yield sp.frame(int(m))


def _canonical_masks(sp: Space, masks: np.ndarray) -> np.ndarray:
    perms = sp.cycle_perms
    best = None
    for row in perms:
        img = np.zeros_like(masks)
        for i, j in enumerate(row):
            img |= ((masks >> i) & 1) << j
        best = img if best is None else np.minimum(best, img)
    return best if best is not None else masks


@dataclass
class ClassCount:
    s: int
    labeled: int
    iso: int


@dataclass
class CountReport:
    cls: str
    n: int
    labeled_count: int
    iso_class_count: int
    breakdown: list[ClassCount] = field(default_factory=list)
    representatives: list[Frame] = field(default_factory=list)

    def format(self, fmt: str = "text") -> str:
        if fmt == "tsv":
            rows = ["class\tn\ts\tlabeled\tiso"]
            rows += [f"{self.cls}\t{self.n}\t{b.s}\t{b.labeled}\t{b.iso}" for b in self.breakdown]
            rows.append(f"{self.cls}\t{self.n}\tall\t{self.labeled_count}\t{self.iso_class_count}")
            return "\n".join(rows) + "\n"
        lines = [f"class: {self.cls}", f"n: {self.n}"]
        for b in self.breakdown:
            lines.append(f"  s={b.s}: labeled {b.labeled}, iso {b.iso}")
        lines += [f"labeled: {self.labeled_count}", f"iso: {self.iso_class_count}"]
        return "\n".join(lines) + "\n"


def class_spec(cls: str) -> tuple[bool, bool, bool]:
    """(symmetric only, dense, pasch) for a census class."""
    table = {
        "comm-na": (False, False, False),
        "sym-na": (True, False, False),
        "dense-comm-na": (False, True, False),
        "dense-sym-na": (True, True, False),
        "kr": (True, True, True),
        "tr": (False, True, True),
    }
    try:
        return table[cls]
    except KeyError:
        raise ValueError(f"unknown class {cls!r}; choose from {', '.join(CLASSES)}") from None


def census(n: int, cls: str, keep_frames: bool = False) -> CountReport:
    """Labeled and isomorphism-class counts of a frame class on n elements."""
    if n < 1:
        raise ValueError("n must be positive")
    sym_only, dense, pasch = class_spec(cls)
    report = CountReport(cls, n, 0, 0)
    for sk in skeletons(n, sym_only):
        sp = space(sk, dense)
        masks = _masks_passing(sp, pasch)
        canon = _canonical_masks(sp, masks)
        reps = np.unique(canon)
        report.breakdown.append(ClassCount(sk.s, len(masks), len(reps)))
        report.labeled_count += len(masks)
        report.iso_class_count += len(reps)
        if keep_frames:
            report.representatives += [sp.frame(int(m)) for m in reps]
    return report


def representatives(n: int, cls: str) -> list[Frame]:
    """One frame per isomorphism class, each in its least-mask labeling."""
    return census(n, cls, keep_frames=True).representatives


def sample_random(sk: Skeleton, dense: bool = False, seed: int = 0) -> Frame:
    rng = np.random.default_rng(seed)
    sp = space(sk, dense)
    bits_ = rng.integers(0, 2, size=len(sp.free))
    mask = sum(int(b) << i for i, b in enumerate(bits_))
    return sp.frame(mask)


# ---- resumable validity classification ---------------------------------------

def classify_validity(frames: Sequence[Frame], preds: dict, checkpoint: str | None = None,
                      jobs: int = 1, bit_budget: int = 64, log=None) -> dict[tuple[int, str], str]:
    """VALID/INVALID for every (frame index, predicate name) pair.

    With ``checkpoint`` the verdicts and the progress of the sweep in
    flight are saved to that JSON file, and a rerun picks up from it.
    """
    import json
    import os
    from . import validity as V

    state = {"done": {}, "partial": {}}
    if checkpoint and os.path.exists(checkpoint):
        with open(checkpoint, encoding="utf-8") as fh:
            state = json.load(fh)

    def save():
        if checkpoint:
            tmp = checkpoint + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(state, fh, sort_keys=True)
            os.replace(tmp, checkpoint)

    out = {}
    for i, f in enumerate(frames):
        for name, p in preds.items():
            key = f"{i}:{name}"
            if key in state["done"]:
                out[i, name] = state["done"][key]
                continue
            start = state["partial"].get(key, 0)

            def progress(done, total, key=key):
                state["partial"][key] = done
                save()
                if log:
                    log(f"frame {i} {name}: chunk {done}/{total}")

            v = V.decide_valid(f, p, bit_budget=bit_budget, jobs=jobs, start_chunk=start,
                               progress=progress)
            word = V.verdict_word(v)
            state["done"][key] = word
            state["partial"].pop(key, None)
            save()
            out[i, name] = word
            if log:
                log(f"frame {i} {name}: {word}")
    return out
