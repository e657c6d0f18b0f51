"""Finite frames <K, R, *, I> and their complex algebras.

Elements are the integers ``0..n-1``; a subset of the carrier is an int
bit mask.  ``compose_table[x][y]`` holds the mask of all ``z`` with
``(x, y, z)`` in ``R``, so composing two subsets is an OR-fold over that
table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_ELEMENTS = 30


class FrameError(ValueError):
    pass


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << e
    return m


class Condition(enum.Enum):
    LEFT_ROTATION = "left-rotation"
    RIGHT_ROTATION = "right-rotation"
    CENTER_REFLECTION = "center-reflection"
    LEFT_REFLECTION = "left-reflection"
    RIGHT_REFLECTION = "right-reflection"
    IDENTITY = "identity"
    INVOLUTION = "involution"
    SEMI_PASCH = "semi-pasch"
    PASCH = "pasch"
    DENSE = "dense"
    COMM = "comm"
    SYMM = "symm"
    P1 = "p1"
    P2 = "p2"
    P3 = "p3"
    P4 = "p4"
    P5 = "p5"


class Frame:
    """An immutable finite frame.

    ``star`` is a tuple giving the image of each element; ``identity`` is a
    bit mask.  ``names`` are used only for display.
    """

    def __init__(self, n: int, triples: Iterable[tuple[int, int, int]],
                 star: Sequence[int], identity: int | Iterable[int],
                 names: Sequence[str] | None = None, name: str = ""):
        if n < 1:
            raise FrameError("a frame needs at least one element")
        if n > MAX_ELEMENTS:
            raise FrameError(f"carrier of size {n} exceeds the {MAX_ELEMENTS}-bit limit")
        self.n = n
        trip = frozenset((int(x), int(y), int(z)) for x, y, z in triples)
        for t in trip:
            if not all(0 <= v < n for v in t):
                raise FrameError(f"triple {t} out of range for {n} elements")
        self.triples = trip
        star = tuple(int(s) for s in star)
        if len(star) != n or any(not 0 <= s < n for s in star):
            raise FrameError("star must map 0..n-1 into itself")
        self.star = star
        if not isinstance(identity, int):
            identity = mask_of(identity)
        if identity >> n:
            raise FrameError("identity set out of range")
        self.identity = identity
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n))
        if len(self.names) != n:
            raise FrameError("wrong number of element names")
        self.name = name
        table = [[0] * n for _ in range(n)]
        for x, y, z in trip:
            table[x][y] |= 1 << z
        self.compose_table = tuple(tuple(row) for row in table)

    # -- basic accessors ---------------------------------------------------

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Frame{label} n={self.n} |R|={len(self.triples)}>"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (self.n, self.triples, self.star, self.identity) == (
            other.n, other.triples, other.star, other.identity)

    def __hash__(self) -> int:
        return hash((self.n, self.triples, self.star, self.identity))

    def has(self, x: int, y: int, z: int) -> bool:
        return bool(self.compose_table[x][y] >> z & 1)

    @cached_property
    def cube(self) -> np.ndarray:
        c = np.zeros((self.n,) * 3, dtype=bool)
        for x, y, z in self.triples:
            c[x, y, z] = True
        return c

    def format_set(self, mask: int) -> str:
        return "{" + ",".join(self.names[i] for i in bits(mask)) + "}"

    # -- complex algebra ---------------------------------------------------

    @cached_property
    def _row_lut(self) -> tuple[tuple[int, ...], ...] | None:
        # row_lut[x][Y] = {x};Y, affordable for small carriers
        if self.n > 12:
            return None
        size = 1 << self.n
        rows = []
        for x in range(self.n):
            row = [0] * size
            cx = self.compose_table[x]
            for Y in range(1, size):
                low = Y & -Y
                row[Y] = row[Y ^ low] | cx[low.bit_length() - 1]
            rows.append(tuple(row))
        return tuple(rows)

    @cached_property
    def _conv_lut(self) -> tuple[int, ...] | None:
        if self.n > 16:
            return None
        size = 1 << self.n
        lut = [0] * size
        for X in range(1, size):
            low = X & -X
            lut[X] = lut[X ^ low] | (1 << self.star[low.bit_length() - 1])
        return tuple(lut)

    def union(self, X: int, Y: int) -> int:
        return X | Y

    def complement(self, X: int) -> int:
        return self.full & ~X

    def compose(self, X: int, Y: int) -> int:
        out = 0
        lut = self._row_lut
        if lut is not None:
            for x in bits(X):
                out |= lut[x][Y]
            return out
        table = self.compose_table
        for x in bits(X):
            row = table[x]
            for y in bits(Y):
                out |= row[y]
        return out

    def converse(self, X: int) -> int:
        lut = self._conv_lut
        if lut is not None:
            return lut[X]
        out = 0
        for x in bits(X):
            out |= 1 << self.star[x]
        return out

    def identity_value(self) -> int:
        return self.identity

    @cached_property
    def compose_lut(self) -> np.ndarray:
        """Full table ``lut[X, Y] = X;Y`` over all subsets (small frames only)."""
        if self.n > 10:
            raise FrameError("subset composition table too large")
        size = 1 << self.n
        rows = np.array(self._row_lut, dtype=np.int64)   # (n, size)
        lut = np.zeros((size, size), dtype=np.int64)
        for X in range(1, size):
            low = X & -X
            lut[X] = lut[X ^ low] | rows[low.bit_length() - 1]
        return lut.astype(value_dtype(self.n))

    @cached_property
    def converse_lut(self) -> np.ndarray:
        return np.array(self._conv_lut, dtype=value_dtype(self.n))

    # -- transformations ---------------------------------------------------

    def relabel(self, perm: Sequence[int]) -> "Frame":
        """The isomorphic copy in which element ``x`` is renamed ``perm[x]``."""
        inv = [0] * self.n
        for i, p in enumerate(perm):
            inv[p] = i
        triples = [(perm[x], perm[y], perm[z]) for x, y, z in self.triples]
        star = [perm[self.star[inv[i]]] for i in range(self.n)]
        ident = mask_of(perm[i] for i in bits(self.identity))
        names = [self.names[inv[i]] for i in range(self.n)]
        return Frame(self.n, triples, star, ident, names=names, name=self.name)

    def with_triples(self, triples: Iterable[tuple[int, int, int]]) -> "Frame":
        return Frame(self.n, triples, self.star, self.identity, names=self.names, name=self.name)


def value_dtype(n: int):
    if n <= 8:
        return np.uint8
    if n <= 16:
        return np.uint16
    if n <= 32:
        return np.uint32
    return np.uint64


# ---- constructors ----------------------------------------------------------

def make_pair_frame(m: int) -> Frame:
    """The pair-frame on ``{0..m-1}``: element ``(x, y)`` is ``x*m + y``."""
    if m < 1:
        raise FrameError("m must be positive")
    if m * m > MAX_ELEMENTS:
        raise FrameError(f"pair-frame on {m} points needs {m * m} elements")
    idx = lambda x, y: x * m + y
    triples = [(idx(x, y), idx(y, z), idx(x, z))
               for x in range(m) for y in range(m) for z in range(m)]
    star = [idx(y, x) for x in range(m) for y in range(m)]
    ident = mask_of(idx(x, x) for x in range(m))
    names = [f"{x}{y}" for x in range(m) for y in range(m)]
    return Frame(m * m, triples, star, ident, names=names, name=f"pairs{m}")


def make_cyclic_group_frame(m: int) -> Frame:
    """Frame of the cyclic group Z_m: R = {(x, y, x+y)}, * = negation, I = {0}."""
    if m < 1:
        raise FrameError("m must be positive")
    triples = [(x, y, (x + y) % m) for x in range(m) for y in range(m)]
    star = [(-x) % m for x in range(m)]
    return Frame(m, triples, star, 1, name=f"Z{m}")


def frame_from_table(names: Sequence[str], table: dict[str, dict[str, str]] | Sequence[Sequence[str]],
                     star: dict[str, str] | None = None, identity: Iterable[str] = ("0",),
                     name: str = "") -> Frame:
    """Build a frame from a composition table of atoms.

    ``table[i][j]`` is a string of element names (separated by commas or
    spaces) giving ``{names[i]};{names[j]}``.
    """
    index = {nm: i for i, nm in enumerate(names)}
    n = len(names)
    triples = []
    for i in range(n):
        for j in range(n):
            cell = table[i][j]
            for tok in cell.replace(",", " ").split():
                triples.append((i, j, index[tok]))
    st = list(range(n)) if star is None else [index[star.get(nm, nm)] for nm in names]
    return Frame(n, triples, st, mask_of(index[e] for e in identity), names=names, name=name)


def _k1() -> Frame:
    names = ["0", "a", "b", "c"]
    table = [
        ["0", "a", "b", "c"],
        ["a", "0 a", "c", "b"],
        ["b", "c", "0 b", "a"],
        ["c", "b", "a", "0 c"],
    ]
    return frame_from_table(names, table, name="k1")


def _k2() -> Frame:
    names = ["0", "a", "b", "b*"]
    table = [
        ["0", "a", "b", "b*"],
        ["a", "0 a b b*", "a b", "a"],
        ["b", "a", "b", "0 a b b*"],
        ["b*", "a b*", "0 b b*", "b*"],
    ]
    return frame_from_table(names, table, star={"b": "b*", "b*": "b"}, name="k2")


def _k3() -> Frame:
    f = make_cyclic_group_frame(2)
    return Frame(2, f.triples, f.star, f.identity, names=["0", "a"], name="k3")


def _k4() -> Frame:
    names = ["0", "a", "a*"]
    table = [
        ["0", "a", "a*"],
        ["a", "a a*", "0 a a*"],
        ["a*", "0 a a*", "a*"],
    ]
    return frame_from_table(names, table, star={"a": "a*", "a*": "a"}, name="k4")


def _k5() -> Frame:
    names = ["1'", "a", "b", "c"]
    table = [
        ["1'", "a", "b", "c"],
        ["a", "1' a c", "b c", "a b"],
        ["b", "b c", "1' a b", "a c"],
        ["c", "a b", "a c", "1' b c"],
    ]
    return frame_from_table(names, table, identity=["1'"], name="k5")


_BUILTINS = {"k1": _k1, "k2": _k2, "k3": _k3, "k4": _k4, "k5": _k5}


def builtin_names() -> list[str]:
    return list(_BUILTINS)


def builtin_frame(name: str) -> Frame:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise FrameError(f"unknown builtin frame {name!r}; choose from {', '.join(_BUILTINS)}") from None


# ---- frame conditions ------------------------------------------------------

def _all_triples(f: Frame, pred) -> bool:
    return all(pred(x, y, z) for x, y, z in f.triples)


def check_condition(f: Frame, c: Condition | str) -> bool:
    c = Condition(c)
    s, has, n = f.star, f.has, f.n
    T = f.compose_table
    if c is Condition.LEFT_ROTATION:
        return _all_triples(f, lambda x, y, z: has(y, s[z], s[x]))
    if c is Condition.RIGHT_ROTATION:
        return _all_triples(f, lambda x, y, z: has(s[z], x, s[y]))
    if c is Condition.CENTER_REFLECTION:
        return _all_triples(f, lambda x, y, z: has(s[y], s[x], s[z]))
    if c is Condition.LEFT_REFLECTION:
        return _all_triples(f, lambda x, y, z: has(s[x], z, y))
    if c is Condition.RIGHT_REFLECTION:
        return _all_triples(f, lambda x, y, z: has(z, s[y], x))
    if c is Condition.IDENTITY:
        ids = list(bits(f.identity))
        for x in range(n):
            got = 0
            for u in ids:
                got |= T[x][u]
            if got != 1 << x:
                return False
        return True
    if c is Condition.INVOLUTION:
        return all(s[s[x]] == x for x in range(n))
    if c is Condition.SEMI_PASCH:
        # (v;w);y must lie inside v;K at the level of atoms
        for v in range(n):
            vk = f.compose(1 << v, f.full)
            for w in range(n):
                vw = T[v][w]
                for y in range(n):
                    if f.compose(vw, 1 << y) & ~vk:
                        return False
        return True
    if c is Condition.PASCH:
        for v in range(n):
            for w in range(n):
                vw = T[v][w]
                for y in range(n):
                    if f.compose(vw, 1 << y) & ~f.compose(1 << v, T[w][y]):
                        return False
        return True
    if c is Condition.DENSE:
        return all(has(x, x, x) for x in range(n))
    if c is Condition.COMM:
        return all(T[x][y] == T[y][x] for x in range(n) for y in range(n))
    if c is Condition.SYMM:
        return all(s[x] == x for x in range(n))
    return _check_cr(f, c)


def _check_cr(f: Frame, c: Condition) -> bool:
    # CR-frame postulates with the single identity element 0
    s, has, n, T = f.star, f.has, f.n, f.compose_table
    if c is Condition.P1:
        return all(T[0][a] == 1 << a for a in range(n))
    if c is Condition.P2:
        for a in range(n):
            for b in range(n):
                ab = T[a][b]
                for cc in range(n):
                    lhs = f.compose(ab, 1 << cc)
                    rhs = f.compose(T[a][cc], 1 << b)
                    if lhs != rhs:
                        return False
        return True
    if c is Condition.P3:
        return all(has(a, a, a) for a in range(n))
    if c is Condition.P4:
        return all(s[s[a]] == a for a in range(n))
    if c is Condition.P5:
        return all(has(a, b, c_) == has(a, s[c_], s[b])
                   for a in range(n) for b in range(n) for c_ in range(n))
    raise ValueError(f"unknown condition {c}")


@dataclass
class ClassReport:
    conditions: dict[str, bool]
    na: bool
    sa: bool
    ra: bool
    cr: bool
    kr: bool
    tr: bool

    def flags(self) -> dict[str, bool]:
        return {"NA-frame": self.na, "SA-frame": self.sa, "RA-frame": self.ra,
                "CR-frame": self.cr, "KR-frame": self.kr, "TR-frame": self.tr}


def classify(f: Frame) -> ClassReport:
    conds = {c.value: check_condition(f, c) for c in Condition}
    na = conds["left-reflection"] and conds["right-reflection"] and conds["identity"]
    sa = na and conds["semi-pasch"]
    ra = na and conds["pasch"]
    singleton = f.identity != 0 and f.identity & (f.identity - 1) == 0
    cr = f.identity == 1 and all(conds[p] for p in ("p1", "p2", "p3", "p4", "p5"))
    kr = ra and conds["dense"] and conds["symm"] and singleton
    tr = ra and conds["dense"] and conds["comm"]
    return ClassReport(conds, na, sa, ra, cr, kr, tr)


# ---- frame files -------------------------------------------------------------

def parse_frame_text(text: str) -> Frame:
    name, n, star, ident, names = "", None, None, None, None
    triples: list[tuple[int, int, int]] = []
    in_triples = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        try:
            if in_triples and head != "end":
                x, y, z = (int(w) for w in words)
                triples.append((x, y, z))
                continue
            if head == "frame":
                name = " ".join(words[1:])
            elif head == "elements":
                n = int(words[1])
            elif head == "names":
                names = words[1:]
            elif head == "star":
                star = [int(w) for w in words[1:]]
            elif head == "identity":
                ident = [int(w) for w in words[1:]]
            elif head == "triples":
                in_triples = True
            elif head == "end":
                in_triples = False
            else:
                raise FrameError(f"unknown directive {head!r}")
        except (ValueError, IndexError) as e:
            if isinstance(e, FrameError):
                raise FrameError(f"line {lineno}: {e}") from None
            raise FrameError(f"line {lineno}: malformed line {raw!r}") from None
    if n is None:
        raise FrameError("missing 'elements' directive")
    if star is None:
        star = list(range(n))
    if ident is None:
        ident = [0]
    return Frame(n, triples, star, ident, names=names, name=name)


def format_frame(f: Frame) -> str:
    lines = [f"frame {f.name or 'unnamed'}", f"elements {f.n}"]
    if f.names != tuple(str(i) for i in range(f.n)):
        lines.append("names " + " ".join(f.names))
    lines.append("star " + " ".join(map(str, f.star)))
    lines.append("identity " + " ".join(map(str, bits(f.identity))))
    lines.append("triples")
    lines.extend(f"{x} {y} {z}" for x, y, z in sorted(f.triples))
    lines.append("end")
    return "\n".join(lines) + "\n"


def load_frame(path_or_name: str) -> Frame:
    if path_or_name in _BUILTINS:
        return builtin_frame(path_or_name)
    with open(path_or_name, encoding="utf-8") as fh:
        return parse_frame_text(fh.read())


def composition_table(f: Frame) -> str:
    """The atom composition table in the layout used for frame tables."""
    head = [";"] + [f"{{{nm}}}" for nm in f.names]
    rows = [head]
    for x in range(f.n):
        rows.append([f"{{{f.names[x]}}}"] + [f.format_set(f.compose_table[x][y]) for y in range(f.n)])
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    out = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    if any(f.star[i] != i for i in range(f.n)):
        out.append("star: " + " ".join(f"{f.names[i]}->{f.names[f.star[i]]}" for i in range(f.n)))
    return "\n".join(out)
