"""Evaluating predicates in complex algebras of finite frames.

A predicate is valid in a frame when every assignment of subsets to its
atoms yields a value containing the identity set.  Exhaustive sweeps are
vectorised with numpy: a predicate is compiled into a straight-line
program over its (desugared, hash-consed) subterms, the last few variables
become broadcast axes and the leading variables are iterated in chunks.
"""

from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import syntax as S
from .frames import Frame, bits

Assignment = dict[str, int]

DEFAULT_BIT_BUDGET = 30
CHUNK_CELLS = 1 << 20


class MissingAssignment(KeyError):
    pass


class BudgetError(RuntimeError):
    pass


# ---- verdicts ------------------------------------------------------------

@dataclass(frozen=True)
class Valid:
    checked: int = 0

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Invalid:
    witness: Assignment
    value: int = 0

    def __bool__(self):
        return False


@dataclass(frozen=True)
class BudgetExceeded:
    checked: int = 0

    def __bool__(self):
        return False


Verdict = Valid | Invalid | BudgetExceeded


def verdict_word(v: Verdict) -> str:
    return {Valid: "VALID", Invalid: "INVALID", BudgetExceeded: "BUDGET"}[type(v)]


def format_assignment(f: Frame, h: Mapping[str, int]) -> str:
    return " ".join(f"{k}={f.format_set(v)}" for k, v in h.items())


# ---- single assignment -----------------------------------------------------

def eval(f: Frame, h: Mapping[str, int], p: S.Term) -> int:  # noqa: A001
    """The value of ``p`` in Cm(f) under ``h``, as a bit mask."""
    memo: dict[S.Term, int] = {}

    def go(t: S.Term) -> int:
        got = memo.get(t)
        if got is not None:
            return got
        if isinstance(t, S.Atom):
            try:
                v = h[t.name]
            except KeyError:
                raise MissingAssignment(f"no value for atom {t.name}") from None
            if v >> f.n:
                raise ValueError(f"value for {t.name} is not a subset of the carrier")
        elif isinstance(t, S.Identity):
            v = f.identity
        elif isinstance(t, S.Join):
            v = go(t.left) | go(t.right)
        elif isinstance(t, S.Complement):
            v = f.full & ~go(t.arg)
        elif isinstance(t, S.RelProd):
            v = f.compose(go(t.left), go(t.right))
        elif isinstance(t, S.Converse):
            v = f.converse(go(t.arg))
        else:
            raise TypeError(f"unexpected term {t!r}")
        memo[t] = v
        return v

    return go(S.desugar(p))


def holds(f: Frame, h: Mapping[str, int], p: S.Term) -> bool:
    return eval(f, h, p) & f.identity == f.identity


# ---- compiled programs ---------------------------------------------------

ATOM, IDENT, JOIN, COMP, PROD, CONV = range(6)


@dataclass
class Program:
    """Straight-line code: ``ops[i] = (opcode, a, b)`` with operand slots."""

    variables: list[str]
    ops: list[tuple[int, int, int]]
    deps: list[frozenset[int]]

    @property
    def result(self) -> int:
        return len(self.ops) - 1


def compile_predicate(p: S.Term, variables: Sequence[str] | None = None) -> Program:
    core = S.desugar(p)
    if variables is None:
        variables = S.variables_in_order(p)
    index = {v: i for i, v in enumerate(variables)}
    missing = S.variables_of(core) - set(index)
    if missing:
        raise MissingAssignment(f"no value for atoms {sorted(missing)}")
    ops: list[tuple[int, int, int]] = []
    deps: list[frozenset[int]] = []
    slot: dict[S.Term, int] = {}

    def emit(t: S.Term) -> int:
        if t in slot:
            return slot[t]
        if isinstance(t, S.Atom):
            op, d = (ATOM, index[t.name], 0), frozenset([index[t.name]])
        elif isinstance(t, S.Identity):
            op, d = (IDENT, 0, 0), frozenset()
        elif isinstance(t, (S.Complement, S.Converse)):
            a = emit(t.arg)
            op, d = (COMP if isinstance(t, S.Complement) else CONV, a, 0), deps[a]
        else:
            a, b = emit(t.left), emit(t.right)
            op, d = (JOIN if isinstance(t, S.Join) else PROD, a, b), deps[a] | deps[b]
        ops.append(op)
        deps.append(d)
        slot[t] = len(ops) - 1
        return slot[t]

    emit(core)
    return Program(list(variables), ops, deps)


class _Machine:
    """Runs a program on numpy arrays for one frame."""

    def __init__(self, f: Frame):
        self.f = f
        self.dtype = np.dtype(f.converse_lut.dtype)
        self.full = self.dtype.type(f.full)
        self.ident = self.dtype.type(f.identity)
        self.conv = f.converse_lut
        self.lut = f.compose_lut if f.n <= 10 else None
        if self.lut is None:
            self.rows = np.array(f._row_lut, dtype=self.dtype)

    def compose(self, a, b):
        if self.lut is not None:
            return self.lut[a, b]
        out = np.zeros(np.broadcast_shapes(np.shape(a), np.shape(b)), dtype=self.dtype)
        for x in range(self.f.n):
            out |= np.where((a >> x) & 1 == 1, self.rows[x][b], 0).astype(self.dtype)
        return out

    def run(self, prog: Program, env: Sequence[np.ndarray], cache: dict[int, np.ndarray] | None = None,
            stale: frozenset[int] | None = None):
        """Evaluate; slots depending only on variables outside ``stale`` are reused from ``cache``."""
        vals: list = [None] * len(prog.ops)
        for i, (op, a, b) in enumerate(prog.ops):
            if cache is not None and stale is not None and i in cache and not (prog.deps[i] & stale):
                vals[i] = cache[i]
                continue
            if op == ATOM:
                v = env[a]
            elif op == IDENT:
                v = np.asarray(self.ident)
            elif op == JOIN:
                v = vals[a] | vals[b]
            elif op == COMP:
                v = vals[a] ^ self.full
            elif op == PROD:
                v = self.compose(vals[a], vals[b])
            else:
                v = self.conv[vals[a]]
            vals[i] = v
            if cache is not None:
                cache[i] = v
        return vals[-1]


def _domains(f: Frame, k: int, strategy: str) -> list[np.ndarray]:
    dt = np.dtype(f.converse_lut.dtype)
    if strategy == "singletons":
        dom = np.array([1 << x for x in range(f.n)], dtype=dt)
    elif strategy == "exhaustive":
        dom = np.arange(1 << f.n, dtype=dt)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return [dom] * k


@dataclass
class SweepPlan:
    prog: Program
    domains: list[np.ndarray]
    inner: int  # number of trailing variables vectorised per chunk

    @property
    def outer_sizes(self) -> list[int]:
        k = len(self.domains) - self.inner
        return [len(d) for d in self.domains[:k]]

    @property
    def chunks(self) -> int:
        out = 1
        for s in self.outer_sizes:
            out *= s
        return out

    @property
    def cells_per_chunk(self) -> int:
        out = 1
        for d in self.domains[len(self.domains) - self.inner:]:
            out *= len(d)
        return out


def plan_sweep(f: Frame, p: S.Term, strategy: str = "exhaustive",
               variables: Sequence[str] | None = None, chunk_cells: int = CHUNK_CELLS) -> SweepPlan:
    prog = compile_predicate(p, variables)
    doms = _domains(f, len(prog.variables), strategy)
    inner, cells = 0, 1
    for d in reversed(doms):
        if cells * len(d) > chunk_cells:
            break
        cells *= len(d)
        inner += 1
    return SweepPlan(prog, doms, inner)


def _unrank(r: int, sizes: Sequence[int]) -> list[int]:
    out = []
    for s in reversed(sizes):
        r, q = divmod(r, s)
        out.append(q)
    return out[::-1]


def _sweep_range(f: Frame, plan: SweepPlan, start: int, stop: int,
                 want_all: bool = False, test: str = "holds"):
    """Sweep chunks ``start..stop-1``.

    Returns ``(first_bad_chunk, witness_list)``; with ``want_all`` every
    failing assignment index is returned.
    """
    m = _Machine(f)
    k = len(plan.domains)
    n_outer = k - plan.inner
    sizes = plan.outer_sizes
    inner_env = []
    for j in range(plan.inner):
        shape = [1] * plan.inner
        shape[j] = len(plan.domains[n_outer + j])
        inner_env.append(plan.domains[n_outer + j].reshape(shape))
    cache: dict[int, np.ndarray] = {}
    prev: list[int] | None = None
    found = []
    for r in range(start, stop):
        digits = _unrank(r, sizes)
        env = [np.asarray(plan.domains[i][digits[i]]) for i in range(n_outer)] + inner_env
        if prev is None:
            stale = None
            cache.clear()
        else:
            stale = frozenset(i for i in range(n_outer) if digits[i] != prev[i])
        val = m.run(plan.prog, env, cache, stale)
        prev = digits
        if test == "holds":
            bad = (val & m.ident) != m.ident
        else:
            bad = val == 0
        if np.any(bad):
            bad = np.broadcast_to(bad, [len(d) for d in plan.domains[n_outer:]])
            idxs = np.argwhere(bad)
            for ix in (idxs if want_all else idxs[:1]):
                found.append(digits + [int(i) for i in ix])
            if not want_all:
                return r, found
    return None, found


def _to_assignment(plan: SweepPlan, digits: Sequence[int]) -> Assignment:
    return {v: int(plan.domains[i][digits[i]]) for i, v in enumerate(plan.prog.variables)}


def _worker(args):
    f, plan, start, stop = args
    chunk, found = _sweep_range(f, plan, start, stop)
    return start, stop, found[0] if found else None


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def sweep(f: Frame, p: S.Term, strategy: str = "exhaustive", jobs: int = 1,
          start_chunk: int = 0, progress: Callable[[int, int], None] | None = None,
          variables: Sequence[str] | None = None) -> Verdict:
    """Check every assignment from the strategy's domain.

    ``progress(done, total)`` is called with the number of leading chunks
    known to be witness-free, which is what a checkpoint should record.
    """
    plan = plan_sweep(f, p, strategy, variables)
    total = plan.chunks
    if not plan.prog.variables:
        v = eval(f, {}, p)
        return Valid(1) if v & f.identity == f.identity else Invalid({}, v)
    if jobs <= 1 or total - start_chunk < 2:
        step = max(1, min(64, total // 64 or 1))
        for lo in range(start_chunk, total, step):
            hi = min(total, lo + step)
            _, found = _sweep_range(f, plan, lo, hi)
            if found:
                h = _to_assignment(plan, found[0])
                return Invalid(h, eval(f, h, p))
            if progress:
                progress(hi, total)
        return Valid(plan.cells_per_chunk * (total - start_chunk))
    pieces = max(jobs * 8, 1)
    step = max(1, (total - start_chunk) // pieces)
    ranges = [(lo, min(total, lo + step)) for lo in range(start_chunk, total, step)]
    done: set[tuple[int, int]] = set()
    frontier = start_chunk
    ends = {lo: hi for lo, hi in ranges}
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        pending = {ex.submit(_worker, (f, plan, lo, hi)) for lo, hi in ranges}
        while pending:
            finished, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in finished:
                lo, hi, wit = fut.result()
                if wit is not None:
                    for other in pending:
                        other.cancel()
                    h = _to_assignment(plan, wit)
                    return Invalid(h, eval(f, h, p))
                done.add((lo, hi))
            starts = {lo for lo, _ in done}
            while frontier in starts:
                frontier = ends[frontier]
            if progress:
                progress(frontier, total)
    return Valid(plan.cells_per_chunk * (total - start_chunk))


# ---- public operations ---------------------------------------------------

def all_invalidating(f: Frame, p: S.Term, strategy: str = "singletons",
                     variables: Sequence[str] | None = None, empty: bool = False) -> list[Assignment]:
    """Every assignment from the strategy's domain that falsifies ``p``.

    With ``empty`` the criterion is that ``p`` evaluates to the empty set
    rather than merely missing part of the identity.
    """
    plan = plan_sweep(f, p, strategy, variables)
    if not plan.prog.variables:
        v = eval(f, {}, p)
        bad = v == 0 if empty else v & f.identity != f.identity
        return [{}] if bad else []
    _, found = _sweep_range(f, plan, 0, plan.chunks, want_all=True,
                            test="empty" if empty else "holds")
    return [_to_assignment(plan, d) for d in found]


def find_invalidating(f: Frame, p: S.Term, strategy: str = "singletons",
                      seed: int = 0, tries: int = 1000,
                      candidates: Iterable[Mapping[str, int]] | None = None) -> Assignment | None:
    """Search for a falsifying assignment.

    ``strategy`` is ``singletons``, ``exhaustive`` or ``random``; an explicit
    ``candidates`` list is tried in order instead when given.  ``None`` is
    only a validity certificate for a completed exhaustive search.
    """
    if candidates is not None:
        for h in candidates:
            if not holds(f, h, p):
                return dict(h)
        return None
    if strategy == "random":
        rng = random.Random(seed)
        names = S.variables_in_order(p)
        for _ in range(tries):
            h = {v: rng.getrandbits(f.n) for v in names}
            if not holds(f, h, p):
                return h
        return None
    plan = plan_sweep(f, p, strategy)
    if not plan.prog.variables:
        return None if holds(f, {}, p) else {}
    _, found = _sweep_range(f, plan, 0, plan.chunks)
    return _to_assignment(plan, found[0]) if found else None


def decide_valid(f: Frame, p: S.Term, bit_budget: int = DEFAULT_BIT_BUDGET, jobs: int = 1,
                 start_chunk: int = 0, progress: Callable[[int, int], None] | None = None) -> Verdict:
    """Exhaustive validity test; singleton assignments are tried first."""
    k = len(S.variables_of(p))
    if f.n * k > bit_budget:
        return BudgetExceeded(0)
    if start_chunk == 0:
        h = find_invalidating(f, p, "singletons")
        if h is not None:
            return Invalid(h, eval(f, h, p))
    return sweep(f, p, "exhaustive", jobs=jobs, start_chunk=start_chunk, progress=progress)


def equation_holds(f: Frame, lhs: S.Term, rhs: S.Term, bit_budget: int = 24) -> bool:
    """Whether ``lhs = rhs`` is true in Cm(f) for every assignment."""
    names = list(dict.fromkeys(S.variables_in_order(lhs) + S.variables_in_order(rhs)))
    if f.n * len(names) > bit_budget:
        raise BudgetError(f"{len(names)} variables over {f.n} elements exceeds the budget")
    # lhs = rhs iff the symmetric difference is empty everywhere
    diff = S.Join(S.Meet(lhs, S.Complement(rhs)), S.Meet(S.Complement(lhs), rhs))
    plan = plan_sweep(f, S.Complement(diff), "exhaustive", names)
    if not names:
        return eval(f, {}, diff) == 0
    m = _Machine(f)
    k = len(plan.domains)
    n_outer = k - plan.inner
    inner_env = []
    for j in range(plan.inner):
        shape = [1] * plan.inner
        shape[j] = len(plan.domains[n_outer + j])
        inner_env.append(plan.domains[n_outer + j].reshape(shape))
    for r in range(plan.chunks):
        digits = _unrank(r, plan.outer_sizes)
        env = [np.asarray(plan.domains[i][digits[i]]) for i in range(n_outer)] + inner_env
        if np.any(m.run(plan.prog, env) != m.full):
            return False
    return True


@dataclass
class Grid:
    rows: list[str]
    cols: list[str]
    cells: dict[tuple[str, str], Verdict] = field(default_factory=dict)

    def symbol(self, r: str, c: str) -> str:
        v = self.cells.get((r, c))
        if v is None:
            return "?"
        return {Valid: "o", Invalid: "x", BudgetExceeded: "B"}[type(v)]


def census_validity(fs: Sequence[Frame] | Mapping[str, Frame], ps: Mapping[str, S.Term],
                    mode: str = "exhaustive", assignments: Mapping[str, Mapping[str, int]] | None = None,
                    bit_budget: int = DEFAULT_BIT_BUDGET, jobs: int = 1,
                    resume: Mapping[tuple[str, str], Verdict] | None = None,
                    on_cell: Callable[[str, str, Verdict], None] | None = None) -> Grid:
    """Verdicts for every (frame, predicate) pair.

    ``mode`` is ``exhaustive`` or ``fixed``; in fixed mode the rows are the
    named ``assignments`` evaluated on the single frame given, and a cell is
    Valid when the predicate holds under that one assignment.
    """
    if mode == "fixed":
        if assignments is None:
            raise ValueError("fixed mode needs assignments")
        (f,) = fs.values() if isinstance(fs, Mapping) else fs
        grid = Grid(list(assignments), list(ps))
        for hname, h in assignments.items():
            for pname, p in ps.items():
                grid.cells[hname, pname] = Valid(1) if holds(f, h, p) else Invalid(dict(h), eval(f, h, p))
        return grid
    frames = dict(fs) if isinstance(fs, Mapping) else {(f.name or str(i)): f for i, f in enumerate(fs)}
    grid = Grid(list(frames), list(ps))
    for fname, f in frames.items():
        for pname, p in ps.items():
            if resume and (fname, pname) in resume:
                grid.cells[fname, pname] = resume[fname, pname]
                continue
            v = decide_valid(f, p, bit_budget, jobs=jobs)
            grid.cells[fname, pname] = v
            if on_cell:
                on_cell(fname, pname, v)
    return grid


def iter_assignments(f: Frame, names: Sequence[str], strategy: str = "exhaustive"):
    dom = [1 << x for x in range(f.n)] if strategy == "singletons" else range(1 << f.n)
    for vals in itertools.product(dom, repeat=len(names)):
        yield dict(zip(names, vals))
