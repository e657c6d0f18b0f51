"""Command-line interface.

Exit codes: 0 success or valid, 1 invalid or failed check, 2 usage error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import difflib
import sys
from importlib import resources

from . import census as C
from . import frames as F
from . import library as L
from . import racheck as RA
from . import sequent as Q
from . import syntax as S
from . import translate as T
from . import validity as V

OK, FAILED, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_pred(text: str) -> S.Term:
    """A library name, a predicate file, or literal predicate text."""
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read().strip()
    try:
        return L.resolve(text)
    except S.PredicateSyntaxError as e:
        raise UsageError(f"cannot parse predicate: {e}") from None


def _frame(text: str) -> F.Frame:
    try:
        return F.load_frame(text)
    except (OSError, F.FrameError) as e:
        raise UsageError(str(e)) from None


def _table(rows: list[list[str]], fmt: str) -> str:
    if fmt == "tsv":
        return "\n".join("\t".join(r) for r in rows) + "\n"
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


# ---- commands ---------------------------------------------------------------

def cmd_parse(a) -> int:
    p = _read_pred(a.predicate)
    print(S.print_predicate(p))
    if a.desugar:
        print(S.print_predicate(S.desugar(p)))
    print(f"vocabulary: {S.vocabulary_class(p).value}")
    print("variables: " + " ".join(S.variables_in_order(p)))
    return OK


def cmd_frame_check(a) -> int:
    f = _frame(a.frame)
    if a.condition:
        res = F.check_condition(f, a.condition)
        print(f"{a.condition}: {'yes' if res else 'no'}")
        return OK if res else FAILED
    rep = F.classify(f)
    rows = [["condition", "holds"]] + [[k, "yes" if v else "no"] for k, v in rep.conditions.items()]
    rows += [[k, "yes" if v else "no"] for k, v in rep.flags().items()]
    sys.stdout.write(_table(rows, a.format))
    return OK


def cmd_frame_table(a) -> int:
    print(F.composition_table(_frame(a.frame)))
    return OK


def cmd_frame_builtin(a) -> int:
    if a.name is None:
        print("\n".join(F.builtin_names()))
        return OK
    sys.stdout.write(F.format_frame(_frame(a.name)))
    return OK


def cmd_validate(a) -> int:
    f = _frame(a.frame)
    p = _read_pred(a.pred)
    if a.all:
        found = V.all_invalidating(f, p, a.strategy, empty=a.empty)
        for h in found:
            print(V.format_assignment(f, h))
        print(f"{len(found)} invalidating assignment(s)")
        return FAILED if found else OK
    if a.strategy == "exhaustive":
        v = V.decide_valid(f, p, a.budget, jobs=a.jobs)
    else:
        h = V.find_invalidating(f, p, a.strategy, seed=a.seed, tries=a.tries)
        v = V.Invalid(h, V.eval(f, h, p)) if h is not None else None
        if v is None:
            print(f"NONE-FOUND {f.name or a.frame} ({a.strategy} search is not a validity proof)")
            return OK
    print(f"{V.verdict_word(v)} {f.name or a.frame} {a.pred}")
    if isinstance(v, V.Invalid):
        print("witness: " + V.format_assignment(f, v.witness))
        print("value: " + f.format_set(v.value))
        return FAILED
    if isinstance(v, V.BudgetExceeded):
        return BUDGET
    return OK


def cmd_axioms(a) -> int:
    f = _frame(a.frame)
    axioms = [RA.parse_axiom(x) for x in a.axiom] if a.axiom else list(RA.Axiom)
    rows = [["axiom", "holds"]]
    good = True
    try:
        for ax in axioms:
            res = RA.check_axiom(f, ax)
            good &= res
            rows.append([ax.value, "yes" if res else "no"])
    except V.BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    if not a.axiom:
        for k, v in RA.algebra_class(f).items():
            rows.append([k, "yes" if v else "no"])
        for k, v in RA.properties(f).items():
            rows.append([k, "yes" if v else "no"])
    sys.stdout.write(_table(rows, a.format))
    return OK if good or not a.axiom else FAILED


def cmd_basis(a) -> int:
    f = _frame(a.frame)
    try:
        res = RA.relational_basis_exists(f, a.dim)
    except RA.PreconditionError as e:
        print(str(e), file=sys.stderr)
        return FAILED
    except V.BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    print(f"{a.dim}-dimensional basis: {'yes' if res.exists else 'no'}")
    print(f"candidates {res.initial}, survivors {len(res.basis)}, rounds {res.rounds}")
    if res.exists and a.show:
        print(RA.format_basis(f, res.basis[0]))
    return OK if res.exists else FAILED


def cmd_diamond(a) -> int:
    f = _frame(a.frame)
    res = RA.diamond(f, a.t)
    print(f"D({a.t}): {'yes' if res else 'no'}")
    return OK if res else FAILED


def cmd_count(a) -> int:
    try:
        c = C.count_formulas(a.n, a.s)
    except ValueError as e:
        raise UsageError(str(e)) from None
    sys.stdout.write(_table([["n", "s", "F", "G", "P"],
                             [str(a.n), str(a.s), str(c.F), str(c.G), str(c.P)]], a.format))
    return OK


def cmd_census(a) -> int:
    try:
        rep = C.census(a.n, a.cls, keep_frames=bool(a.check_pred))
    except C.CensusBudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    except ValueError as e:
        raise UsageError(str(e)) from None
    sys.stdout.write(rep.format(a.format))
    if not a.check_pred:
        return OK
    preds = {name: _read_pred(name) for name in a.check_pred}
    worst = max(len(S.variables_of(p)) for p in preds.values()) * a.n
    if worst > 24 and not a.extended:
        print(f"sweeps of 2^{worst} assignments need --extended", file=sys.stderr)
        return BUDGET
    log = (lambda msg: print(msg, file=sys.stderr, flush=True)) if a.extended else None
    res = C.classify_validity(rep.representatives, preds, a.checkpoint, jobs=a.jobs, log=log)
    names = list(preds)
    rows = [["frame", "triples"] + names]
    for i, f in enumerate(rep.representatives):
        rows.append([str(i), str(len(f.triples))] + [res[i, nm] for nm in names])
    sys.stdout.write(_table(rows, a.format))
    for nm in names:
        bad = sum(res[i, nm] == "INVALID" for i in range(len(rep.representatives)))
        print(f"invalid {nm}: {bad}")
    if len(names) > 1:
        both = sum(all(res[i, nm] == "INVALID" for nm in names) for i in range(len(rep.representatives)))
        print(f"invalid all: {both}")
    return OK


def cmd_prove_check(a) -> int:
    try:
        p = Q.builtin_script(a.script) if a.builtin else Q.load_script(a.script)
    except (OSError, KeyError) as e:
        raise UsageError(str(e)) from None
    except Q.ScriptError as e:
        print(f"line {e.line}: {e.reason}")
        return FAILED
    if a.expand:
        p = Q.expand_script(p)
        sys.stdout.write(Q.format_script(p))
    res = Q.check_script(p, allow_macros=not a.no_macros)
    if res:
        print(f"OK {p.name} ({len(p.lines)} lines, {p.n} variables)")
        return OK
    print(f"ERROR line {res.line}: {res.reason}")
    return FAILED


def cmd_prove_search(a) -> int:
    try:
        goal = Q.parse_sequent(a.goal)
    except Q.ScriptError as e:
        raise UsageError(f"bad goal: {e.reason}") from None
    try:
        p = Q.search_proof(goal, a.vars, a.depth, a.assume or (), node_budget=a.nodes)
    except Q.SearchExhausted:
        print("search budget exhausted")
        return BUDGET
    if p is None:
        print("no proof found within the depth bound")
        return FAILED
    sys.stdout.write(Q.format_script(p))
    return OK


def cmd_translate(a) -> int:
    try:
        phi = T.parse_formula(a.formula)
    except T.FormulaSyntaxError as e:
        raise UsageError(str(e)) from None
    try:
        if a.to == "G":
            print(T.print_formula(T.translate_G(phi)))
        elif a.to == "closure":
            print(T.print_formula(T.closure(phi)))
        elif a.to == "J":
            for r, s, t in T.translate_J(phi).clauses:
                print(f"({S.print_predicate(r)}, {S.print_predicate(s)}, {S.print_predicate(t)})")
        else:
            print(T.print_formula(T.translate_H(phi)))
    except T.ClauseBudgetError as e:
        print(str(e), file=sys.stderr)
        return BUDGET
    except ValueError as e:
        raise UsageError(str(e)) from None
    return OK


def cmd_modelcheck(a) -> int:
    try:
        st = T.load_structure(a.structure)
        phi = T.parse_formula(a.formula)
    except (OSError, ValueError) as e:
        raise UsageError(str(e)) from None
    s = {}
    for item in a.assign or []:
        k, _, v = item.partition("=")
        s[int(k.lstrip("v"))] = int(v)
    try:
        res = T.satisfies(st, phi, s)
    except T.UnassignedVariable as e:
        raise UsageError(str(e)) from None
    print("true" if res else "false")
    return OK if res else FAILED


# ---- reproduction targets ---------------------------------------------------

def golden(target: str) -> str:
    return (resources.files("relframe") / "data" / "golden" / f"{target}.txt").read_text(encoding="utf-8")


def _strip(text: str) -> list[str]:
    return [ln.rstrip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def report_s15_grid() -> str:
    f = F.builtin_frame("k1")
    grid = V.census_validity([f], {p: L.predicate(p) for p in L.GRID_PREDICATES}, mode="fixed",
                             assignments={h: L.to_masks(f, a) for h, a in L.GRID_ASSIGNMENTS.items()})
    rows = [["", *grid.cols]] + [[r] + [grid.symbol(r, c) for c in grid.cols] for r in grid.rows]
    return _table(rows, "tsv")


def report_s16_table() -> str:
    f = F.builtin_frame("k2")
    out = []
    for name in L.K2_PREDICATES:
        for h in V.all_invalidating(f, L.predicate(name), "singletons", empty=True):
            out.append(f"{name}\t{V.format_assignment(f, h)}")
    return "\n".join(out) + "\n"


def report_s19_four_element(jobs: int = 1) -> str:
    reps = C.representatives(4, "kr")
    preds = {"L''": L.predicate("L''"), "M''": L.predicate("M''")}
    res = C.classify_validity(reps, preds, jobs=jobs)
    bad_l = [i for i in range(len(reps)) if res[i, "L''"] == "INVALID"]
    both = [i for i in bad_l if res[i, "M''"] == "INVALID"]
    k5 = C.canonical_form(F.builtin_frame("k5"))
    lines = [f"kr-frames\t{len(reps)}",
             f"invalidate L''\t{len(bad_l)}",
             f"invalidate L'' and M''\t{len(both)}"]
    for i in both:
        lines.append(f"both: triples\t{len(reps[i].triples)}")
        lines.append(f"both: isomorphic to k5\t{'yes' if C.canonical_form(reps[i]) == k5 else 'no'}")
    return "\n".join(lines) + "\n"


def report_s20_counts() -> str:
    lines = []
    for n, cls in ((4, "kr"), (5, "kr"), (5, "tr")):
        lines.append(f"{n}\t{cls}\t{C.census(n, cls).iso_class_count}")
    return "\n".join(lines) + "\n"


TARGETS = {
    "s15-grid": report_s15_grid,
    "s16-table": report_s16_table,
    "s19-four-element": report_s19_four_element,
    "s20-counts": report_s20_counts,
}


def reproduce(target: str, jobs: int = 1) -> tuple[bool, str, list[str]]:
    fn = TARGETS[target]
    got = fn(jobs) if target == "s19-four-element" else fn()
    want = _strip(golden(target))
    diff = list(difflib.unified_diff(want, _strip(got), "golden", "computed", lineterm=""))
    return not diff, got, diff


def cmd_reproduce(a) -> int:
    if a.target not in TARGETS:
        raise UsageError(f"unknown target {a.target!r}; choose from {', '.join(TARGETS)}")
    same, got, diff = reproduce(a.target, a.jobs)
    sys.stdout.write(got)
    if same:
        print(f"{a.target}: matches golden")
        return OK
    print(f"{a.target}: differs from golden")
    print("\n".join(diff))
    return FAILED


# ---- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relframe", description="Relevance-logic frames, proofs and translations.")
    sub = ap.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "tsv"), default="text")
    jobs = argparse.ArgumentParser(add_help=False)
    jobs.add_argument("--jobs", type=int, default=V.default_jobs())

    p = sub.add_parser("parse", help="parse and print a predicate")
    p.add_argument("predicate")
    p.add_argument("--desugar", action="store_true")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("frame-check", parents=[fmt], help="frame conditions and classes")
    p.add_argument("frame")
    p.add_argument("--condition", choices=[c.value for c in F.Condition])
    p.set_defaults(fn=cmd_frame_check)

    p = sub.add_parser("frame-table", help="print the atom composition table")
    p.add_argument("frame")
    p.set_defaults(fn=cmd_frame_table)

    p = sub.add_parser("frame-builtin", help="list or print the built-in frames")
    p.add_argument("name", nargs="?")
    p.set_defaults(fn=cmd_frame_builtin)

    p = sub.add_parser("validate", parents=[jobs], help="decide validity of a predicate in a frame")
    p.add_argument("--frame", required=True)
    p.add_argument("--pred", required=True, help="library name, @file, or predicate text")
    p.add_argument("--strategy", choices=("exhaustive", "singletons", "random"), default="exhaustive")
    p.add_argument("--budget", type=int, default=V.DEFAULT_BIT_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tries", type=int, default=1000)
    p.add_argument("--all", action="store_true", help="list every invalidating assignment")
    p.add_argument("--empty", action="store_true", help="with --all, require the empty value")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("axioms", parents=[fmt], help="check the equational axioms on Cm(frame)")
    p.add_argument("frame")
    p.add_argument("--axiom", action="append")
    p.set_defaults(fn=cmd_axioms)

    p = sub.add_parser("basis", help="search for a relational basis")
    p.add_argument("frame")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--show", action="store_true")
    p.set_defaults(fn=cmd_basis)

    p = sub.add_parser("diamond", help="test the diamond property")
    p.add_argument("frame")
    p.add_argument("--t", type=int, default=1)
    p.set_defaults(fn=cmd_diamond)

    p = sub.add_parser("census", parents=[fmt, jobs], help="count frames up to isomorphism")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--class", dest="cls", choices=C.CLASSES, required=True)
    p.add_argument("--check-pred", action="append", help="also classify each frame by validity")
    p.add_argument("--extended", action="store_true", help="allow sweeps beyond 2^24 assignments")
    p.add_argument("--checkpoint", help="JSON file recording progress for resumption")
    p.set_defaults(fn=cmd_census)

    p = sub.add_parser("count", parents=[fmt], help="evaluate the closed-form counts F, G, P")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("prove-check", help="check a proof script")
    p.add_argument("script", help="path, or a corpus name with --builtin")
    p.add_argument("--builtin", action="store_true")
    p.add_argument("--no-macros", action="store_true")
    p.add_argument("--expand", action="store_true", help="print the macro-free script first")
    p.set_defaults(fn=cmd_prove_check)

    p = sub.add_parser("prove-search", help="search for a cut-free proof")
    p.add_argument("goal", help="sequent such as '|- 0:A->A:0'")
    p.add_argument("--vars", type=int, default=3)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--assume", action="append", choices=[k.value for k in Q.AssumptionKind])
    p.add_argument("--nodes", type=int, default=200_000)
    p.set_defaults(fn=cmd_prove_search)

    p = sub.add_parser("translate", help="apply G, J, H or closure to a formula")
    p.add_argument("formula")
    p.add_argument("--to", choices=("G", "J", "H", "closure"), default="G")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("modelcheck", help="satisfaction in a finite structure")
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--assign", action="append", help="v0=1 style values")
    p.set_defaults(fn=cmd_modelcheck)

    p = sub.add_parser("reproduce", parents=[jobs], help="recompute a table and diff it with its golden file")
    p.add_argument("target", choices=list(TARGETS))
    p.set_defaults(fn=cmd_reproduce)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return a.fn(a)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except V.BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
