import pytest
from hypothesis import given, settings, strategies as st

from relframe import frames as F
from relframe import library as L
from relframe import syntax as S
from relframe import validity as V

from helpers import direct_value, frames, predicates

k1 = F.builtin_frame("k1")
a, b, c, zero = 0b0010, 0b0100, 0b1000, 0b0001


def test_hand_values_in_k1():
    h = {"A": a, "B": b, "C": zero | b}
    assert V.eval(k1, h, S.parse("A -> B")) == c
    assert V.eval(k1, h, S.parse("A -> (A -> B)")) == b
    contract2 = L.predicate("contract2")
    assert V.eval(k1, h, contract2) == a
    assert not V.holds(k1, h, contract2)


def test_constants():
    f = F.builtin_frame("k2")
    assert V.eval(f, {}, S.parse("1")) == f.full
    assert V.eval(f, {}, S.parse("0")) == 0
    assert V.eval(f, {}, S.parse("0'")) == f.full & ~1
    assert V.eval(f, {}, S.parse("t")) == 1


def test_missing_atom():
    with pytest.raises(V.MissingAssignment):
        V.eval(k1, {"A": a}, S.parse("A ; B"))


def test_self_implication_is_valid_everywhere():
    for name in F.builtin_names():
        f = F.builtin_frame(name)
        assert V.decide_valid(f, S.parse("A -> A"))


def test_invalid_witness_reevaluates():
    f = F.builtin_frame("k4")
    v = V.decide_valid(f, L.predicate("reflection1"))
    assert isinstance(v, V.Invalid)
    assert V.eval(f, v.witness, L.predicate("reflection1")) == v.value
    assert v.value & f.identity != f.identity


def test_budget():
    v = V.decide_valid(F.builtin_frame("k5"), L.predicate("M''"), bit_budget=24)
    assert isinstance(v, V.BudgetExceeded)
    assert V.verdict_word(v) == "BUDGET"


def test_singletons_and_random_agree_with_exhaustive():
    f = F.builtin_frame("k2")
    p = L.predicate("perm")
    assert V.find_invalidating(f, p, "singletons") is not None
    h = V.find_invalidating(f, p, "random", seed=3, tries=5000)
    assert h is not None and not V.holds(f, h, p)
    assert V.find_invalidating(k1, S.parse("A -> A"), "random", tries=200) is None


def test_all_invalidating_empty_is_subset():
    f = F.builtin_frame("k2")
    p = L.predicate("suff")
    loose = V.all_invalidating(f, p, "singletons")
    tight = V.all_invalidating(f, p, "singletons", empty=True)
    assert tight and all(h in loose for h in tight)
    assert all(V.eval(f, h, p) == 0 for h in tight)


def test_sweep_resume_and_progress():
    f = F.builtin_frame("k5")
    p = L.predicate("reflection1")
    plan = V.plan_sweep(f, p)
    assert plan.chunks * plan.cells_per_chunk == 1 << 16
    seen = []
    v = V.sweep(f, p, progress=lambda done, total: seen.append((done, total)))
    assert v and seen[-1][0] == seen[-1][1]
    half = V.sweep(f, p, start_chunk=plan.chunks // 2)
    assert half and half.checked <= v.checked


def test_parallel_sweep_matches_serial():
    f = F.builtin_frame("k4")
    p = L.predicate("dedekind")
    assert type(V.sweep(f, p, jobs=2)) is type(V.sweep(f, p, jobs=1)) is V.Invalid


def test_equation_holds():
    f = F.builtin_frame("k3")
    assert V.equation_holds(f, S.parse("A ; B"), S.parse("B ; A"))
    assert not V.equation_holds(F.builtin_frame("k2"), S.parse("A ; B"), S.parse("B ; A"))


def test_reflection1_can_survive_without_left_reflection():
    # identity holds and left reflection fails at (0,1,2), yet nothing invalidates
    # reflection1: only triples ending in 0 matter once identity is the sole link
    tr = [(0, 0, 0), (0, 1, 2), (1, 0, 1), (1, 1, 2), (1, 3, 1), (1, 3, 2), (2, 0, 2), (3, 0, 3), (3, 1, 3)]
    f = F.Frame(4, tr, (0, 1, 2, 3), 1)
    assert F.check_condition(f, "identity")
    assert not F.check_condition(f, "left-reflection")
    assert isinstance(V.decide_valid(f, L.predicate("reflection1")), V.Valid)
    h = {"A": 0b0001, "B": 0b0010, "C": 0b0100, "D": 0b0001}
    assert direct_value(f, h, L.predicate("reflection1")) & 1


def test_census_validity_grid():
    frames_ = {"k1": k1, "k3": F.builtin_frame("k3")}
    grid = V.census_validity(frames_, {"self": S.parse("A -> A"), "reductio": L.predicate("reductio")})
    assert grid.symbol("k1", "self") == "o"
    assert grid.symbol("k3", "reductio") == "x"


def test_format_assignment():
    f = F.builtin_frame("k2")
    assert V.format_assignment(f, {"A": 0b1000, "B": 0}) == "A={b*} B={}"


def test_iter_assignments_counts():
    assert sum(1 for _ in V.iter_assignments(k1, ["A", "B"])) == 256
    assert sum(1 for _ in V.iter_assignments(k1, ["A", "B"], "singletons")) == 16


@settings(max_examples=500, deadline=None)
@given(frames(max_n=3), predicates(), st.data())
def test_compiled_sweep_agrees_with_eval(f, p, data):
    names = sorted(S.variables_of(p))
    h = {v: data.draw(st.integers(0, f.full)) for v in names}
    assert V.eval(f, h, p) == direct_value(f, h, p)
    found = V.all_invalidating(f, p, "exhaustive") if len(names) * f.n <= 9 else None
    if found is not None:
        brute = [g for g in V.iter_assignments(f, names) if not V.holds(f, g, p)]
        assert sorted(map(sorted, (x.items() for x in found))) == sorted(map(sorted, (x.items() for x in brute)))
