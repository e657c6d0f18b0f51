"""Randomized and exhaustive property suites across modules."""

import random
from functools import lru_cache

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from relframe import census as C
from relframe import frames as F
from relframe import racheck as RA
from relframe import syntax as S
from relframe import translate as T
from relframe import validity as V

from helpers import all_na_frames, direct_value, frames, na_frames, predicates

PROPS = settings(max_examples=1000, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])


# ---- desugaring ----------------------------------------------------------------

@PROPS
@given(frames(max_n=4), predicates(), st.data())
def test_desugar_is_sound(f, p, data):
    h = {v: data.draw(st.integers(0, f.full), label=v) for v in sorted(S.variables_of(p))}
    assert V.eval(f, h, S.desugar(p)) == direct_value(f, h, p)


# ---- G, J and H on small structures -------------------------------------------

SMALL_PREDS = st.sampled_from([S.parse(t) for t in (
    "A", "B", "1'", "A^", "-A", "A ; B", "A + B^", "A & -B", "A -> B", "0'", "A ! B")])
VARS = st.integers(0, 2)


def formulas(max_leaves=4):
    atom = st.builds(T.AtomFml, VARS, SMALL_PREDS, VARS)
    eq = st.builds(T.Equation, SMALL_PREDS, SMALL_PREDS)
    leaves = st.one_of(atom, atom, atom, eq)

    def extend(ch):
        return st.one_of(
            st.builds(T.Not, ch),
            st.builds(T.Implies, ch, ch),
            st.builds(T.ForAll, VARS, ch),
            st.builds(T.And, ch, ch),
            st.builds(T.Or, ch, ch),
            st.builds(T.Exists, VARS, ch),
        )
    return st.recursive(leaves, extend, max_leaves=max_leaves).filter(
        lambda phi: T.clause_count(phi) <= 400 and T.clause_count(T.ForAll(2, T.closure(phi))) <= 400)


@st.composite
def structures(draw):
    n = draw(st.integers(1, 4))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    density = draw(st.sampled_from([0.2, 0.5, 0.8]))
    return T.random_structure(n, ["A", "B"], np.random.default_rng(seed), density)


def _truth_table(st_, phi):
    n = st_.size
    out = np.zeros((n, n, n), dtype=bool)
    for s in T.assignments(st_, (0, 1, 2)):
        out[s[0], s[1], s[2]] = T.satisfies(st_, phi, s)
    return out


@PROPS
@given(structures(), formulas())
def test_g_preserves_satisfaction(st_, phi):
    g = T.translate_G(phi)
    for s in T.assignments(st_, (0, 1, 2)):
        assert T.satisfies(st_, g, s) == T.satisfies(st_, phi, s)


@PROPS
@given(structures(), formulas())
def test_j_preserves_satisfaction(st_, phi):
    assert np.array_equal(T.translate_J(phi).table(st_), _truth_table(st_, phi))


@PROPS
@given(structures(), formulas())
def test_h_preserves_truth_of_sentences(st_, phi):
    sentence = T.closure(phi)
    eq = T.translate_H(sentence)
    assert T.satisfies(st_, eq) == T.satisfies(st_, sentence)


# ---- frame conditions against the algebra's axioms ------------------------------

@PROPS
@given(st.one_of(frames(max_n=3), na_frames(max_n=4), frames(max_n=3, single_identity=True)))
def test_conditions_match_axioms(f):
    rep = F.classify(f)
    alg = RA.algebra_class(f)
    assert alg["NA"] == rep.na
    assert alg["SA"] == rep.sa
    assert alg["RA"] == rep.ra
    if rep.na:
        props = RA.properties(f)
        assert props["dense"] == rep.conditions["dense"]
        assert props["commutative"] == rep.conditions["comm"]
        assert props["symmetric"] == rep.conditions["symm"]


@PROPS
@given(frames(max_n=4))
def test_semi_pasch_matches_weak_associativity(f):
    if F.classify(f).na:
        assert RA.check_axiom(f, "R4'") == F.check_condition(f, "semi-pasch")


@st.composite
def symmetric_na_frames(draw):
    n = draw(st.integers(2, 5))
    star = tuple(range(n))
    seed = draw(st.lists(st.tuples(*[st.integers(1, n - 1)] * 3), max_size=10))
    from helpers import close_triples, reflections
    tr = close_triples([(x, 0, x) for x in range(n)] + seed, reflections(star))
    return F.Frame(n, tr, star, 1)


@PROPS
@given(symmetric_na_frames())
def test_symmetric_na_frames_commute(f):
    assert F.classify(f).na
    assert F.check_condition(f, "comm")
    assert RA.properties(f)["commutative"]


# ---- isomorphism invariance ----------------------------------------------------

@PROPS
@given(frames(max_n=4), predicates(max_leaves=8), st.data())
def test_eval_is_isomorphism_invariant(f, p, data):
    perm = data.draw(st.permutations(range(f.n)))
    g = f.relabel(perm)
    move = lambda m: sum(1 << perm[x] for x in range(f.n) if m >> x & 1)
    h = {v: data.draw(st.integers(0, f.full)) for v in sorted(S.variables_of(p))}
    assert V.eval(g, {k: move(v) for k, v in h.items()}, p) == move(V.eval(f, h, p))


@PROPS
@given(na_frames(min_n=2, max_n=5), st.data())
def test_canonical_form_is_isomorphism_invariant(f, data):
    perm = data.draw(st.sampled_from(C.automorphisms(f.star)))
    assert C.canonical_form(f.relabel(perm)) == C.canonical_form(f)


# ---- relational bases ------------------------------------------------------------

@lru_cache(maxsize=None)
def _na4():
    return all_na_frames(4)


def test_basis_dimension_three_and_four_on_all_small_sa_frames():
    checked = 0
    for f in _na4():
        rep = F.classify(f)
        if not rep.sa:
            assert not RA.relational_basis_exists(f, 3, check_precondition=False).exists
            continue
        assert RA.relational_basis_exists(f, 3).exists
        assert RA.relational_basis_exists(f, 4).exists == rep.conditions["pasch"]
        checked += 1
    assert checked == 220


def test_diamond_gives_bases():
    small = list(_na4())
    kr5 = C.representatives(5, "kr")
    for f in small + kr5:
        if RA.diamond(f, 1):
            assert RA.relational_basis_exists(f, 3, check_precondition=False).exists
    sample = random.Random(7).sample(kr5, 40)
    for f in small + sample:
        if RA.diamond(f, 2):
            assert RA.relational_basis_exists(f, 4, check_precondition=False).exists
