import numpy as np
import pytest

from relframe import syntax as S
from relframe import translate as T

ST = T.Structure.of(3, {"A": [(0, 1), (1, 2), (2, 2)], "B": [(1, 0), (2, 1)]})


def everywhere_equal(phi, psi, st=ST, vars_=(0, 1, 2)):
    return all(T.satisfies(st, phi, s) == T.satisfies(st, psi, s) for s in T.assignments(st, vars_))


@pytest.mark.parametrize("text", [
    "v0 A v1",
    "v0 A;B v1 => !(v1 B^ v0)",
    "forall v2 (v0 A v2 => v2 B v1)",
    "exists v1 (v0 A v1 && v1 A v2)",
    "A == B^",
    "(A;B == B) || v0 1' v1",
    "v0 (A + -B) v1 <=> v1 A^ v0",
])
def test_print_parse_roundtrip(text):
    phi = T.parse_formula(text)
    assert T.parse_formula(T.print_formula(phi)) == phi


def test_parse_shapes():
    phi = T.parse_formula("forall v2 (v0 A v2 => v2 B v1)")
    assert isinstance(phi, T.ForAll) and phi.var == 2
    assert phi.body == T.Implies(T.AtomFml(0, S.Atom("A"), 2), T.AtomFml(2, S.Atom("B"), 1))
    eq = T.parse_formula("A -> B == 1")
    assert eq == T.Equation(S.parse("A -> B"), S.One())


@pytest.mark.parametrize("bad", ["", "v0 A", "v0 v1", "forall (v0 A v1)", "A ==", "v0 A v1 &&"])
def test_parse_errors(bad):
    with pytest.raises(T.FormulaSyntaxError):
        T.parse_formula(bad)


def test_free_vars_and_closure():
    phi = T.parse_formula("forall v2 (v0 A v2 => v2 B v1)")
    assert T.free_vars(phi) == {0, 1}
    assert T.variables(phi) == {0, 1, 2}
    c = T.closure(phi)
    assert not T.free_vars(c)
    assert isinstance(c, T.ForAll) and c.var == 0 and c.body.var == 1


def test_denote_by_hand():
    ab = T.denote(ST, S.parse("A ; B"))
    assert {(int(i), int(j)) for i, j in zip(*ab.nonzero())} == {(0, 0), (1, 1), (2, 1)}
    assert T.denote(ST, S.parse("A^")).sum() == 3
    assert T.denote(ST, S.parse("1")).all()
    assert not T.denote(ST, S.parse("0")).any()


def test_satisfies_quantifiers():
    assert T.satisfies(ST, T.parse_formula("forall v0 exists v1 (v0 A v1)"))
    assert not T.satisfies(ST, T.parse_formula("forall v0 exists v1 (v1 A v0)"))
    assert T.satisfies(ST, T.parse_formula("v0 A v1"), {0: 0, 1: 1})
    with pytest.raises(T.UnassignedVariable):
        T.satisfies(ST, T.parse_formula("v0 A v1"), {0: 0})


def test_g_removes_operators():
    phi = T.parse_formula("v0 (A ; B^) + -A v1")
    g = T.translate_G(phi)
    atoms = [f.pred for f in _atoms(g)]
    assert all(isinstance(p, (S.Atom, S.Identity)) for p in atoms)
    assert everywhere_equal(phi, g, vars_=(0, 1))


def _atoms(phi):
    if isinstance(phi, T.AtomFml):
        yield phi
    for c in phi.children():
        yield from _atoms(c)


def test_j_atom_table():
    assert T.translate_J(T.parse_formula("v0 A v1")).clauses == ((S.Zero(), S.Zero(), S.Atom("A")),)
    neg = T.translate_J(T.parse_formula("!(v0 A v1)"))
    assert len(neg) == 3


@pytest.mark.parametrize("text", [
    "v0 A v1",
    "v2 A v0",
    "v1 B v1",
    "!(v0 A v1) => v2 B;A v0",
    "forall v2 (v0 A v2 => v2 B v1)",
    "forall v0 (v0 A v2)",
    "forall v1 (v2 B v1)",
    "A == B^",
])
def test_j_agrees_with_satisfaction(text):
    phi = T.parse_formula(text)
    table = T.translate_J(phi).table(ST)
    for s in T.assignments(ST, (0, 1, 2)):
        assert table[s[0], s[1], s[2]] == T.satisfies(ST, phi, s)


@pytest.mark.parametrize("text", [
    "forall v0 forall v1 (v0 A v1 => v1 A^ v0)",
    "forall v0 exists v1 (v0 A v1)",
    "exists v0 (v0 A v0)",
    "A == B^",
])
def test_h_agrees_with_satisfaction(text):
    phi = T.parse_formula(text)
    eq = T.translate_H(phi)
    assert isinstance(eq.lhs, S.One)
    for st in (ST, T.Structure.of(2, {"A": [(0, 0)], "B": []})):
        assert T.satisfies(st, eq) == T.satisfies(st, phi)


def test_j_rejects_fourth_variable():
    with pytest.raises(ValueError):
        T.translate_J(T.parse_formula("v0 A v3"))


def test_h_needs_a_sentence():
    with pytest.raises(ValueError):
        T.translate_H(T.parse_formula("v0 A v1"))


def test_clause_budget():
    phi = T.parse_formula("exists v2 (v0 A v2 || v2 B v1)")
    assert T.clause_count(phi) > 200_000
    with pytest.raises(T.ClauseBudgetError):
        T.translate_J(phi)
    assert T.clause_count(T.parse_formula("!(v0 A v1)")) == 3


def test_clause_formula_is_equivalent():
    cf = T.translate_J(T.parse_formula("!(v0 A v1) => v2 B;A v0"))
    assert len(cf) == 27
    assert everywhere_equal(cf.formula(), T.parse_formula("!(v0 A v1) => v2 B;A v0"))


def test_structure_io(tmp_path):
    text = T.format_structure(ST)
    path = tmp_path / "s.txt"
    path.write_text(text)
    back = T.load_structure(str(path))
    assert back.size == 3 and back.pairs("A") == ST.pairs("A")
    with pytest.raises(ValueError):
        T.parse_structure("base 2\nrel A: (0,5)\n")
    with pytest.raises(ValueError):
        T.parse_structure("base 7\n")
    with pytest.raises(ValueError):
        T.parse_structure("rel A: (0,0)\n")


def test_random_structure_is_seeded():
    a = T.random_structure(3, ["A"], np.random.default_rng(5))
    b = T.random_structure(3, ["A"], np.random.default_rng(5))
    assert np.array_equal(a.interp["A"], b.interp["A"])


def test_holds_everywhere():
    assert T.holds_everywhere(ST, T.parse_formula("v0 A v1 => v1 A^ v0"))
    assert not T.holds_everywhere(ST, T.parse_formula("v0 A v1"))
