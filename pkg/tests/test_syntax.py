import pytest
from hypothesis import given, settings

from relframe import syntax as S
from relframe.syntax import Atom, Complement, Converse, Identity, Join, RelProd

from helpers import predicates

A, B, C = Atom("A"), Atom("B"), Atom("C")


@pytest.mark.parametrize("text, tree", [
    ("A + B ; C", Join(A, RelProd(B, C))),
    ("A ; B ; C", RelProd(RelProd(A, B), C)),
    ("-A^", Complement(Converse(A))),
    ("A -> B -> C", S.Implies(S.Implies(A, B), C)),
    ("A o B", S.Fusion(A, B)),
    ("A & B | C", S.Or(S.And(A, B), C)),
    ("A . B ! C", S.Dagger(S.Meet(A, B), C)),
    ("~A*", S.DeMorganNeg(S.Star(A))),
    ("not t", S.BoolNeg(S.Truth())),
    ("1' + 0'", Join(Identity(), S.Diversity())),
])
def test_parse_precedence(text, tree):
    assert S.parse_predicate(text) == tree


@pytest.mark.parametrize("bad", ["", "A +", "(A", "A B", "A ;; B", "-", "A)"])
def test_parse_errors(bad):
    with pytest.raises(S.PredicateSyntaxError):
        S.parse_predicate(bad)


def test_syntax_error_has_position():
    with pytest.raises(S.PredicateSyntaxError) as e:
        S.parse_predicate("A + + B")
    assert e.value.pos == 4


def test_desugar_shapes():
    assert S.desugar(S.Fusion(A, B)) == RelProd(B, A)
    assert S.desugar(S.Implies(A, B)) == Complement(RelProd(Converse(A), Complement(B)))
    assert S.desugar(S.DeMorganNeg(A)) == Complement(Converse(A))
    assert S.desugar(S.Dagger(A, B)) == Complement(RelProd(Complement(A), Complement(B)))
    assert S.desugar(S.Truth()) == Identity()
    assert S.desugar(S.Star(A)) == Converse(A)


def test_vocabulary():
    assert S.vocabulary_class(S.parse("A ; B^")) is S.VocabularyClass.CORE
    assert S.vocabulary_class(S.parse("A -> ~B o t")) is S.VocabularyClass.RELEVANCE_ONLY
    assert S.vocabulary_class(S.parse("A -> B*")) is S.VocabularyClass.CLASSICAL_RELEVANT


def test_variables_and_substitution():
    p = S.parse("C o (A -> B) | C")
    assert S.variables_in_order(p) == ["C", "A", "B"]
    assert S.variables_of(p) == {"A", "B", "C"}
    q = S.substitute(p, {"C": S.parse("A & B")})
    assert S.variables_of(q) == {"A", "B"}
    assert S.size(S.parse("A ; B")) == 3


@settings(max_examples=1000, deadline=None)
@given(predicates())
def test_print_parse_roundtrip(p):
    assert S.parse_predicate(S.print_predicate(p)) == p


@settings(max_examples=300, deadline=None)
@given(predicates())
def test_desugar_is_core_and_idempotent(p):
    q = S.desugar(p)
    assert S.is_core(q)
    assert S.desugar(q) == q
    assert S.variables_of(q) <= S.variables_of(p)
