import pytest

from relframe import frames as F
from relframe import racheck as RA


@pytest.mark.parametrize("name, na, sa, ra", [
    ("k1", True, True, False), ("k2", True, True, True), ("k3", True, True, True),
    ("k4", False, False, False), ("k5", True, True, True)])
def test_algebra_class(name, na, sa, ra):
    assert RA.algebra_class(F.builtin_frame(name)) == {"NA": na, "SA": sa, "RA": ra}


def test_k1_breaks_associativity_only():
    f = F.builtin_frame("k1")
    assert not RA.check_axiom(f, "R4")
    assert RA.check_axiom(f, "R4'")
    assert RA.check_axiom(f, RA.Axiom.R10)


def test_properties():
    assert RA.properties(F.builtin_frame("k2")) == {
        "dense": True, "commutative": False, "symmetric": False, "integral": True}
    assert RA.check_axiom(F.builtin_frame("k3"), "commutative")
    assert not RA.check_axiom(F.builtin_frame("k3"), "dense")


def test_parse_axiom():
    assert RA.parse_axiom("r4’") is RA.Axiom.R4P
    with pytest.raises(ValueError):
        RA.parse_axiom("R11")


def test_basis_of_k1_needs_three_dimensions_only():
    f = F.builtin_frame("k1")
    assert RA.relational_basis_exists(f, 3)
    assert not RA.relational_basis_exists(f, 4)


def test_basis_matrices_are_consistent():
    f = F.builtin_frame("k2")
    res = RA.relational_basis_exists(f, 4)
    assert res.exists and res.rounds >= 1
    for m in res.basis[:50]:
        for i in range(4):
            assert f.identity >> int(m[i, i]) & 1
            for j in range(4):
                assert m[j, i] == f.star[m[i, j]]
                for k in range(4):
                    assert f.compose_table[m[i, j]][m[j, k]] >> int(m[i, k]) & 1
    assert RA.format_basis(f, res.basis[0]).count("\n") == 3


def test_basis_needs_sa():
    with pytest.raises(RA.PreconditionError):
        RA.relational_basis_exists(F.builtin_frame("k4"), 3)
    with pytest.raises(ValueError):
        RA.relational_basis_exists(F.builtin_frame("k1"), 2)


def test_cycle_of_is_closed():
    f = F.builtin_frame("k5")
    cyc = RA.cycle_of(f, 1, 2, 3)
    assert cyc == {(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)}


def test_diamond():
    # the two-element group: a;a = {0} leaves no non-zero completion
    assert not RA.diamond(F.builtin_frame("k3"), 1)
    assert RA.diamond(F.builtin_frame("k5"), 1)
    assert RA.diamond(F.builtin_frame("k1"), 1)
    assert not RA.diamond(F.builtin_frame("k1"), 2)
    with pytest.raises(ValueError):
        RA.diamond(F.builtin_frame("k5"), 0)


def test_pair_frame_of_two_points():
    f = F.make_pair_frame(2)
    assert all(RA.algebra_class(f).values())
    assert RA.properties(f)["integral"] is False
    assert RA.relational_basis_exists(f, 3)
    assert RA.relational_basis_exists(f, 4)
