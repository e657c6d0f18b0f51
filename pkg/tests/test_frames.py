import pytest
from hypothesis import given, settings

from relframe import frames as F

from helpers import frames

# Composition tables transcribed by hand; rows are x, columns y, cells {x};{y}.
K1 = {"0": ["0", "a", "b", "c"], "a": ["a", "0a", "c", "b"],
      "b": ["b", "c", "0b", "a"], "c": ["c", "b", "a", "0c"]}
K2 = {"0": ["0", "a", "b", "B"], "a": ["a", "0abB", "ab", "a"],
      "b": ["b", "a", "b", "0abB"], "B": ["B", "aB", "0bB", "B"]}
K4 = {"0": ["0", "a", "A"], "a": ["a", "aA", "0aA"], "A": ["A", "0aA", "A"]}
K5 = {"0": ["0", "a", "b", "c"], "a": ["a", "0ac", "bc", "ab"],
      "b": ["b", "bc", "0ab", "ac"], "c": ["c", "ab", "ac", "0bc"]}


def table_of(f, letters):
    out = {}
    for x in range(f.n):
        out[letters[x]] = ["".join(letters[z] for z in range(f.n) if f.compose_table[x][y] >> z & 1)
                           for y in range(f.n)]
    return out


@pytest.mark.parametrize("name, letters, table", [
    ("k1", "0abc", K1), ("k2", "0abB", K2), ("k4", "0aA", K4), ("k5", "0abc", K5)])
def test_builtin_tables(name, letters, table):
    f = F.builtin_frame(name)
    assert table_of(f, letters) == table


def test_k3_is_the_two_element_group():
    f = F.builtin_frame("k3")
    assert f.triples == {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)}
    assert f.star == (0, 1)


@pytest.mark.parametrize("name, dense, comm, symm", [
    ("k1", True, True, True), ("k2", True, False, False), ("k3", False, True, True),
    ("k4", True, True, False), ("k5", True, True, True)])
def test_builtin_conditions(name, dense, comm, symm):
    f = F.builtin_frame(name)
    assert F.check_condition(f, "dense") is dense
    assert F.check_condition(f, "comm") is comm
    assert F.check_condition(f, "symm") is symm
    assert F.classify(f).na is (name != "k4")


def test_k1_is_sa_but_not_ra():
    r = F.classify(F.builtin_frame("k1"))
    assert r.sa and not r.ra
    # p2 says (a;b);c = (a;c);b, which fails without associativity
    assert not r.conditions["p2"] and not r.cr


def test_k5_is_kr():
    assert F.classify(F.builtin_frame("k5")).kr


def test_k4_is_cr_without_reflections():
    r = F.classify(F.builtin_frame("k4"))
    assert r.cr and not r.na
    assert not r.conditions["left-reflection"]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_pair_frames_are_ra(m):
    r = F.classify(F.make_pair_frame(m))
    assert r.ra
    assert r.conditions["comm"] == (m == 1)


@pytest.mark.parametrize("m", [1, 2, 3, 5, 6])
def test_group_frames(m):
    f = F.make_cyclic_group_frame(m)
    r = F.classify(f)
    assert r.ra and r.conditions["comm"]
    assert r.conditions["symm"] == (m <= 2)
    assert not r.conditions["dense"] or m == 1


def test_compose_and_converse_on_sets():
    f = F.builtin_frame("k2")
    a, b, bs = 0b0010, 0b0100, 0b1000
    assert f.compose(a, b) == 0b0110
    assert f.compose(a | b, bs) == f.compose(a, bs) | f.compose(b, bs)
    assert f.converse(b) == bs
    assert f.compose(0, f.full) == 0
    assert f.format_set(a | bs) == "{a,b*}"


def test_lut_matches_compose():
    f = F.builtin_frame("k5")
    lut = f.compose_lut
    for x in range(16):
        for y in range(16):
            assert lut[x, y] == f.compose(x, y)


@settings(max_examples=300, deadline=None)
@given(frames(max_n=4))
def test_text_roundtrip(f):
    g = F.parse_frame_text(F.format_frame(f))
    assert (g.n, g.triples, g.star, g.identity) == (f.n, f.triples, f.star, f.identity)


@settings(max_examples=300, deadline=None)
@given(frames(max_n=3))
def test_relabel_preserves_conditions(f):
    perm = list(reversed(range(f.n)))
    g = f.relabel(perm)
    for c in F.Condition:
        if c.name.startswith("P"):
            continue
        assert F.check_condition(f, c) == F.check_condition(g, c)


@pytest.mark.parametrize("text", [
    "elements 2\nstar 0 2\n",
    "triples\n0 0 9\nend\nelements 2\n",
    "bogus 1\n",
    "star 0 1\n",
    "elements 2\ntriples\n0 0\nend\n",
])
def test_bad_frame_text(text):
    with pytest.raises(F.FrameError):
        F.parse_frame_text(text)


def test_frame_limits():
    with pytest.raises(F.FrameError):
        F.Frame(0, [], [], 0)
    with pytest.raises(F.FrameError):
        F.Frame(31, [], list(range(31)), 1)
    with pytest.raises(F.FrameError):
        F.make_pair_frame(6)


def test_unknown_builtin():
    with pytest.raises(F.FrameError):
        F.builtin_frame("k9")
