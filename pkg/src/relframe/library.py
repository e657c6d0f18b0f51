"""Named predicates and the fixed assignments used to invalidate them."""

from __future__ import annotations

from functools import lru_cache

from . import syntax as S

PREDICATES: dict[str, str] = {
    "ttt": "t",
    "lem": "A | not A",
    "lem1": "A | ~A",
    "self": "A -> A",
    "E-ax": "A -> A -> B -> B",
    "top": "A -> B | not B",
    "explosion": "A & not A -> B",
    "to4": "(A -> B) & (C -> D) -> (A | C -> B | D)",
    "fus4": "A -> (B -> A o B)",
    "mp-what": "A -> (B -> ~A -> ~B)",
    "reflection1": "A o B & C -> A o (B & ~D) | (A & C o D) o B",
    "reflection1a": "A o B & C -> (A & ~D) o B | A o (B & D o C)",
    "dedekind": "A o B & C -> (A & C o B*) o (B & A* o C)",
    "right-id": "t o A -> A",
    "left-id": "A o t -> A",
    "A->Aot*": "A -> A o t*",
    "t->t*": "t -> t*",
    "t*->t": "t* -> t",
    "min-th": "t & ~t -> A",
    "no.1": "A -> B -> (C -> A -> (C -> B))",
    "no.2": "A -> (B -> C) -> (A o B -> C)",
    "no.3": "A o B -> C -> (A -> (B -> C))",
    "no.4": "A -> B -> (A o C -> B o C)",
    "no.5": "A o B o C -> A o (B o C)",
    "no.6": "A o (B o C) -> A o B o C",
    "reductio": "A -> ~A -> ~A",
    "contract5": "A & B -> A o B",
    "contract4": "A -> B -> ~A | B",
    "contract2": "A -> (A -> B) -> (A -> B)",
    "contract3": "A -> (B -> C) -> (A & B -> C)",
    "mp": "A -> (A -> B -> B)",
    "contra": "A -> ~B -> (B -> ~A)",
    "perm": "A -> (B -> C) -> (B -> (A -> C))",
    "suff": "A -> B -> (B -> C -> (A -> C))",
    "self-dist": "A -> (B -> C) -> (A -> B -> (A -> C))",
    "symm-ax": "A & ~A -> B",
    "comm-ax": "A o B -> B o A",
    "L''": ("A ; B & C ; D & E ; F -> (A & ~A) ; B & C ; D & E ; F"
            " | A ; B & C ; (D & ~D) & E ; F | A ; B & C ; D & (E & ~E) ; F"
            " | A ; B & C ; D & E ; (F & ~F)"
            " | A ; (A ; C & B ; D & (A ; E & B ; F) ; (E ; C & F ; D)) ; D"),
    "M''": ("A & (B & C ; D) ; (E & F ; G) -> A & (B & (C & ~C) ; D) ; (E & F ; G)"
            " | A & (B & C ; D) ; (E & F ; (G & ~G))"
            " | C ; ((C ; A & D ; E) ; G & D ; F & C ; (A ; G & B ; F)) ; G"),
}

ALIASES = {"L2": "L''", "M2": "M''", "L″": "L''", "M″": "M''"}


def names() -> list[str]:
    return list(PREDICATES)


@lru_cache(maxsize=None)
def predicate(name: str) -> S.Term:
    name = ALIASES.get(name, name).strip("()")
    try:
        return S.parse_predicate(PREDICATES[name])
    except KeyError:
        raise KeyError(f"unknown named predicate {name!r}") from None


def resolve(text: str) -> S.Term:
    """A library name, optionally in parentheses, or literal predicate text."""
    key = text.strip()
    bare = key[1:-1] if key.startswith("(") and key.endswith(")") else key
    for k in (key, bare):
        k = ALIASES.get(k, k)
        if k in PREDICATES:
            return predicate(k)
    return S.parse_predicate(text)


# Six assignments into Cm(k1), one per grid row.
GRID_PREDICATES = ("no.1", "no.2", "no.3", "no.4", "no.5", "no.6",
                   "perm", "suff", "contract2", "contract3", "self-dist")
GRID_ASSIGNMENTS: dict[str, dict[str, set[str]]] = {
    "h1": {"A": {"a"}, "B": {"b"}, "C": {"0", "b"}},
    "h2": {"A": {"a"}, "B": {"a", "b"}, "C": {"0", "a", "b"}},
    "h3": {"A": {"a"}, "B": {"b"}, "C": {"a", "b"}},
    "h4": {"A": {"a"}, "B": {"b"}, "C": {"a", "c"}},
    "h5": {"A": {"a"}, "B": {"b"}, "C": {"b"}},
    "h6": {"A": {"a"}, "B": {"b", "c"}, "C": {"b"}},
}

# Predicates whose singleton invalidations in Cm(k2) are tabulated.
K2_PREDICATES = ("mp", "contra", "perm", "suff")

# One assignment into Cm(k3) per density-dependent predicate.
K3_CASES: dict[str, dict[str, set[str]]] = {
    "reductio": {"A": {"a"}},
    "contract5": {"A": {"a"}, "B": {"a"}},
    "contract4": {"A": {"a"}, "B": {"0"}},
    "contract2": {"A": {"a"}, "B": {"0"}},
    "contract3": {"A": {"a"}, "B": {"a"}, "C": {"0"}},
    "self-dist": {"A": {"a"}, "B": {"0"}, "C": {"0"}},
}

K4_PREDICATES = ("reflection1", "reflection1a", "dedekind")
K4_REFLECTION_ASSIGNMENT = {"A": {"a"}, "B": {"a"}, "C": {"a*"}, "D": {"a*"}}

K5_ASSIGNMENT = {"A": {"a"}, "B": {"a"}, "E": {"a"}, "G": {"a"},
                 "C": {"c"}, "F": {"c"}, "D": {"b"}}


def to_masks(frame, assignment: dict[str, set[str]]) -> dict[str, int]:
    """Element names to subset bitmasks over ``frame``."""
    index = {name: i for i, name in enumerate(frame.names)}
    return {v: sum(1 << index[e] for e in elems) for v, elems in assignment.items()}
