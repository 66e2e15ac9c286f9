"""Named example inputs.

``load_fixture(name)`` returns ``(lattice, nestable)``.  Everything here is
deterministic: element order, ids and member order never depend on hashing.
"""
from __future__ import annotations

from .errors import UnknownFixture
from .lattice import boolean_lattice, build_lattice_from_covers, flats_lattice_of_graph
from .nestoid import Nestable

STAR_EDGES = [("1", "o", "x"), ("2", "o", "y"), ("3", "o", "z")]

# two triangles glued at the vertex "m"
BOWTIE_EDGES = [
    ("a", "p", "m"),
    ("b", "q", "m"),
    ("c", "p", "q"),
    ("d", "m", "r"),
    ("e", "m", "s"),
    ("f", "r", "s"),
]

# The poset drawn for the non-building nestoid lacks joins such as 1 ∨ 3
# (both 123 and 134 are minimal upper bounds).  Its Dedekind–MacNeille
# completion adds the two diagonals 13 and 24 and is the Boolean lattice on
# four atoms; the fixture uses that completion.
NONBUILD_DRAWN_COVERS = [
    ("0", "1"), ("0", "2"), ("0", "3"), ("0", "4"),
    ("1", "12"), ("2", "12"), ("2", "23"), ("3", "23"),
    ("3", "34"), ("4", "34"), ("1", "14"), ("4", "14"),
    ("12", "123"), ("23", "123"), ("23", "234"), ("34", "234"),
    ("34", "134"), ("14", "134"), ("12", "124"), ("14", "124"),
    ("123", "1234"), ("234", "1234"), ("134", "1234"), ("124", "1234"),
]
NONBUILD_DRAWN_ELEMS = ["0", "1", "2", "3", "4", "12", "23", "34", "14",
                        "123", "234", "134", "124", "1234"]
NONBUILD_MEMBERS = ["4", "12", "123", "124", "1234"]


def graphical_members(lat):
    """Connected flats: the graphical building set of a graph's flat lattice."""
    edges = lat.graph_edges
    out = []
    for i in lat.elements():
        m = lat.mask(i)
        if m == 0:
            continue
        chosen = [edges[k] for k in range(len(edges)) if m >> k & 1]
        # union-find on the chosen edges
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                x = parent[x]
            return x

        for _, u, v in chosen:
            parent[find(u)] = find(v)
        roots = {find(u) for _, u, _ in chosen}
        if len(roots) == 1:
            out.append(i)
    return out


def star():
    L = flats_lattice_of_graph(STAR_EDGES)
    return L, Nestable(L, [i for i in L.elements() if i != L.bottom])


def bowtie():
    L = flats_lattice_of_graph(BOWTIE_EDGES)
    return L, Nestable(L, graphical_members(L))


def bool2():
    L = boolean_lattice(2)
    return L, Nestable(L, [i for i in L.elements() if i != L.bottom])


def bool3_intervals():
    L = boolean_lattice(3)
    names = ["1", "2", "3", "12", "23", "123"]
    return L, Nestable(L, [L.index(s) for s in names])


def bool3_graphical():
    """Boolean {1,2,3} with the path building set 1-2-3 (connected subsets)."""
    return bool3_intervals()


def nonbuild_drawn():
    """The poset exactly as drawn; raises NotALattice."""
    return build_lattice_from_covers(NONBUILD_DRAWN_ELEMS, NONBUILD_DRAWN_COVERS)


def nonbuild_nestoid():
    elems = NONBUILD_DRAWN_ELEMS + ["13", "24"]
    covers = NONBUILD_DRAWN_COVERS + [
        ("1", "13"), ("3", "13"), ("13", "123"), ("13", "134"),
        ("2", "24"), ("4", "24"), ("24", "124"), ("24", "234"),
    ]
    L = build_lattice_from_covers(elems, covers)
    return L, Nestable(L, [L.index(s) for s in NONBUILD_MEMBERS])


def polygon(n):
    from .physics import build_polygon
    model = build_polygon(n)
    return model.lattice, model.nestable


FIXTURES = {
    "star": star,
    "bowtie": bowtie,
    "bool2": bool2,
    "bool3-intervals": bool3_intervals,
    "nonbuild-nestoid": nonbuild_nestoid,
}
for _n in range(3, 9):
    FIXTURES[f"polygon-n{_n}"] = (lambda n: (lambda: polygon(n)))(_n)


def load_fixture(name):
    try:
        make = FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
    return make()
