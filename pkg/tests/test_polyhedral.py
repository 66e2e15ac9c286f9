import itertools

from hypothesis import given, strategies as st

from universefan.polyhedral import (ConeZ, cone_facets, cone_facets_bruteforce, det, extreme_generators,
                                    lattice_index, nullspace, rank)

vec = st.lists(st.integers(-2, 2), min_size=3, max_size=3).map(tuple).filter(any)


def _norm(facets):
    return sorted(tuple(f) for f in facets)


@given(st.lists(vec, min_size=1, max_size=6))
def test_double_description_matches_brute_force(gens):
    # restrict to pointed cones: a strictly positive functional exists
    if not all(g[0] > 0 for g in gens):
        gens = [(abs(g[0]) + 1,) + g[1:] for g in gens]
    assert _norm(cone_facets(gens)) == _norm(cone_facets_bruteforce(gens))


@given(st.lists(vec, min_size=1, max_size=5))
def test_rank_and_nullspace(rows):
    r = rank(rows)
    ns = nullspace(rows, 3)
    assert r + len(ns) == 3
    for v in ns:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)


def test_det_and_index():
    assert det([[1, 2], [3, 4]]) == -2
    assert lattice_index([(1, 0), (0, 1)]) == 1
    assert lattice_index([(1, 1), (1, -1)]) == 2


def test_extreme_generators_drop_interior():
    gens = [(1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1)]
    assert sorted(extreme_generators(gens)) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_cube_cone():
    gens = [(1,) + p for p in itertools.product((0, 1), repeat=2)]
    C = ConeZ(gens)
    assert C.dim == 3 and not C.is_simplicial()
    assert len(C.facets()) == 4
