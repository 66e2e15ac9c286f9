import pytest
from hypothesis import given, strategies as st

from universefan.errors import InputError, NotALattice, NoTop
from universefan.fixtures import load_fixture
from universefan.lattice import (boolean_lattice, build_lattice_from_covers, chain_lattice, check_axioms,
                                 flats_lattice_of_graph, is_irreducible, is_product_iso)
from universefan.oracles import OrderOnly

PENTAGON = (["0", "a", "b", "c", "1"], [("0", "a"), ("a", "b"), ("0", "c"), ("b", "1"), ("c", "1")])
DIAMOND = (["0", "x", "y", "z", "1"], [("0", "x"), ("0", "y"), ("0", "z"), ("x", "1"), ("y", "1"), ("z", "1")])


def test_boolean_sizes():
    for n in range(1, 5):
        L = boolean_lattice(n)
        assert len(list(L.elements())) == 2 ** n
        assert len(L.atoms) == n and L.is_atomic
        assert L.grade(L.top) == n


def test_star_flats_are_boolean():
    L, _ = load_fixture("star")
    assert sorted(L.id(i) for i in L.elements()) == ["0", "1", "12", "123", "13", "2", "23", "3"]


def test_triangle_flats():
    # a triangle: any two edges span the third, so the flats are 0, a, b, c, abc
    L = flats_lattice_of_graph([("a", "u", "v"), ("b", "v", "w"), ("c", "u", "w")])
    assert len(list(L.elements())) == 5
    assert L.join(L.index("a"), L.index("b")) == L.top


def test_pentagon_from_covers():
    L = build_lattice_from_covers(*PENTAGON)
    a, b, c = (L.index(x) for x in "abc")
    assert L.join(a, c) == L.top and L.meet(b, c) == L.bottom
    assert L.leq(a, b) and not L.leq(c, b)
    assert check_axioms(L)


def test_cover_errors():
    with pytest.raises(NoTop):
        build_lattice_from_covers(["0", "a", "b"], [("0", "a"), ("0", "b")])
    # two minimal upper bounds of a, b: not a lattice
    with pytest.raises(NotALattice):
        build_lattice_from_covers(["0", "a", "b", "c", "d", "1"],
                                  [("0", "a"), ("0", "b"), ("a", "c"), ("b", "c"), ("a", "d"),
                                   ("b", "d"), ("c", "1"), ("d", "1")])
    with pytest.raises(InputError):
        build_lattice_from_covers(["0", "a"], [("0", "a"), ("a", "0")])


@pytest.mark.parametrize("make", [lambda: boolean_lattice(3), lambda: chain_lattice(4),
                                  lambda: build_lattice_from_covers(*PENTAGON),
                                  lambda: build_lattice_from_covers(*DIAMOND),
                                  lambda: load_fixture("bowtie")[0]])
def test_join_meet_match_order_oracle(make):
    L = make()
    O = OrderOnly(L)
    els = list(L.elements())
    for a in els:
        for b in els:
            assert L.join(a, b) == O.join(a, b)
            assert L.meet(a, b) == O.meet(a, b)


@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))
def test_boolean_lattice_axioms(x, y, z):
    L = boolean_lattice(4)
    a, b, c = (L.index_of_mask(m) for m in (x, y, z))
    assert L.join(a, L.join(b, c)) == L.join(L.join(a, b), c)
    assert L.meet(a, L.join(a, b)) == a
    assert L.leq(a, b) == (L.join(a, b) == b)


def test_irreducibility_and_products():
    L = boolean_lattice(3)
    assert all(is_irreducible(L, a) for a in L.atoms)
    top = L.top
    assert not is_irreducible(L, top)
    assert is_product_iso(L, top, L.atoms)
    D = build_lattice_from_covers(*DIAMOND)
    assert is_irreducible(D, D.top)
