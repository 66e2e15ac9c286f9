import pytest
from hypothesis import given, strategies as st

from universefan.fixtures import load_fixture
from universefan.lattice import boolean_lattice, build_lattice_from_covers
from universefan.nestoid import (Nestable, diagnose, enumerate_causal_regions, enumerate_nested_sets,
                                 is_building_set, is_causal_region, is_nestable, is_nested, is_nestoid,
                                 is_stable, parse_region)
from universefan.errors import InputError
from universefan.oracles import (building_oracle, maximal_nested_oracle, nestable_oracle, nested_oracle,
                                 nestoid_oracle, upstream_lower_set_holds)

FIXTURES = ["star", "bowtie", "bool2", "bool3-intervals", "nonbuild-nestoid", "polygon-n3", "polygon-n4"]
DIAMOND = (["0", "x", "y", "z", "1"], [("0", "x"), ("0", "y"), ("0", "z"), ("x", "1"), ("y", "1"), ("z", "1")])


def small_lattices():
    return [boolean_lattice(3), build_lattice_from_covers(*DIAMOND), load_fixture("star")[0]]


@st.composite
def subsets_with_top(draw):
    L = draw(st.sampled_from(small_lattices()))
    rest = [e for e in L.elements() if e not in (L.bottom, L.top)]
    chosen = draw(st.lists(st.sampled_from(rest), unique=True)) if rest else []
    return L, sorted(set(chosen) | {L.top})


@given(subsets_with_top())
def test_nestable_matches_definition(case):
    L, G = case
    assert is_nestable(L, G) == nestable_oracle(L, G)


@given(subsets_with_top())
def test_building_matches_definition(case):
    L, G = case
    assert is_building_set(L, G) == building_oracle(L, G)


@given(subsets_with_top())
def test_nestoid_and_nested_sets_match_brute_force(case):
    L, G = case
    if not is_nestable(L, G):
        return
    N = Nestable(L, G)
    assert is_nestoid(L, N) == nestoid_oracle(L, G)
    fast = sorted(tuple(sorted(S)) for S in enumerate_nested_sets(N, only_maximal=True))
    assert fast == maximal_nested_oracle(L, G)
    for S in enumerate_nested_sets(N):
        assert is_nested(N, S) and nested_oracle(L, G, S)


@given(subsets_with_top())
def test_upstream_lower_set_lemma(case):
    L, G = case
    if is_nestable(L, G):
        assert upstream_lower_set_holds(L, G)[0]


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_predicates(name):
    L, G = load_fixture(name)
    assert is_nestable(L, G.members)
    assert is_nestoid(L, G)
    assert is_stable(L, G)
    assert is_building_set(L, G) == (name != "nonbuild-nestoid")


def test_bowtie_nested_set_count():
    _, G = load_fixture("bowtie")
    sets = enumerate_nested_sets(G, only_maximal=True)
    assert len(sets) == 38 and {len(N) for N in sets} == {4}


def test_star_nested_sets_all_faces():
    _, G = load_fixture("star")
    faces = enumerate_nested_sets(G)
    assert len(enumerate_nested_sets(G, only_maximal=True)) == 6
    # every face of a maximal set is a face
    for N in enumerate_nested_sets(G, only_maximal=True):
        assert tuple(sorted(N)) in {tuple(sorted(F)) for F in faces}


def test_diagnose_witnesses():
    L, G = load_fixture("nonbuild-nestoid")
    rows = {p: (h, w) for p, h, w in diagnose(L, G)}
    assert rows["building"][0] is False and "missing" in rows["building"][1]
    B = boolean_lattice(4)
    # 12 and 23 overlap but their join 123 is missing
    bad = [B.index(x) for x in ("12", "23", "1234")]
    rows = {p: (h, w) for p, h, w in diagnose(B, Nestable(B, bad))}
    assert rows["nestable"][0] is False and rows["nestable"][1]


def test_causal_regions():
    L, G = load_fixture("star")
    regs = enumerate_causal_regions(G)
    assert len(regs) == 19
    assert all(is_causal_region(G, R) for R in regs)
    R = parse_region(G, "123;12")
    assert R in regs
    with pytest.raises(InputError):
        parse_region(G, "12;3")
    with pytest.raises(InputError):
        parse_region(G, "123;12,3")  # 12 ∨ 3 lies in G, so the feet are not nested
