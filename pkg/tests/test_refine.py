import itertools

import pytest
from hypothesis import given, strategies as st

from universefan.errors import InputError
from universefan.fixtures import load_fixture
from universefan.nestoid import enumerate_nested_sets
from universefan.refine import (BooleanBuildingSet, brute_force_btrees, btrees, lightcone_refinement,
                                minmax_subdivision, tubing_triangulation)
from universefan.polyhedral import rank


def _closure(ground, seeds):
    fam = {frozenset([g]) for g in ground} | {frozenset(s) for s in seeds}
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(fam), 2):
            if a & b and (a | b) not in fam:
                fam.add(a | b)
                changed = True
    return fam


@st.composite
def building_sets(draw):
    n = draw(st.integers(2, 4))
    ground = list(range(1, n + 1))
    subsets = [set(c) for k in range(2, n + 1) for c in itertools.combinations(ground, k)]
    seeds = draw(st.lists(st.sampled_from(subsets), max_size=4))
    return BooleanBuildingSet(ground, _closure(ground, seeds + [set(ground)]))


@given(building_sets())
def test_btrees_match_brute_force(B):
    fast = sorted(T.text() for T in btrees(B))
    slow = sorted(T.text() for T in brute_force_btrees(B))
    assert fast == slow


@given(building_sets())
def test_min_subdivision_is_simplicial(B):
    fan = minmax_subdivision(B, "min")
    for i, c in enumerate(fan.cones):
        assert len(c) == rank(fan.cone_gens(i))


def test_bad_boolean_building_set():
    with pytest.raises(InputError):
        BooleanBuildingSet([1, 2, 3], [{1}, {2}, {3}, {1, 2}, {2, 3}])


@pytest.mark.parametrize("name", ["star", "bool2", "polygon-n3", "polygon-n4"])
def test_tubing_triangulation_unimodular_and_matches_oracle(name):
    _, G = load_fixture(name)
    for N in enumerate_nested_sets(G, only_maximal=True):
        tt = tubing_triangulation(G, N, oracle=True)
        assert tt.dets == {"rooted": {1}, "forest": {1}}


@pytest.mark.parametrize("selector", ["minimal", "graphical"])
def test_lightcone_refinement_cones_meet_properly(selector):
    _, G = load_fixture("bool2")
    ref = lightcone_refinement(G, selector)
    assert ref.pairwise_ok()
