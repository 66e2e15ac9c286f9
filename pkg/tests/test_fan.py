import pytest

from universefan.errors import InputError
from universefan.fan import (check_region_factorization, check_total_energy_residue, face_lattice,
                             marking_violation, parse_marking, universe_max_cone, universe_rays,
                             wavefunction, wavefunction_by_pulling)
from universefan.fixtures import load_fixture
from universefan.nestoid import enumerate_causal_regions, enumerate_nested_sets
from universefan.ratexpr import equal
from universefan.refine import wavefunction_by_min_subdivision


def test_star_wavefunction_size():
    _, G = load_fixture("star")
    assert len(wavefunction(G)) == 12


@pytest.mark.parametrize("name", ["star", "bool2", "polygon-n3"])
def test_three_wavefunction_routes_agree(name):
    _, G = load_fixture(name)
    psi = wavefunction(G)
    assert equal(psi, wavefunction_by_pulling(G))
    assert equal(psi, wavefunction_by_min_subdivision(G))


@pytest.mark.parametrize("name", ["star", "bool2", "polygon-n3", "polygon-n4"])
def test_total_energy_residue(name):
    _, G = load_fixture(name)
    assert check_total_energy_residue(G)


@pytest.mark.parametrize("name", ["star", "polygon-n3"])
def test_every_region_factorizes(name):
    _, G = load_fixture(name)
    for R in enumerate_causal_regions(G):
        assert check_region_factorization(G, R), R.label(G.lat)


def test_universe_rays_one_per_region():
    _, G = load_fixture("star")
    rays = universe_rays(G)
    assert len(rays) == len(enumerate_causal_regions(G)) == 19
    assert len({tuple(v) for _, v in rays}) == len(rays)


@pytest.mark.parametrize("name", ["star", "bool2"])
def test_universe_cones_verify(name):
    _, G = load_fixture(name)
    for N in enumerate_nested_sets(G, only_maximal=True):
        C = universe_max_cone(G, N)
        assert all(C.checks.values())
        assert C.dim == 2 * len(N) - 1


def test_bool2_face_lattice():
    _, G = load_fixture("bool2")
    fl = face_lattice(G)
    assert len(fl) == 13
    assert fl.count_by_dim() == {1: 5, 2: 6, 3: 2}


def test_marking_parse_and_conditions():
    _, G = load_fixture("star")
    L = G.lat
    m = parse_marking(G, "{123+,12+-•,1+-*}")
    assert m.text(L) == "{123+,12+-*,1+-*}"
    assert marking_violation(G, m) is None
    assert marking_violation(G, parse_marking(G, "{123+,12+*,1*}")) is not None
    with pytest.raises(InputError):
        parse_marking(G, "{123+,12+,4+}")
