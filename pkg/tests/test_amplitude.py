import pytest

from universefan.amplitude import (amplitude, amplitude_E, check_building_invariance, check_factorization,
                                   check_projection_injective, term_degrees)
from universefan.fixtures import load_fixture
from universefan.nestoid import enumerate_nested_sets
from universefan.ratexpr import equal, parse_canonical, to_canonical

STAR = "1/(s:1*s:12) + 1/(s:1*s:13) + 1/(s:12*s:2) + 1/(s:13*s:3) + 1/(s:2*s:23) + 1/(s:23*s:3)"


def test_star_amplitude_string():
    _, G = load_fixture("star")
    assert to_canonical(amplitude(G)) == STAR


@pytest.mark.parametrize("name", ["star", "bowtie", "bool3-intervals", "polygon-n4"])
def test_one_term_per_maximal_nested_set(name):
    _, G = load_fixture(name)
    A = amplitude(G)
    assert len(A) == len(enumerate_nested_sets(G, only_maximal=True))
    # the top is suppressed in s variables, so each term has |N| - 1 factors
    assert set(term_degrees(A)) == {len(enumerate_nested_sets(G, only_maximal=True)[0]) - 1}


@pytest.mark.parametrize("name", ["star", "bowtie", "polygon-n4"])
def test_factorization_at_every_member(name):
    _, G = load_fixture(name)
    for f in G.members:
        assert check_factorization(G, f), G.id(f)


def test_bowtie_residue_at_abc_splits():
    _, G = load_fixture("bowtie")
    assert check_factorization(G, G.lat.index("abc"))


def test_doubled_amplitude_has_full_degree():
    _, G = load_fixture("star")
    E = amplitude_E(G)
    assert len(E) == 6


def test_building_invariance():
    _, G = load_fixture("bowtie")
    assert check_building_invariance(G)


@pytest.mark.parametrize("name", ["star", "bool2"])
def test_projection_injective(name):
    _, G = load_fixture(name)
    assert check_projection_injective(G, samples=200, seed=3)


def test_canonical_text_parses_back():
    _, G = load_fixture("bowtie")
    A = amplitude(G)
    assert equal(parse_canonical(to_canonical(A)), A)
