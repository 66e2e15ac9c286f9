import pytest

from universefan.errors import InputError, TooLarge
from universefan.nestoid import enumerate_nested_sets
from universefan.physics import (amplitude_n, build_polygon, catalan, check_catalan, check_lambda,
                                 check_mandelstam, check_perimeter, check_total_energy, factorization_demo,
                                 physical_substitution, psi_n, russian_doll, triangulations)
from universefan.ratexpr import equal, to_canonical


def test_catalan_numbers():
    assert [catalan(k) for k in range(6)] == [1, 1, 2, 5, 14, 42]


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_nested_sets_are_triangulations(n):
    nested, tri, cat, same = check_catalan(n)
    assert nested == tri == cat and same


def test_triangulation_count_direct():
    assert len(triangulations(0, 5)) == catalan(4)


def test_square_wavefunction():
    want = "1/((Em:12+Ep:123)*Ep:12*Ep:123) + 1/((Em:23+Ep:123)*Ep:123*Ep:23)"
    assert to_canonical(psi_n(3)) == want


@pytest.mark.parametrize("n", [3, 4])
def test_russian_doll_equals_psi(n):
    assert equal(russian_doll(n), psi_n(n))


@pytest.mark.parametrize("n", [3, 4])
def test_energy_checks(n):
    assert check_total_energy(n)
    assert check_perimeter(n)
    assert check_mandelstam(n, trials=3, seed=1)


def test_lambda_on_pentagon():
    model = build_polygon(4)
    for N in enumerate_nested_sets(model.nestable, only_maximal=True):
        assert check_lambda(model, N)


def test_physical_substitution_uses_side_energies():
    model = build_polygon(3)
    phys = physical_substitution(psi_n(3), model)
    assert "E:star" in phys.variables()
    assert not any(v.startswith(("Ep:", "Em:")) for v in phys.variables())
    assert equal(phys, psi_n(3, physical=True))


def test_amplitude_counts_triangulations():
    # n path sides close up into an (n+1)-gon
    assert len(amplitude_n(5)) == catalan(4)


def test_chord_ids_and_limits():
    assert build_polygon(10).id(build_polygon(10).top) == "1.2.3.4.5.6.7.8.9.10"
    assert build_polygon(4).id(build_polygon(4).top) == "1234"
    with pytest.raises(InputError):
        build_polygon(2)
    with pytest.raises(TooLarge):
        build_polygon(13)
    with pytest.raises(TooLarge):
        psi_n(9)


def test_factorization_demo_on_pentagon():
    d = factorization_demo(4, "star-complement;12")
    assert d["region"] == "1234;12"
    assert d["G_in"] == ["1234", "123", "34"] and d["G_out"] == ["1234", "12"]
    assert d["equal"]
