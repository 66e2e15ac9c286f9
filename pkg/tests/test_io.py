import json
import pathlib

import pytest
from hypothesis import given, strategies as st

from universefan import io
from universefan.errors import InputError
from universefan.fixtures import FIXTURES, load_fixture
from universefan.refine import lightcone_refinement
from universefan.errors import UnknownFixture

INPUTS = pathlib.Path(__file__).resolve().parent.parent / "inputs"
SMALL = ["star", "bowtie", "bool2", "bool3-intervals", "nonbuild-nestoid", "polygon-n3", "polygon-n4"]


@pytest.mark.parametrize("name", SMALL)
def test_nestable_round_trip(name):
    L, G = load_fixture(name)
    text = io.dumps(io.nestable_to_json(G))
    H = io.nestable_from_json(json.loads(text))
    assert io.nestables_equal(G, H)
    assert io.lattices_equal(L, io.lattice_from_json(io.lattice_to_json(L)))
    # serializing twice gives the same bytes
    assert io.dumps(io.nestable_to_json(H)) == text


def test_fixtures_are_byte_stable():
    for name in SMALL:
        a = io.dumps(io.nestable_to_json(load_fixture(name)[1]))
        b = io.dumps(io.nestable_to_json(load_fixture(name)[1]))
        assert a == b


@pytest.mark.parametrize("path", sorted(INPUTS.glob("*.json")))
def test_shipped_inputs_match_fixtures(path):
    G = io.load_input(str(path))
    assert io.nestables_equal(G, load_fixture(path.stem)[1])


def test_graph_file_gives_bowtie():
    G = io.load_input(str(INPUTS / "bowtie.graph"))
    assert io.nestables_equal(G, load_fixture("bowtie")[1])


def test_shorthands():
    assert io.nestables_equal(io.nestable_from_json({"fixture": "star"}), load_fixture("star")[1])
    G = io.nestable_from_json({"polygon": 4})
    assert io.nestables_equal(G, load_fixture("polygon-n4")[1])
    B = io.nestable_from_json({"lattice": {"boolean": ["1", "2"]}, "members": ["1", "2", "12"]})
    assert io.nestables_equal(B, load_fixture("bool2")[1])


def test_fan_round_trip():
    _, G = load_fixture("bool2")
    fan = lightcone_refinement(G, "minimal").fan
    back = io.fan_from_json(json.loads(io.dumps(io.fan_to_json(fan))))
    assert io.fans_equal(fan, back)


@given(st.sampled_from(["star", "bool2", "polygon-n3"]))
def test_expression_text_round_trip(name):
    from universefan.amplitude import amplitude
    A = amplitude(load_fixture(name)[1])
    assert io.expr_from_text(io.expr_to_text(A)) == A
    assert io.expr_from_json(io.expr_to_json(A)) == A


def test_input_errors(tmp_path):
    with pytest.raises(InputError):
        io.load_input("no-such-thing")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        io.load_input(str(bad))
    g = tmp_path / "g.txt"
    g.write_text("a 1\n")
    with pytest.raises(InputError):
        io.load_input(str(g))
    with pytest.raises(InputError):
        io.nestable_from_json({"members": ["1"]})
    with pytest.raises(UnknownFixture):
        load_fixture("pentagon")


def test_fixture_names():
    assert set(FIXTURES) == {"star", "bowtie", "bool2", "bool3-intervals", "nonbuild-nestoid"} | {
        f"polygon-n{n}" for n in range(3, 9)}
