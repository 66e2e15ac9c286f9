"""Exact nested set complexes, nestoid amplitudes, universe fans and cosmological wavefunctions.

Everything is computed over the rationals; no floating point enters a verdict.
"""
from .errors import InputError, UniverseFanError
from .fixtures import load_fixture
from .lattice import Lattice, boolean_lattice, build_lattice_from_covers, flats_lattice_of_graph
from .nestoid import (Nestable, enumerate_causal_regions, enumerate_nested_sets, is_building_set,
                      is_nestable, is_nestoid, is_stable)
from .ratexpr import LinForm, RatExpr, equal, parse_canonical, to_canonical

__version__ = "0.1.0"

__all__ = [
    "InputError", "UniverseFanError", "load_fixture", "Lattice", "boolean_lattice",
    "build_lattice_from_covers", "flats_lattice_of_graph", "Nestable", "enumerate_causal_regions",
    "enumerate_nested_sets", "is_building_set", "is_nestable", "is_nestoid", "is_stable",
    "LinForm", "RatExpr", "equal", "parse_canonical", "to_canonical", "__version__",
]
