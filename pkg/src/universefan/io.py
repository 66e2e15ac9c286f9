"""Reading and writing lattices, nestable sets, fans and rational expressions.

Lattice JSON is ``{"elems": [ids], "covers": [[lo, hi], ...]}``.  For input we
also accept a few shorthands that avoid spelling out large cover relations:
``{"graph": [[label, u, v], ...]}`` (lattice of flats), ``{"boolean": [labels]}``,
``{"polygon": n}`` and ``{"fixture": name}``.  A graph file has one edge
``label u v`` per line; ``#`` starts a comment.
"""
from __future__ import annotations

import json
import os

from .errors import InputError, UnknownFixture
from .fixtures import graphical_members, load_fixture
from .lattice import Lattice, boolean_lattice, build_lattice_from_covers, flats_lattice_of_graph
from .nestoid import Nestable
from .ratexpr import from_json as ratexpr_from_json
from .ratexpr import parse_canonical, to_canonical
from .ratexpr import to_json as ratexpr_to_json


def dumps(obj) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# lattices


def lattice_to_json(L: Lattice) -> dict:
    ids = [L.id(i) for i in L.elements()]
    covers = sorted((L.id(a), L.id(b)) for a, b in L.covers())
    return {"elems": ids, "covers": [list(c) for c in covers]}


def parse_graph_text(text: str):
    edges = []
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"graph line {k}: expected 'label u v', got {line!r}")
        edges.append(tuple(parts))
    if not edges:
        raise InputError("graph file has no edges")
    return edges


def lattice_from_json(d) -> Lattice:
    if isinstance(d, str):
        d = json.loads(d)
    if not isinstance(d, dict):
        raise InputError("lattice JSON must be an object")
    if "elems" in d:
        return build_lattice_from_covers([str(e) for e in d["elems"]],
                                         [(str(a), str(b)) for a, b in d.get("covers", [])])
    if "graph" in d:
        return flats_lattice_of_graph([tuple(map(str, e)) for e in d["graph"]])
    if "boolean" in d:
        labels = [str(x) for x in d["boolean"]]
        return boolean_lattice(len(labels), labels)
    if "polygon" in d:
        from .physics import build_polygon
        return build_polygon(int(d["polygon"])).lattice
    if "fixture" in d:
        return load_fixture(d["fixture"])[0]
    raise InputError("lattice JSON needs 'elems'/'covers' (or graph, boolean, polygon, fixture)")


def lattices_equal(A: Lattice, B: Lattice) -> bool:
    """Same element ids and the same order relation."""
    ia, ib = [A.id(i) for i in A.elements()], [B.id(i) for i in B.elements()]
    if sorted(ia) != sorted(ib):
        return False
    pb = {B.id(i): i for i in B.elements()}
    for a in A.elements():
        for b in A.elements():
            if A.leq(a, b) != B.leq(pb[A.id(a)], pb[A.id(b)]):
                return False
    return True


# ---------------------------------------------------------------------------
# nestable sets


def nestable_to_json(G: Nestable) -> dict:
    L = G.lat
    out = {"lattice": lattice_to_json(L), "members": [L.id(g) for g in G.members]}
    if G.top != L.top:
        out["top"] = L.id(G.top)
    return out


def nestable_from_json(d, base_dir=".") -> Nestable:
    if isinstance(d, str):
        d = json.loads(d)
    if not isinstance(d, dict):
        raise InputError("nestable JSON must be an object")
    if "fixture" in d and "members" not in d:
        return load_fixture(d["fixture"])[1]
    if "polygon" in d and "members" not in d:
        from .physics import build_polygon
        return build_polygon(int(d["polygon"])).nestable
    lat = d.get("lattice")
    if lat is None:
        raise InputError("nestable JSON needs a 'lattice'")
    if isinstance(lat, str):
        L = read_lattice_file(os.path.join(base_dir, lat))
    else:
        L = lattice_from_json(lat)
    members = d.get("members")
    if members is None:
        if getattr(L, "graph_edges", None) is not None:
            members = [L.id(g) for g in graphical_members(L)]
        else:
            raise InputError("nestable JSON needs 'members'")
    top = L.index(str(d["top"])) if "top" in d else None
    return Nestable(L, [L.index(str(m)) for m in members], top=top)


def nestables_equal(A: Nestable, B: Nestable) -> bool:
    return (lattices_equal(A.lat, B.lat)
            and sorted(A.lat.id(g) for g in A.members) == sorted(B.lat.id(g) for g in B.members)
            and A.lat.id(A.top) == B.lat.id(B.top))


def read_lattice_file(path) -> Lattice:
    text = _read(path)
    if path.endswith(".json"):
        return lattice_from_json(_loads(text, path))
    return flats_lattice_of_graph(parse_graph_text(text))


def load_input(spec) -> Nestable:
    """A nestable set from a JSON file, a graph file, or a fixture name.

    Graph files give the graphical building set (connected flats).
    """
    if spec.startswith("fixture:"):
        return load_fixture(spec[len("fixture:"):])[1]
    if os.path.exists(spec):
        text = _read(spec)
        if spec.endswith(".json"):
            return nestable_from_json(_loads(text, spec), os.path.dirname(spec) or ".")
        L = flats_lattice_of_graph(parse_graph_text(text))
        return Nestable(L, graphical_members(L))
    try:
        return load_fixture(spec)[1]
    except UnknownFixture:
        raise InputError(f"{spec!r} is neither a readable file nor a fixture name") from None


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _loads(text, path):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None


# ---------------------------------------------------------------------------
# fans and expressions


def fan_to_json(fan) -> dict:
    return fan.to_json()


def fan_from_json(d):
    from .refine import Fan
    if isinstance(d, str):
        d = json.loads(d)
    rays = [tuple(int(x) for x in r) for r in d["rays"]]
    dim = len(rays[0]) if rays else 0
    return Fan(dim, rays, [tuple(c) for c in d["cones"]], list(d.get("labels", [None] * len(d["cones"]))))


def fans_equal(a, b) -> bool:
    return a.to_json() == b.to_json()


def expr_to_text(e) -> str:
    return to_canonical(e)


def expr_from_text(text):
    return parse_canonical(text)


def expr_to_json(e) -> dict:
    return ratexpr_to_json(e)


def expr_from_json(d):
    return ratexpr_from_json(d)
