"""Definition-level brute force, kept apart from the fast code paths.

Joins and meets here are recomputed from the order relation alone, so an
error in a lattice's own join table cannot leak into both sides of a check.
"""
from __future__ import annotations

from itertools import combinations

from .errors import TooLarge
from .lattice import is_product_iso
from .nestoid import Nestable

ORACLE_CAP = 14


class OrderOnly:
    """A lattice seen only through ``leq``: joins and meets by exhaustive search."""

    def __init__(self, L):
        self.L = L
        self.els = list(L.elements())
        self.bottom = L.bottom
        self.top = L.top
        self._j, self._m = {}, {}

    def elements(self):
        return iter(self.els)

    def leq(self, a, b):
        return self.L.leq(a, b)

    def lt(self, a, b):
        return a != b and self.L.leq(a, b)

    def comparable(self, a, b):
        return self.leq(a, b) or self.leq(b, a)

    def below(self, f):
        return [x for x in self.els if self.leq(x, f)]

    def join(self, a, b):
        key = (a, b) if a <= b else (b, a)
        if key not in self._j:
            ub = [x for x in self.els if self.leq(a, x) and self.leq(b, x)]
            least = [x for x in ub if all(self.leq(x, y) for y in ub)]
            self._j[key] = least[0]
        return self._j[key]

    def meet(self, a, b):
        key = (a, b) if a <= b else (b, a)
        if key not in self._m:
            lb = [x for x in self.els if self.leq(x, a) and self.leq(x, b)]
            great = [x for x in lb if all(self.leq(y, x) for y in lb)]
            self._m[key] = great[0]
        return self._m[key]

    def join_all(self, xs):
        acc = self.bottom
        for x in xs:
            acc = self.join(acc, x)
        return acc


def _members(G):
    return list(G.members if isinstance(G, Nestable) else G)


def nestable_oracle(L, G, top=None) -> bool:
    O = OrderOnly(L)
    G = _members(G)
    top = O.top if top is None else top
    if top not in G or O.bottom in G:
        return False
    for f, g in combinations(G, 2):
        if not O.comparable(f, g) and O.join(f, g) not in G and O.meet(f, g) != O.bottom:
            return False
    return True


def building_oracle(L, G) -> bool:
    """1̂ ∈ G, and [0̂, f] is the product of the [0̂, g_i] for every f ∉ G."""
    O = OrderOnly(L)
    G = set(_members(G))
    if O.top not in G or O.bottom in G:
        return False
    for f in O.els:
        if f == O.bottom or f in G:
            continue
        below = [g for g in G if O.leq(g, f)]
        tops = [g for g in below if not any(h != g and O.leq(g, h) for h in below)]
        if not is_product_iso(O, f, tops):
            return False
    return True


def nested_oracle(L, G, N) -> bool:
    """No antichain of two or more members has its join in G."""
    O = OrderOnly(L)
    G = set(_members(G))
    N = list(N)
    if not set(N) <= G:
        return False
    for k in range(2, len(N) + 1):
        for A in combinations(N, k):
            if all(not O.comparable(a, b) for a, b in combinations(A, 2)) and O.join_all(A) in G:
                return False
    return True


def maximal_nested_oracle(L, G, within=None):
    """All inclusion-maximal nested subsets of ``within`` (default G), by subset enumeration."""
    pool = sorted(within if within is not None else _members(G))
    if len(pool) > ORACLE_CAP:
        raise TooLarge(f"brute-force nested sets are capped at {ORACLE_CAP} members")
    nested = []
    for k in range(1, len(pool) + 1):
        for S in combinations(pool, k):
            if nested_oracle(L, G, S):
                nested.append(frozenset(S))
    return sorted(tuple(sorted(S)) for S in nested if not any(S < T for T in nested))


def nestoid_oracle(L, G) -> bool:
    """Nestable, and the nested set complex of every [0̂, f], f ∈ G, is pure."""
    if not nestable_oracle(L, G):
        return False
    Gm = _members(G)
    for f in Gm:
        inside = [g for g in Gm if L.leq(g, f)]
        sizes = {len(S) for S in maximal_nested_oracle(L, inside, inside)}
        if len(sizes) > 1:
            return False
    return True


def upstream_lower_set_holds(L, G) -> tuple:
    """x ∨ y ∉ G with y ∈ G forces x ∨ z ∉ G for every 0̂ < z ≤ y.

    Returns (True, None) or (False, (x, y, z)).  z = 0̂ is left out: there
    x ∨ z = x, which may well lie in G.
    """
    O = OrderOnly(L)
    Gs = set(_members(G))
    for x in O.els:
        for y in Gs:
            if O.join(x, y) in Gs:
                continue
            for z in O.below(y):
                if z != O.bottom and O.join(x, z) in Gs:
                    return False, (x, y, z)
    return True, None
