"""Nestable sets, nested sets, causal regions and the factor sets of a region."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import InputError, NotNestable, NotStable, TooLarge
from .lattice import Lattice, is_irreducible

MAX_NESTABLE = 96  # enumeration cap on |G|; polygons up to n = 12 have 66 members


class Nestable:
    """A subset G of L minus 0̂ with a designated top (1̂ of L, or f for [0̂, f])."""

    def __init__(self, lat: Lattice, members, top=None, check=True):
        self.lat = lat
        self.top = lat.top if top is None else top
        self.members = tuple(sorted(set(members)))
        self._set = frozenset(self.members)
        if check:
            for g in self.members:
                if g == lat.bottom:
                    raise NotNestable("0̂ cannot belong to a nestable set")
                if not lat.leq(g, self.top):
                    raise InputError(f"{lat.id(g)} lies outside [0̂, {lat.id(self.top)}]")
        self._comp = None

    # containers
    def __contains__(self, x):
        return x in self._set

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return (isinstance(other, Nestable) and other.lat is self.lat
                and other._set == self._set and other.top == self.top)

    def __hash__(self):
        return hash((id(self.lat), self._set, self.top))

    @property
    def set(self):
        return self._set

    def id(self, g):
        return self.lat.id(g)

    def ids(self, elems):
        return [self.lat.id(g) for g in elems]

    def sub(self, members, top=None):
        return Nestable(self.lat, members, top=top, check=False)

    def restrict(self, f):
        """G ∩ [0̂, f] as a nestable set of the interval."""
        return Nestable(self.lat, [g for g in self.members if self.lat.leq(g, f)], top=f, check=False)

    def maximal_elements(self, elems=None):
        elems = self.members if elems is None else list(elems)
        L = self.lat
        return [g for g in elems if not any(h != g and L.leq(g, h) for h in elems)]

    def sort_key(self, g):
        """Top-down display order: larger elements first, ties by id."""
        return (-self.lat.grade(g), self.lat.id(g))

    def __repr__(self):
        return "{" + ",".join(self.ids(self.members)) + "}"


def _as_nestable(L, G):
    return G if isinstance(G, Nestable) else Nestable(L, G)


# ---------------------------------------------------------------------------
# predicates


def is_nestable(L: Lattice, G, top=None) -> bool:
    G = list(G.members if isinstance(G, Nestable) else G)
    top = L.top if top is None else top
    Gs = set(G)
    if top not in Gs or L.bottom in Gs:
        return False
    for f, g in combinations(G, 2):
        if L.comparable(f, g):
            continue
        if L.join(f, g) not in Gs and L.meet(f, g) != L.bottom:
            return False
    return True


def is_building_set(L: Lattice, G) -> bool:
    """Characterisation: contains 1̂, every irreducible, and the join/meet condition."""
    G = set(G.members if isinstance(G, Nestable) else G)
    if L.top not in G:
        return False
    for f in L.elements():
        if f != L.bottom and f not in G and is_irreducible(L, f):
            return False
    return is_nestable(L, G)


def _antichains_hit(L, Gset, start, pool, base_join=None, chosen=None):
    """Is there a nonempty antichain A ⊆ pool, all incomparable to ``start``,
    with join(A ∪ {start}) in G?  (pool must already be incomparable to start.)"""
    pool = list(pool)
    chosen = [start] if chosen is None else chosen

    def rec(i, acc, chosen):
        for k in range(i, len(pool)):
            e = pool[k]
            if any(L.comparable(e, c) for c in chosen):
                continue
            j = L.join(acc, e)
            if j in Gset:
                return True
            if rec(k + 1, j, chosen + [e]):
                return True
        return False

    return rec(0, start if base_join is None else base_join, chosen)


def is_nested(G: Nestable, N) -> bool:
    """Every antichain of size ≥ 2 in N has its join outside G."""
    L, Gs = G.lat, G.set
    N = sorted(set(N))
    for g in N:
        if g not in Gs:
            return False
    # each antichain is visited from its smallest-index member
    for i, g in enumerate(N):
        pool = [h for h in N[i + 1:] if not L.comparable(g, h)]
        if pool and _antichains_hit(L, Gs, g, pool):
            return False
    return True


def can_extend(G: Nestable, N, g) -> bool:
    """Is N ∪ {g} nested, given that N is?"""
    if g in N:
        return True
    L = G.lat
    pool = [h for h in N if not L.comparable(g, h)]
    return not pool or not _antichains_hit(L, G.set, g, pool)


def _pair_extends(G: Nestable, R, v, u) -> bool:
    """Given that R ∪ {v} and R ∪ {u} are nested, is R ∪ {u, v}?

    Only antichains holding both u and v are left to test.
    """
    L = G.lat
    if u == v or L.comparable(u, v):
        return True
    j = L.join(u, v)
    if j in G.set:
        return False
    pool = [h for h in R if not L.comparable(h, u) and not L.comparable(h, v)]
    return not pool or not _antichains_hit(L, G.set, u, pool, base_join=j, chosen=[u, v])


def enumerate_nested_sets(G: Nestable, only_maximal: bool = False, include_empty=False):
    """All nested sets (or the inclusion-maximal ones), as sorted index tuples.

    Output order is lexicographic in element index.  Maximal sets come from a
    Bron–Kerbosch style search over the nested set complex, which never
    revisits a face and rejects a branch as soon as an excluded element is
    found to be addable at a leaf.
    """
    if len(G) > MAX_NESTABLE:
        raise TooLarge(f"|G| = {len(G)} exceeds the enumeration cap {MAX_NESTABLE}")
    members = list(G.members)
    out = []
    if only_maximal:
        def bk(R, P, X):
            if not P and not X:
                out.append(tuple(sorted(R)))
                return
            P = list(P)
            while P:
                v = P.pop(0)
                R2 = R + [v]
                P2 = [u for u in P if _pair_extends(G, R, v, u)]
                X2 = [u for u in X if _pair_extends(G, R, v, u)]
                bk(R2, P2, X2)
                X = X + [v]

        bk([], [g for g in members if can_extend(G, [], g)], [])
    else:
        def rec(R, start, cand):
            # cand: members after ``start`` that extend R
            if R or include_empty:
                out.append(tuple(R))
            for k in range(start, len(members)):
                g = members[k]
                if g in cand:
                    rec(R + [g], k + 1, {h for h in cand if h != g and _pair_extends(G, R, g, h)})

        rec([], 0, {g for g in members if can_extend(G, [], g)})
    out.sort()
    return out


def is_maximal_nested(G: Nestable, N) -> bool:
    N = list(N)
    return is_nested(G, N) and not any(g not in N and can_extend(G, N, g) for g in G.members)


def is_nestoid(L: Lattice, G) -> bool:
    G = _as_nestable(L, G)
    if not is_nestable(L, G.members, G.top):
        return False
    for f in G.members:
        sizes = {len(N) for N in enumerate_nested_sets(G.restrict(f), only_maximal=True)}
        if len(sizes) > 1:
            return False
    return True


def is_stable(L: Lattice, G) -> bool:
    """f ∨ g_i ∉ G for all i forces f ∨ g_1 ∨ … ∨ g_k ∉ G.

    By the lower-set lemma it is enough to combine the maximal g's.
    """
    G = _as_nestable(L, G)
    Gs = G.set
    for f in G.members:
        cand = [g for g in G.members if L.join(f, g) not in Gs]
        tops = G.maximal_elements(cand)
        for k in range(2, len(tops) + 1):
            for combo in combinations(tops, k):
                if L.join_all((f,) + combo) in Gs:
                    return False
    return True


def stability_witness(L, G):
    G = _as_nestable(L, G)
    Gs = G.set
    for f in G.members:
        cand = [g for g in G.members if L.join(f, g) not in Gs]
        tops = G.maximal_elements(cand)
        for k in range(2, len(tops) + 1):
            for combo in combinations(tops, k):
                if L.join_all((f,) + combo) in Gs:
                    return (f,) + combo
    return None


def diagnose(L: Lattice, G):
    """Rows (property, holds, witness text) for nestable/building/nestoid/stable."""
    G = _as_nestable(L, G)
    Gs = G.set
    rows = []

    def nestable_witness():
        if G.top not in Gs:
            return f"top {L.id(G.top)} missing"
        for f, g in combinations(G.members, 2):
            if not L.comparable(f, g) and L.join(f, g) not in Gs and L.meet(f, g) != L.bottom:
                return f"{L.id(f)}, {L.id(g)}: meet {L.id(L.meet(f, g))} > 0̂, join {L.id(L.join(f, g))} not in G"
        return None

    w = nestable_witness()
    rows.append(("nestable", w is None, w))
    wb = None
    if L.top not in Gs:
        wb = f"1̂ = {L.id(L.top)} missing"
    else:
        for f in L.elements():
            if f != L.bottom and f not in Gs and is_irreducible(L, f):
                wb = f"irreducible {L.id(f)} missing"
                break
        wb = wb or w
    rows.append(("building", wb is None, wb))
    wn = w
    if wn is None:
        for f in G.members:
            sizes = sorted({len(N) for N in enumerate_nested_sets(G.restrict(f), only_maximal=True)})
            if len(sizes) > 1:
                wn = f"[0̂, {L.id(f)}] has maximal nested sets of sizes {sizes}"
                break
    rows.append(("nestoid", wn is None, wn))
    ws = stability_witness(L, G)
    rows.append(("stable", ws is None,
                 None if ws is None else "join of " + ", ".join(L.id(x) for x in ws) + " lies in G"))
    return rows


# ---------------------------------------------------------------------------
# factor sets


def down_up_sets(G: Nestable, f):
    """(G below f, G pointing away from f): {g ≤ f} and {g > f or g ∨ f ∉ G}."""
    L, Gs = G.lat, G.set
    if f not in Gs:
        raise InputError(f"{L.id(f)} is not in G")
    down = frozenset(g for g in G.members if L.leq(g, f))
    up = frozenset(g for g in G.members
                   if (L.lt(f, g)) or L.join(g, f) not in Gs)
    return down, up


@dataclass(frozen=True, order=True)
class CausalRegion:
    """A nested set with a single maximal element ``star`` and pairwise incomparable ``feet``."""

    star: int
    feet: tuple = ()

    @property
    def members(self):
        return (self.star,) + tuple(self.feet)

    def label(self, lat):
        s = lat.id(self.star)
        return s + (";" + ",".join(lat.id(g) for g in self.feet) if self.feet else "")


def parse_region(G: Nestable, text: str) -> CausalRegion:
    """'r*;f1,f2' (or 'r*' alone) into a validated CausalRegion."""
    L = G.lat
    star, _, rest = text.partition(";")
    feet = [s.strip() for s in rest.split(",") if s.strip()]
    r = CausalRegion(L.index(star.strip()), tuple(sorted(L.index(x) for x in feet)))
    if not is_causal_region(G, r):
        raise InputError(f"{text!r} is not a causal region")
    return r


def is_causal_region(G: Nestable, R: CausalRegion) -> bool:
    L = G.lat
    if any(g not in G for g in R.members):
        return False
    if any(not L.lt(g, R.star) for g in R.feet):
        return False
    if any(L.comparable(a, b) for a, b in combinations(R.feet, 2)):
        return False
    return is_nested(G, R.members)


def enumerate_causal_regions(G: Nestable, within=None):
    L, Gs = G.lat, G.set
    pool = sorted(set(within)) if within is not None else list(G.members)
    check_nested = within is None
    out = []
    for star in pool:
        below = [g for g in pool if L.lt(g, star)]

        def rec(i, feet):
            out.append(CausalRegion(star, tuple(feet)))
            for k in range(i, len(below)):
                e = below[k]
                if any(L.comparable(e, c) for c in feet):
                    continue
                if check_nested and feet and _antichains_hit(L, Gs, e, feet):
                    continue
                rec(k + 1, feet + [e])

        rec(0, [])
    return sorted(out)


def region_split(G: Nestable, R: CausalRegion, check=True):
    """(G_down_R, G_up_R, H) with H = G_up_R ∪ {r*}."""
    L = G.lat
    if check and not is_stable(L, G):
        raise NotStable("region factorisation needs a stable nestoid")
    d, u = down_up_sets(G, R.star)
    down = set(d)
    up = set(u)
    for g in R.feet:
        dg, ug = down_up_sets(G, g)
        down &= ug
        up |= dg
    H = set(up) | {R.star}
    return frozenset(down), frozenset(up), frozenset(H)


@dataclass(frozen=True, order=True)
class LightconeRegion:
    plus: tuple = ()
    minus: tuple = ()

    def contains(self, lat, f):
        return (all(lat.lt(f, a) for a in self.plus)
                and all(not lat.leq(f, b) for b in self.minus))


def enumerate_lightcone_regions(G: Nestable, within, realizable=False):
    """Pairs (R+, R-) inside ``within`` per the definition.

    With ``realizable`` the minus part is also required to lie below the plus
    element; exactly those pairs are the entering/leaving cuts of a connected
    subgraph of the rooted tree.
    """
    L = G.lat
    N = sorted(set(within))
    out = []
    antichains = []

    def rec(i, cur):
        if cur:
            antichains.append(tuple(cur))
        for k in range(i, len(N)):
            if all(not L.comparable(N[k], c) for c in cur):
                rec(k + 1, cur + [N[k]])

    rec(0, [])
    for A in antichains:
        out.append(LightconeRegion((), A))
    for a in N:
        out.append(LightconeRegion((a,), ()))
        for A in antichains:
            if a in A:
                continue
            R = list(A) + [a]
            mx = [x for x in R if not any(x != y and L.leq(x, y) for y in R)]
            mn = [x for x in R if not any(x != y and L.leq(y, x) for y in R)]
            if a not in mx or any(b not in mn for b in A):
                continue
            if realizable and not all(L.lt(b, a) for b in A):
                continue
            out.append(LightconeRegion((a,), A))
    return sorted(out)
