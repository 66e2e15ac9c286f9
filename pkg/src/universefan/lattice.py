"""Finite lattices.

Two backends share one interface.  ``TableLattice`` is built from a cover
relation and keeps explicit up-sets; ``SetLattice`` stores every element as a
bitmask of atoms and computes joins through a closure operator, which is what
Boolean lattices and lattices of flats want (a Boolean lattice on 24 atoms has
16 million elements, so nothing quadratic can be stored for it).

Elements are always plain integer indices; ids are opaque strings kept in a
side table.
"""
from __future__ import annotations

from itertools import combinations

from .errors import InputError, NoBottom, NoTop, NotALattice, NotAtomic, TooLarge

MAX_ELEMENTS = 100_000
MAX_ATOMS = 24
_TABLE_LIMIT = 2048  # below this many elements join/meet tables are precomputed


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Lattice:
    """Common interface.  Subclasses fill in the order and operations."""

    size: int
    bottom: int
    top: int

    # -- ids -------------------------------------------------------------
    def id(self, i: int) -> str:
        raise NotImplementedError

    def index(self, name: str) -> int:
        raise NotImplementedError

    @property
    def ids(self) -> list[str]:
        return [self.id(i) for i in range(self.size)]

    def elements(self):
        return range(self.size)

    # -- order -----------------------------------------------------------
    def leq(self, a: int, b: int) -> bool:
        raise NotImplementedError

    def lt(self, a, b):
        return a != b and self.leq(a, b)

    def comparable(self, a, b):
        return self.leq(a, b) or self.leq(b, a)

    def join(self, a: int, b: int) -> int:
        raise NotImplementedError

    def meet(self, a: int, b: int) -> int:
        raise NotImplementedError

    def join_all(self, elems) -> int:
        out = self.bottom
        for e in elems:
            out = self.join(out, e)
        return out

    def below(self, f: int) -> list[int]:
        """The members of [0̂, f] in index order."""
        return [x for x in self.elements() if self.leq(x, f)]

    def interval(self, lo: int, hi: int) -> "Interval":
        return Interval(self, lo, hi)

    # -- atoms -----------------------------------------------------------
    @property
    def atoms(self) -> list[int]:
        raise NotImplementedError

    @property
    def is_atomic(self) -> bool:
        raise NotImplementedError

    def atom_bits(self, i: int) -> int:
        """Bitmask (over positions in ``atoms``) of the atoms below ``i``."""
        raise NotImplementedError

    def atom_set(self, i: int) -> list[int]:
        """Atom element indices below ``i``."""
        at = self.atoms
        return [at[k] for k in _bits(self.atom_bits(i))]

    def grade(self, i: int) -> int:
        """A deterministic height: atom count for atomic lattices, else chain length."""
        if self.is_atomic:
            return bin(self.atom_bits(i)).count("1")
        return self._chain_height(i)

    def _chain_height(self, i):
        cache = self.__dict__.setdefault("_heights", {})
        if i in cache:
            return cache[i]
        lower = self.lower_covers(i)
        h = 0 if not lower else 1 + max(self._chain_height(x) for x in lower)
        cache[i] = h
        return h

    def lower_covers(self, y: int) -> list[int]:
        strictly = [x for x in self.elements() if x != y and self.leq(x, y)]
        return [x for x in strictly
                if not any(z != x and self.leq(x, z) for z in strictly)]

    def covers(self) -> list[tuple[int, int]]:
        if self.size > 5000:
            raise TooLarge(f"refusing to list covers of a lattice with {self.size} elements")
        return [(x, y) for y in self.elements() for x in self.lower_covers(y)]

    def __repr__(self):
        return f"<{type(self).__name__} |L|={self.size}>"


class Interval:
    """[lo, hi] inside a parent lattice; joins and meets are the parent's."""

    def __init__(self, parent: Lattice, lo: int, hi: int):
        if not parent.leq(lo, hi):
            raise InputError(f"empty interval [{parent.id(lo)}, {parent.id(hi)}]")
        self.parent, self.lo, self.hi = parent, lo, hi
        self.members = [x for x in parent.elements()
                        if parent.leq(lo, x) and parent.leq(x, hi)]

    def __contains__(self, x):
        return self.parent.leq(self.lo, x) and self.parent.leq(x, self.hi)

    def __len__(self):
        return len(self.members)


class TableLattice(Lattice):
    """Lattice given by explicit up-sets (bitmasks over element indices)."""

    def __init__(self, ids, up):
        self._ids = list(ids)
        self._pos = {name: i for i, name in enumerate(self._ids)}
        self.size = len(self._ids)
        self._up = list(up)
        self._down = [0] * self.size
        for i, u in enumerate(self._up):
            for j in _bits(u):
                self._down[j] |= 1 << i
        self._by_up = {u: i for i, u in enumerate(self._up)}
        self._by_down = {d: i for i, d in enumerate(self._down)}
        full = (1 << self.size) - 1
        bots = [i for i in range(self.size) if self._up[i] == full]
        tops = [i for i in range(self.size) if self._down[i] == full]
        if not bots:
            raise NoBottom("no element lies below every other")
        if not tops:
            raise NoTop("no element lies above every other")
        self.bottom, self.top = bots[0], tops[0]
        self._join = self._meet = None
        if self.size <= _TABLE_LIMIT:
            self._join = [[self._compute_join(a, b) for b in range(self.size)]
                          for a in range(self.size)]
            self._meet = [[self._compute_meet(a, b) for b in range(self.size)]
                          for a in range(self.size)]
        self._atoms = sorted((i for i in range(self.size)
                              if i != self.bottom and self._down[i] == (1 << i) | (1 << self.bottom)),
                             key=lambda i: self._ids[i])
        self._abits = []
        apos = {a: k for k, a in enumerate(self._atoms)}
        for i in range(self.size):
            m = 0
            for a in self._atoms:
                if self._up[a] >> i & 1:
                    m |= 1 << apos[a]
            self._abits.append(m)
        # atomic iff the atom sets separate elements
        self._atomic = len(set(self._abits)) == self.size

    def _compute_join(self, a, b):
        j = self._by_up.get(self._up[a] & self._up[b])
        if j is None:
            raise NotALattice(self._ids[a], self._ids[b], "join")
        return j

    def _compute_meet(self, a, b):
        m = self._by_down.get(self._down[a] & self._down[b])
        if m is None:
            raise NotALattice(self._ids[a], self._ids[b], "meet")
        return m

    def id(self, i):
        return self._ids[i]

    def index(self, name):
        try:
            return self._pos[name]
        except KeyError:
            raise InputError(f"unknown element id {name!r}") from None

    @property
    def ids(self):
        return list(self._ids)

    def leq(self, a, b):
        return bool(self._up[a] >> b & 1)

    def join(self, a, b):
        if self._join is not None:
            return self._join[a][b]
        return self._compute_join(a, b)

    def meet(self, a, b):
        if self._meet is not None:
            return self._meet[a][b]
        return self._compute_meet(a, b)

    def below(self, f):
        return list(_bits(self._down[f]))

    def lower_covers(self, y):
        strictly = self._down[y] & ~(1 << y)
        out = []
        for x in _bits(strictly):
            if (self._up[x] & strictly) == (1 << x):
                out.append(x)
        return out

    @property
    def atoms(self):
        return list(self._atoms)

    @property
    def is_atomic(self):
        return self._atomic

    def atom_bits(self, i):
        if not self._atomic:
            raise NotAtomic("lattice is not atomic")
        return self._abits[i]


def _identity(m):
    return m


class SetLattice(Lattice):
    """Elements are atom bitmasks; join is closure of the union, meet is intersection.

    ``closure`` must be a closure operator whose closed sets are exactly
    ``masks`` (or every mask when ``masks`` is None, the Boolean case).
    """

    def __init__(self, atom_labels, masks=None, closure=None, namer=None, bottom_id="0"):
        self.atom_labels = list(atom_labels)
        n = len(self.atom_labels)
        if n > MAX_ATOMS:
            raise TooLarge(f"{n} atoms exceeds the cap of {MAX_ATOMS}")
        self._n = n
        self._closure = closure or _identity
        self._bottom_id = bottom_id
        if namer is None:
            sep = "" if all(len(a) == 1 for a in self.atom_labels) else "."
            namer = lambda m: sep.join(self.atom_labels[k] for k in _bits(m))
        self._namer = namer
        if masks is None:
            self._masks = None
            self.size = 1 << n
        else:
            self._masks = sorted(masks, key=lambda m: (bin(m).count("1"), m))
            self._pos = {m: i for i, m in enumerate(self._masks)}
            self.size = len(self._masks)
        if self.size > MAX_ELEMENTS:
            raise TooLarge(f"{self.size} elements exceeds the cap of {MAX_ELEMENTS}")
        self.bottom = self.index_of_mask(0)
        self.top = self.index_of_mask((1 << n) - 1)
        self._names = None
        self._id_cache = {}

    # element <-> mask
    def mask(self, i):
        return i if self._masks is None else self._masks[i]

    def index_of_mask(self, m):
        if self._masks is None:
            return m
        try:
            return self._pos[m]
        except KeyError:
            raise InputError(f"atom set {m:b} is not closed") from None

    def closure(self, m):
        return self._closure(m)

    def id(self, i):
        try:
            return self._id_cache[i]
        except KeyError:
            m = self.mask(i)
            out = self._id_cache[i] = self._bottom_id if m == 0 else self._namer(m)
            return out

    def index(self, name):
        if self._names is None:
            if self.size > 1 << 16:
                # avoid building a 16M-entry table; parse atom labels instead
                return self._index_by_parsing(name)
            self._names = {self.id(i): i for i in range(self.size)}
        try:
            return self._names[name]
        except KeyError:
            raise InputError(f"unknown element id {name!r}") from None

    def _index_by_parsing(self, name):
        if name == self._bottom_id:
            return self.bottom
        lab = {a: k for k, a in enumerate(self.atom_labels)}
        parts = name.split(".") if "." in name else list(name)
        try:
            m = sum(1 << lab[p] for p in parts)
        except KeyError:
            raise InputError(f"unknown element id {name!r}") from None
        return self.index_of_mask(m)

    def leq(self, a, b):
        if self._masks is None:
            return a & ~b == 0
        return self._masks[a] & ~self._masks[b] == 0

    def comparable(self, a, b):
        if self._masks is not None:
            a, b = self._masks[a], self._masks[b]
        u = a | b
        return u == a or u == b

    def join(self, a, b):
        if self._masks is None and self._n and self._closure is _identity:
            return a | b
        return self.index_of_mask(self._closure(self.mask(a) | self.mask(b)))

    def meet(self, a, b):
        return self.index_of_mask(self.mask(a) & self.mask(b))

    def join_all(self, elems):
        m = 0
        for e in elems:
            m |= self.mask(e)
        return self.index_of_mask(self._closure(m))

    def below(self, f):
        mf = self.mask(f)
        if self._masks is None:
            # enumerate submasks directly
            out, sub = [], mf
            while True:
                out.append(sub)
                if sub == 0:
                    break
                sub = (sub - 1) & mf
            return sorted(out)
        return [i for i, m in enumerate(self._masks) if m & ~mf == 0]

    @property
    def atoms(self):
        return [self.index_of_mask(1 << k) for k in range(self._n)]

    @property
    def is_atomic(self):
        return True

    def atom_bits(self, i):
        return self.mask(i)


# ---------------------------------------------------------------------------
# constructors


def build_lattice_from_covers(elems, covers) -> TableLattice:
    """Lattice from a cover relation given as (lower, upper) id pairs."""
    elems = list(elems)
    if len(elems) > MAX_ELEMENTS:
        raise TooLarge(f"{len(elems)} elements")
    pos = {e: i for i, e in enumerate(elems)}
    if len(pos) != len(elems):
        raise InputError("duplicate element ids")
    succ = [[] for _ in elems]
    indeg = [0] * len(elems)
    for lo, hi in covers:
        if lo not in pos or hi not in pos:
            raise InputError(f"cover ({lo}, {hi}) mentions an unknown element")
        succ[pos[lo]].append(pos[hi])
        indeg[pos[hi]] += 1
    # topological order, then up-sets in reverse
    order, stack = [], [i for i, d in enumerate(indeg) if d == 0]
    indeg = indeg[:]
    while stack:
        i = stack.pop()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                stack.append(j)
    if len(order) != len(elems):
        raise InputError("cover relation has a cycle")
    up = [0] * len(elems)
    for i in reversed(order):
        m = 1 << i
        for j in succ[i]:
            m |= up[j]
        up[i] = m
    return TableLattice(elems, up)


def chain_lattice(n: int) -> TableLattice:
    """The chain 0 < 1 < ... < n-1 (ids are decimal strings)."""
    ids = [str(i) for i in range(n)]
    return build_lattice_from_covers(ids, list(zip(ids, ids[1:])))


def boolean_lattice(n: int, labels=None) -> SetLattice:
    """All subsets of an n-element ground set; atoms are labelled 1..n by default."""
    if n < 1:
        raise InputError("need at least one atom")
    if n > MAX_ATOMS:
        raise TooLarge(f"{n} atoms exceeds the cap of {MAX_ATOMS}")
    labels = list(labels) if labels is not None else [str(k + 1) for k in range(n)]
    return SetLattice(labels)


def _graph_closure(edge_ends, vertex_index):
    nv = len(vertex_index)

    def closure(mask):
        parent = list(range(nv))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for k in _bits(mask):
            u, v = edge_ends[k]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        out = mask
        for k, (u, v) in enumerate(edge_ends):
            if not mask >> k & 1 and find(u) == find(v):
                out |= 1 << k
        return out

    return closure


def flats_lattice_of_graph(edges, cap: int = MAX_ELEMENTS) -> SetLattice:
    """Lattice of flats of the graphic matroid.

    ``edges`` is a list of (label, u, v).  A flat is an edge set containing
    every edge whose endpoints are joined by a path inside it; equivalently
    each component is an induced subgraph on its own vertex set.
    """
    edges = sorted(edges, key=lambda e: str(e[0]))
    labels = [str(e[0]) for e in edges]
    if len(set(labels)) != len(labels):
        raise InputError("edge labels must be distinct")
    if len(labels) > MAX_ATOMS:
        raise TooLarge(f"{len(labels)} edges exceeds the cap of {MAX_ATOMS}")
    verts = {}
    ends = []
    for lab, u, v in edges:
        if u == v:
            raise InputError(f"loop at edge {lab}")
        ends.append((verts.setdefault(u, len(verts)), verts.setdefault(v, len(verts))))
    pairs = [frozenset(e) for e in ends]
    if len(set(pairs)) != len(pairs):
        raise InputError("parallel edges are not allowed")
    closure = _graph_closure(ends, verts)
    seen = {closure(0)}
    frontier = list(seen)
    full = (1 << len(labels)) - 1
    while frontier:
        nxt = []
        for f in frontier:
            for k in range(len(labels)):
                if not f >> k & 1:
                    g = closure(f | 1 << k)
                    if g not in seen:
                        seen.add(g)
                        nxt.append(g)
                        if len(seen) > cap:
                            raise TooLarge(f"more than {cap} flats")
        frontier = nxt
    assert full in seen
    lat = SetLattice(labels, masks=seen, closure=closure)
    lat.graph_edges = [(lab, u, v) for lab, u, v in edges]
    return lat


# ---------------------------------------------------------------------------
# products and irreducibility


def is_product_iso(L: Lattice, f: int, factors) -> bool:
    """Does the join map  Π [0̂, g_i] → [0̂, f]  give a poset isomorphism?

    Checked as: sizes match, the map is injective, and z ↦ (z ∧ g_i)_i inverts
    it.  An inverse built from meets is monotone, so that settles the order.
    """
    factors = list(factors)
    target = L.below(f)
    if not factors:
        return len(target) == 1
    pieces = [L.below(g) for g in factors]
    total = 1
    for p in pieces:
        total *= len(p)
    if total != len(target):
        return False
    seen = set()

    def rec(i, acc, chosen):
        if i == len(pieces):
            if acc in seen or not L.leq(acc, f):
                return False
            seen.add(acc)
            return all(L.meet(acc, g) == x for g, x in zip(factors, chosen))
        for x in pieces[i]:
            if not rec(i + 1, L.join(acc, x), chosen + (x,)):
                return False
        return True

    return rec(0, L.bottom, ()) and len(seen) == len(target)


def product_decomposition(L: Lattice, f: int):
    """A complement pair (a, b) with [0̂,f] ≅ [0̂,a] × [0̂,b], or None."""
    if f == L.bottom:
        return None
    inner = [x for x in L.below(f) if x not in (L.bottom, f)]
    for a, b in combinations(inner, 2):
        if L.meet(a, b) != L.bottom or L.join(a, b) != f:
            continue
        if is_product_iso(L, f, [a, b]):
            return (a, b)
    return None


def is_irreducible(L: Lattice, f: int) -> bool:
    if f == L.bottom:
        raise InputError("irreducibility is only asked of elements above 0̂")
    return product_decomposition(L, f) is None


def minimal_building_set(L: Lattice) -> frozenset:
    out = {f for f in L.elements() if f != L.bottom and is_irreducible(L, f)}
    out.add(L.top)
    return frozenset(out)


def check_axioms(L: Lattice, triples=None, rng=None) -> bool:
    """Exhaustive join/meet sanity for small lattices, sampled triples otherwise."""
    els = list(L.elements())
    if triples is None and len(els) <= 64:
        trip = [(a, b, c) for a in els for b in els for c in els]
    else:
        import random
        rng = rng or random.Random(0)
        trip = [tuple(rng.choice(els) for _ in range(3)) for _ in range(triples or 2000)]
    for a, b, c in trip:
        j, m = L.join(a, b), L.meet(a, b)
        if not (L.leq(a, j) and L.leq(b, j) and L.leq(m, a) and L.leq(m, b)):
            return False
        if L.leq(a, c) and L.leq(b, c) and not L.leq(j, c):
            return False
        if L.leq(c, a) and L.leq(c, b) and not L.leq(c, m):
            return False
        if L.join(a, L.join(b, c)) != L.join(L.join(a, b), c):
            return False
        if L.join(a, L.meet(a, b)) != a or L.meet(a, L.join(a, b)) != a:
            return False
    return True
