"""Boolean building sets, B-trees, lightcone subdivisions and refinements.

Subgraphs of the rooted tree T̄_N are handled as vertex sets (see
:mod:`universefan.tubings`); Boolean building sets on N live on edge
labels, i.e. on elements of N.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .errors import GluingViolation, InputError, NotAtomic, NotConnectedMember, NotMaximal, TooLarge
from .nestoid import Nestable, enumerate_nested_sets, is_maximal_nested
from .polyhedral import (ConeZ, cone_facets, cones_meet_properly, det, dot, extreme_generators,
                         extreme_rays_h, lattice_index, primitive, rank, solve)
from .ratexpr import LinForm
from .tubings import (ROOT, HasseTree, brute_force_max_tubings, forest_tubings, rooted_tubings,
                      split_tubings)

BTREE_CAP = 12
BRUTE_TREE_CAP = 6


# ---------------------------------------------------------------------------
# fans as plain data


@dataclass
class Fan:
    """Maximal cones over an interned ray list."""

    dim: int
    rays: list = field(default_factory=list)
    cones: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self._index = {r: i for i, r in enumerate(self.rays)}

    def ray_id(self, v):
        v = tuple(int(x) for x in v)
        if v not in self._index:
            self._index[v] = len(self.rays)
            self.rays.append(v)
        return self._index[v]

    def add_cone(self, gens, label=None):
        ids = tuple(sorted({self.ray_id(g) for g in gens}))
        self.cones.append(ids)
        self.labels.append(label)
        return ids

    def cone_gens(self, i):
        return [self.rays[j] for j in self.cones[i]]

    def to_json(self):
        return {"rays": [list(r) for r in self.rays], "cones": [list(c) for c in self.cones],
                "labels": [str(x) for x in self.labels]}

    def cone_sets(self):
        return {frozenset(self.cone_gens(i)) for i in range(len(self.cones))}


# ---------------------------------------------------------------------------
# cut maps


@dataclass
class CutMaps:
    tree: HasseTree
    phi: dict       # ('p'|'m', f) -> frozenset of edges
    psi: dict       # ('p'|'m', f) -> tuple vector over (edges, vertices) with * eliminated
    target: list    # names of the psi target coordinates

    def E_plus(self, f):
        return self.phi[("p", f)]

    def E_minus(self, f):
        return self.phi[("m", f)]

    def psi_matrix(self):
        """Columns are psi images of the domain basis (p_f, m_f for f in N)."""
        cols = [self.psi[c] for c in self.tree.coords()]
        return [[col[i] for col in cols] for i in range(len(self.target))]

    def psi_apply(self, x):
        out = [0] * len(self.target)
        for c, xc in zip(self.tree.coords(), x):
            if xc:
                out = [a + xc * b for a, b in zip(out, self.psi[c])]
        return tuple(out)

    def psi_inverse_images(self):
        """psi⁻¹ of the target basis: v ↦ v⁺ + Σ children⁻, e ↦ -(e⁺ + e⁻)."""
        t = self.tree
        idx = {c: i for i, c in enumerate(t.coords())}
        out = {}
        for f in t.N:
            v = [0] * len(idx)
            v[idx[("p", f)]] -= 1
            v[idx[("m", f)]] -= 1
            out[("e", f)] = tuple(v)
            w = [0] * len(idx)
            w[idx[("p", f)]] += 1
            for g in t.children[f]:
                w[idx[("m", g)]] += 1
            out[("v", f)] = tuple(w)
        return out

    def psi_inverse_apply(self, y):
        inv = self.psi_inverse_images()
        keys = [("e", f) for f in self.tree.N] + [("v", f) for f in self.tree.N]
        out = [0] * (2 * len(self.tree.N))
        for k, yk in zip(keys, y):
            if yk:
                out = [a + yk * b for a, b in zip(out, inv[k])]
        return tuple(out)

    def phi_apply(self, x):
        """phi(x) as a vector over N (a representative modulo u_tot)."""
        N = self.tree.N
        out = {f: 0 for f in N}
        for c, xc in zip(self.tree.coords(), x):
            for e in self.phi[c]:
                out[e] += xc
        return tuple(out[f] for f in N)


def cut_maps(G: Nestable, N) -> CutMaps:
    tree = HasseTree(G, N)
    Ns = tree.N
    desc = {f: _descendants(tree, f) for f in Ns}
    phi, psi = {}, {}
    target = ["e:" + G.lat.id(f) for f in Ns] + ["v:" + G.lat.id(f) for f in Ns]
    for f in Ns:
        Ep = frozenset(desc[f])
        Em = frozenset(set(Ns) - desc[f] - {f})
        phi[("p", f)] = Ep
        phi[("m", f)] = Em
        Vp = set(desc[f]) | {f}
        Vm = (set(Ns) - Vp) | {ROOT}
        for key, E, V in ((("p", f), Ep, Vp), (("m", f), Em, Vm)):
            vec = [1 if g in E else 0 for g in Ns] + [1 if g in V else 0 for g in Ns]
            if ROOT in V:
                # subtract û_tot to clear the root coordinate
                vec = [x - 1 for x in vec]
            psi[key] = tuple(vec)
    return CutMaps(tree, phi, psi, target)


def _descendants(tree, f):
    out = set()
    stack = list(tree.children[f])
    while stack:
        v = stack.pop()
        out.add(v)
        stack.extend(tree.children[v])
    return out


def check_psi_inverse(cm: CutMaps, samples=100, seed=0):
    rng = random.Random(seed)
    n = 2 * len(cm.tree.N)
    M = cm.psi_matrix()
    if abs(det(M)) != 1:
        return False
    for _ in range(samples):
        x = tuple(rng.randint(-9, 9) for _ in range(n))
        if cm.psi_inverse_apply(cm.psi_apply(x)) != x:
            return False
        y = tuple(rng.randint(-9, 9) for _ in range(n))
        if cm.psi_apply(cm.psi_inverse_apply(y)) != y:
            return False
    return True


# ---------------------------------------------------------------------------
# Boolean building sets and B-trees


class BooleanBuildingSet:
    """A family of subsets of ``ground`` with all singletons, closed under overlapping unions."""

    def __init__(self, ground, sets, check=True, name=str):
        self.ground = tuple(ground)
        self.name = name
        fam = {frozenset(s) for s in sets if s}
        self.sets = sorted(fam, key=lambda s: (len(s), sorted(map(name, s))))
        self._set = set(fam)
        if check:
            for g in self.ground:
                if frozenset([g]) not in self._set:
                    raise InputError(f"singleton {name(g)} missing")
            for a, b in combinations(self.sets, 2):
                if a & b and (a | b) not in self._set:
                    raise InputError("not closed under unions of overlapping members")

    def __contains__(self, s):
        return frozenset(s) in self._set

    def __len__(self):
        return len(self.sets)

    def text(self, s):
        return "".join(sorted(map(self.name, s))) if all(len(self.name(x)) == 1 for x in s) \
            else "{" + ",".join(sorted(map(self.name, s))) + "}"

    def maximal_members(self):
        return [s for s in self.sets if not any(s < t for t in self.sets)]

    def is_nested(self, M):
        M = list(M)
        for a, b in combinations(M, 2):
            if not (a <= b or b <= a or not (a & b)):
                return False
        # unions of ≥ 2 pairwise disjoint members must leave the family
        disjoint = [s for s in M]
        for k in range(2, len(disjoint) + 1):
            for combo in combinations(disjoint, k):
                if all(not (x & y) for x, y in combinations(combo, 2)):
                    if frozenset().union(*combo) in self._set:
                        return False
        return True

    def maximal_nested_sets(self):
        if len(self.ground) > BTREE_CAP:
            raise TooLarge(f"B-tree enumeration is capped at {BTREE_CAP} elements")
        sets = self.sets
        out = set()
        tops = self.maximal_members()

        def rec(cur, start):
            extended = False
            for k in range(len(sets)):
                s = sets[k]
                if s in cur:
                    continue
                if self.is_nested(list(cur) + [s]):
                    extended = True
                    if k >= start:
                        rec(cur | {s}, k + 1)
            if not extended:
                out.add(frozenset(cur))

        rec(frozenset(tops), 0)
        return sorted(out, key=lambda M: sorted(sorted(map(self.name, s)) for s in M))


@dataclass(frozen=True)
class RootedForest:
    """Parent map on the ground set (None at roots)."""

    parent: tuple  # tuple of (vertex, parent or None)

    @property
    def pmap(self):
        return dict(self.parent)

    def children(self, v):
        return sorted((u for u, p in self.parent if p == v), key=str)

    def roots(self):
        return sorted((u for u, p in self.parent if p is None), key=str)

    def below(self, v):
        out = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for c in self.children(x):
                out.add(c)
                stack.append(c)
        return frozenset(out)

    def edges(self):
        return sorted(((p, u) for u, p in self.parent if p is not None), key=str)

    def text(self, name=str):
        def rec(v):
            kids = self.children(v)
            if not kids:
                return name(v)
            return name(v) + "(" + ",".join(rec(c) for c in kids) + ")"
        return " ".join(rec(r) for r in self.roots())


def forest_from_nested(B: BooleanBuildingSet, M) -> RootedForest:
    """Tree whose descendant sets are the members of the maximal nested set M."""
    M = sorted(M, key=len)
    parent = {}
    owner = {}
    for s in M:
        children = [t for t in M if t < s and not any(t < u < s for u in M)]
        rest = set(s) - set().union(*children) if children else set(s)
        if len(rest) != 1:
            raise NotMaximal("nested set is not maximal")
        v = next(iter(rest))
        owner[s] = v
        for t in children:
            parent[owner[t]] = v
    for s in M:
        parent.setdefault(owner[s], None)
    return RootedForest(tuple(sorted(parent.items(), key=lambda kv: str(kv[0]))))


def is_btree(B: BooleanBuildingSet, T: RootedForest) -> bool:
    V = B.ground
    below = {v: T.below(v) for v in V}
    if any(below[v] not in B for v in V):
        return False
    pm = T.pmap

    def ancestors(v):
        out = set()
        while pm.get(v) is not None:
            v = pm[v]
            out.add(v)
        return out

    anc = {v: ancestors(v) for v in V}
    for k in range(2, len(V) + 1):
        for combo in combinations(V, k):
            if any(a in anc[b] or b in anc[a] for a, b in combinations(combo, 2)):
                continue
            if frozenset().union(*(below[v] for v in combo)) in B:
                return False
    return True


def btrees(B: BooleanBuildingSet):
    return [forest_from_nested(B, M) for M in B.maximal_nested_sets()]


def brute_force_btrees(B: BooleanBuildingSet):
    """Oracle: filter every rooted forest on the ground set by the definition."""
    V = list(B.ground)
    if len(V) > BRUTE_TREE_CAP:
        raise TooLarge("brute-force tree enumeration is capped")
    out = []
    for choice in product([None] + V, repeat=len(V)):
        parent = dict(zip(V, choice))
        if any(parent[v] == v for v in V):
            continue
        ok = True
        for v in V:
            seen = set()
            x = v
            while x is not None:
                if x in seen:
                    ok = False
                    break
                seen.add(x)
                x = parent[x]
            if not ok:
                break
        if not ok:
            continue
        T = RootedForest(tuple(sorted(parent.items(), key=lambda kv: str(kv[0]))))
        if is_btree(B, T):
            out.append(T)
    return out


def _indicator(ground, S):
    return tuple(1 if g in S else 0 for g in ground)


def _upsets(T: RootedForest, ground):
    """Ancestor-closed vertex sets with a single root (the rooted subtrees)."""
    out = []
    for r in T.roots():
        def grow(cur, frontier):
            out.append(frozenset(cur))
            for i, v in enumerate(frontier):
                grow(cur | {v}, frontier[i + 1:] + T.children(v))
        grow({r}, T.children(r))
    return sorted(set(out), key=lambda s: (len(s), sorted(map(str, s))))


def minmax_subdivision(B: BooleanBuildingSet, mode="min") -> Fan:
    """Σ^min (cones C_T on descendant sets) or Σ^max (cones C^T on rooted subtrees)."""
    ground = B.ground
    fan = Fan(len(ground))
    for T in btrees(B):
        if mode == "min":
            gens = [_indicator(ground, T.below(v)) for v in ground]
        elif mode == "max":
            gens = [_indicator(ground, S) for S in _upsets(T, ground)]
        else:
            raise InputError("mode must be min or max")
        fan.add_cone(gens, label=T.text(B.name))
    return fan


def alpha_linear_on(B: BooleanBuildingSet, gens, mode="min", forms=None):
    """Is Σ_t min/max over t of the coordinate forms linear on the cone spanned by gens?

    ``forms[g]`` maps a generator to the value of the form indexed by g; by
    default the coordinate functionals.  Linear on a cone iff each t has an
    element attaining the extremum at every generator.
    """
    ground = B.ground
    pick = min if mode == "min" else max
    for t in B.sets:
        if len(t) == 1:
            continue
        ok = False
        for e in t:
            if all(_form_value(forms, e, ground, g) == pick(_form_value(forms, x, ground, g) for x in t)
                   for g in gens):
                ok = True
                break
        if not ok:
            return False
    return True


def _form_value(forms, e, ground, g):
    if forms is None:
        return g[ground.index(e)]
    return forms[e](g)


# ---------------------------------------------------------------------------
# lightcone subdivisions of R^{2N}_+


def edge_vertices(tree: HasseTree, t):
    return frozenset(t) | frozenset(tree.parent[e] for e in t)


def is_connected_edges(tree: HasseTree, t):
    return bool(t) and tree.is_connected(edge_vertices(tree, t))


def minimal_bset(tree: HasseTree):
    N = tree.N
    return BooleanBuildingSet(N, [{f} for f in N] + [set(N)], name=tree.vid)


def graphical_bset(tree: HasseTree):
    sets = set()
    for S in tree.connected_subsets(with_root=True):
        E = tree.edges_of(S)
        if E:
            sets.add(E)
    return BooleanBuildingSet(tree.N, sets, name=tree.vid)


def validate_bset(tree: HasseTree, B: BooleanBuildingSet):
    for t in B.sets:
        if not is_connected_edges(tree, t):
            raise NotConnectedMember(f"{B.text(t)} is not a connected subgraph of the rooted tree")
    return B


def spanned_subgraphs(tree: HasseTree, M):
    """Vertex sets of subgraphs spanned by M: single vertices and connected unions of members."""
    out = {frozenset([v]) for v in tree.vertices(True)}
    M = list(M)
    full = frozenset(tree.vertices(True))
    for k in range(1, len(M) + 1):
        for combo in combinations(M, k):
            E = frozenset().union(*combo)
            V = frozenset().union(*(edge_vertices(tree, t) for t in combo))
            # connected through its own edges: in a tree that means it is the induced subtree
            if tree.is_connected(V) and tree.edges_of(V) == E:
                out.add(V)
    out.discard(full)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def lambda_forms(tree: HasseTree):
    """λ_e as functionals on the local coordinates (p_f, m_f)."""
    coords = tree.coords()
    idx = {c: i for i, c in enumerate(coords)}
    desc = {f: _descendants(tree, f) for f in tree.N}
    out = {}
    for e in tree.N:
        v = [0] * len(coords)
        for f in tree.N:
            if e in desc[f]:
                v[idx[("p", f)]] += 1
            elif e != f:
                v[idx[("m", f)]] += 1
        out[e] = tuple(v)
    return out


@dataclass
class LightconeSubdivision:
    tree: HasseTree
    B: BooleanBuildingSet
    cones: list          # list of (M, [vertex sets])

    def gens(self, i, drop_top_minus=False):
        M, subs = self.cones[i]
        vecs = [self.tree.w_vector(S) for S in subs]
        if drop_top_minus:
            vecs = _drop_top_minus(self.tree, vecs)
        return vecs

    def label(self, i):
        """The missing singleton for the minimal choice, else the non-singleton members of M."""
        M, _ = self.cones[i]
        missing = [f for f in self.tree.N if frozenset([f]) not in M]
        if len(self.B) == len(self.tree.N) + 1 and len(missing) == 1:
            return self.tree.vid(missing[0])
        big = sorted((t for t in M if len(t) > 1), key=lambda t: (len(t), sorted(map(self.tree.vid, t))))
        return "|".join(self.B.text(t) for t in big)

    def ray_texts(self, i):
        out = []
        for S in self.cones[i][1]:
            plus, minus = self.tree.cut_sets(S)
            out.append(" + ".join([self.tree.vid(f) + "+" for f in plus] +
                                  [self.tree.vid(g) + "-" for g in minus]))
        return out

    def witness_ok(self):
        """α = Σ_t min λ_e is linear on every cone."""
        lam = lambda_forms(self.tree)
        forms = {e: (lambda g, v=lam[e]: dot(v, g)) for e in self.tree.N}
        return all(alpha_linear_on(self.B, self.gens(i), "min", forms) for i in range(len(self.cones)))


def _drop_top_minus(tree, vecs):
    coords = tree.coords()
    drop = {i for i, (k, f) in enumerate(coords) if k == "m" and f in tree.maximal}
    out = []
    for v in vecs:
        w = tuple(x for i, x in enumerate(v) if i not in drop)
        if any(w):
            out.append(w)
    return out


def lightcone_subdivide(G: Nestable, N, B="minimal") -> LightconeSubdivision:
    tree = HasseTree(G, N)
    if B == "minimal":
        B = minimal_bset(tree)
    elif B == "graphical":
        B = graphical_bset(tree)
    elif not isinstance(B, BooleanBuildingSet):
        B = BooleanBuildingSet(tree.N, B, name=tree.vid)
    validate_bset(tree, B)
    cones = []
    for M in B.maximal_nested_sets():
        cones.append((M, spanned_subgraphs(tree, M)))
    return LightconeSubdivision(tree, B, cones)


def phi_pullback_agrees(sub: LightconeSubdivision, samples=40, seed=0):
    """x ∈ C_M  ⇔  φ(x) ∈ D_M (mod u_tot) on random points of the orthant."""
    tree = sub.tree
    cm_phi = cut_maps(tree.G, tree.N)
    N = tree.N
    rng = random.Random(seed)
    cones = [ConeZ(sub.gens(i)) for i in range(len(sub.cones))]
    for _ in range(samples):
        x = [rng.randint(0, 6) for _ in range(2 * len(N))]
        y = cm_phi.phi_apply(x)
        for i, (M, _) in enumerate(sub.cones):
            up = cones[i].contains(x)
            basis = sorted(M, key=len)
            A = [[1 if f in t else 0 for t in basis] for f in N]
            sol = solve(A, list(y))
            full = frozenset(N)
            down = sol is not None and all(c >= 0 for c, t in zip(sol, basis) if t != full)
            if up != down:
                return False
    return True


# ---------------------------------------------------------------------------
# universe cones from the minimal subdivision; tubing triangulation


def universe_cone_from_min_subdivision(G: Nestable, N):
    """⟨w_s : s connected in F_N⟩, cross-checked against the minimal subdivision and U_N."""
    from .fan import DoubledSpace, universe_max_cone
    N = tuple(sorted(set(N)))
    if not is_maximal_nested(G, N):
        raise NotMaximal(f"{G.ids(N)} is not maximal")
    tree = HasseTree(G, N)
    space = DoubledSpace(G)
    subs = [S for S in tree.connected_subsets(with_root=False)]
    gens = sorted({space.vector(*tree.cut_sets(S)) for S in subs})
    # the cone C_top of the minimal subdivision, sliced at m_top = 0
    sub = lightcone_subdivide(G, N, "minimal")
    i_top = next(i for i, (M, _) in enumerate(sub.cones) if frozenset([G.top]) not in M)
    sliced = {space.vector(*tree.cut_sets(S)) for S in sub.cones[i_top][1]}
    sliced = sorted(v for v in sliced if any(v))
    U = universe_max_cone(G, N, verify=False)
    checks = {"face of C_top equals U_N": set(sliced) == set(U.gens.gens),
              "connected subgraphs of F_N give U_N": set(gens) == set(U.gens.gens)}
    return ConeZ(gens, labels=None), checks


@dataclass
class TubingTriangulation:
    tree: HasseTree
    rooted: list        # tubings of T̄_N (without the full tree)
    forest: list        # tubings of F_N
    dets: dict

    def simplices(self, which="forest"):
        tubs = self.forest if which == "forest" else self.rooted
        return [[self.tree.w_vector(S) for S in t] for t in tubs]


def tubing_triangulation(G: Nestable, N, oracle=False) -> TubingTriangulation:
    tree = HasseTree(G, N)
    rooted = rooted_tubings(tree)
    forest = forest_tubings(tree)
    dets = {"rooted": set(), "forest": set()}
    for key, tubs in (("rooted", rooted), ("forest", forest)):
        for tub in tubs:
            vecs = [tree.w_vector(S) for S in tub]
            if key == "rooted":
                dets[key].add(abs(det([list(v) for v in vecs])))
            else:
                dets[key].add(lattice_index(vecs) if rank(vecs) == len(vecs) else 0)
    out = TubingTriangulation(tree, rooted, forest, dets)
    if oracle:
        bf = brute_force_max_tubings(tree, with_root=True, drop_full=True)
        assert {frozenset(t) for t in rooted} == set(bf), "tubing enumeration disagrees with the oracle"
    return out


# ---------------------------------------------------------------------------
# lightcone refinements of the doubled fan


def _restrict_bset(tree_small: HasseTree, B: BooleanBuildingSet):
    keep = set(tree_small.N)
    return {frozenset(t & keep) for t in B.sets if t & keep}


def check_gluing(G: Nestable, selector, nested=None):
    """Both gluing conditions for every nested set and every one-element deletion."""
    nested = nested if nested is not None else [N for N in enumerate_nested_sets(G) if N]
    cache = {}

    def bset(N):
        if N not in cache:
            tree = HasseTree(G, N)
            B = _select(tree, selector)
            for t in B.sets:
                if not is_connected_edges(tree, t):
                    raise GluingViolation(f"{G.ids(N)}: member {B.text(t)} is not connected")
            cache[N] = (tree, B)
        return cache[N]

    for N in nested:
        tree, B = bset(N)
        for f in N:
            Np = tuple(x for x in N if x != f)
            if not Np:
                continue
            tree_p, Bp = bset(Np)
            if _restrict_bset(tree_p, B) != set(Bp.sets):
                raise GluingViolation(f"{G.ids(N)} and {G.ids(Np)}: building sets do not restrict")
    return True


def _select(tree, selector):
    if selector == "minimal":
        return minimal_bset(tree)
    if selector == "graphical":
        return graphical_bset(tree)
    fam = selector(tree)
    if isinstance(fam, BooleanBuildingSet):
        return fam
    return BooleanBuildingSet(tree.N, fam, name=tree.vid)


@dataclass
class Refinement:
    G: Nestable
    selector: object
    fan: Fan
    index: list           # (N, label) per maximal cone
    coords: list          # doubled coordinates with m_top

    def pairwise_ok(self, limit=None):
        n = len(self.fan.cones)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        if limit is not None:
            pairs = pairs[:limit]
        for i, j in pairs:
            if not cones_meet_properly(self.fan.cone_gens(i), self.fan.cone_gens(j)):
                return False
        return True

    def find(self, N, label):
        N = tuple(sorted(N))
        for i, (M, lab) in enumerate(self.index):
            if M == N and lab == label:
                return i
        raise KeyError(label)

    def shared_rays(self, i, j):
        return sorted(set(self.fan.cone_gens(i)) & set(self.fan.cone_gens(j)))

    def ray_text(self, v):
        L = self.G.lat
        parts = []
        for (k, f), x in zip(self.coords, v):
            if x:
                parts.append(("" if x == 1 else str(x)) + L.id(f) + ("+" if k == "p" else "-"))
        return " + ".join(parts)


def lightcone_refinement(G: Nestable, selector="minimal", validate=True) -> Refinement:
    if validate and callable(selector):
        check_gluing(G, selector)
    coords = []
    for f in G.members:
        coords += [("p", f), ("m", f)]
    cidx = {c: i for i, c in enumerate(coords)}
    fan = Fan(len(coords))
    index = []
    for N in enumerate_nested_sets(G, only_maximal=True):
        tree = HasseTree(G, N)
        B = _select(tree, selector)
        sub = lightcone_subdivide(G, N, B)
        for i in range(len(sub.cones)):
            gens = []
            for S in sub.cones[i][1]:
                plus, minus = tree.cut_sets(S)
                v = [0] * len(coords)
                for f in plus:
                    v[cidx[("p", f)]] += 1
                for g in minus:
                    v[cidx[("m", g)]] += 1
                gens.append(tuple(v))
            fan.add_cone(gens, label=(G.ids(N), sub.label(i)))
            index.append((tuple(N), sub.label(i)))
    return Refinement(G, selector, fan, index, coords)


def universe_is_subfan(G: Nestable, ref: Refinement):
    """Every U_N is the face m_top = 0 of the cone indexed by (N, top)."""
    from .fan import DoubledSpace, universe_max_cone
    space = DoubledSpace(G)
    top_m = ref.coords.index(("m", G.top))
    for N in enumerate_nested_sets(G, only_maximal=True):
        i = ref.find(N, G.lat.id(G.top))
        face = {tuple(x for k, x in enumerate(v) if k != top_m)
                for v in ref.fan.cone_gens(i) if v[top_m] == 0}
        # reorder into DoubledSpace coordinates
        red = [c for c in ref.coords if c != ("m", G.top)]
        conv = {tuple(v[red.index(c)] for c in space.coords) for v in face}
        U = universe_max_cone(G, N, verify=False)
        if conv != set(U.gens.gens):
            return False
    return True


# ---------------------------------------------------------------------------
# projection to the nested set fan


def local_inverse(G: Nestable, N):
    """s_N : R^E → R^N with h_f ↦ f - Σ M_f; returns (h choice, dual forms f* ∘ s_N)."""
    L = G.lat
    if not L.is_atomic:
        raise NotAtomic("projection needs an atomic lattice")
    N = tuple(sorted(N))
    h = {}
    for f in N:
        below = [g for g in N if L.lt(g, f)]
        Mf = [g for g in below if not any(g != k and L.lt(g, k) for k in below)]
        covered = set().union(*(L.atom_set(g) for g in Mf)) if Mf else set()
        free = sorted(set(L.atom_set(f)) - covered, key=lambda a: L.id(a))
        h[f] = (free[0], Mf)
    # f* ∘ s_N = h_f* - h_parent*  (coefficient of f in s_N(e_a))
    forms = {}
    for f in N:
        d = {"a:" + L.id(h[f][0]): 1}
        parent = [g for g in N if f in h[g][1]]
        for g in parent:
            d["a:" + L.id(h[g][0])] = d.get("a:" + L.id(h[g][0]), 0) - 1
        forms[f] = LinForm(d)
    return h, forms


def pl_function_terms(G: Nestable, N, B):
    """Terms of Σ_t max_{e ∈ t} (e* ∘ s_N) for non-singleton t ∈ B."""
    _, forms = local_inverse(G, N)
    terms = []
    for t in B.sets:
        if len(t) > 1:
            terms.append(sorted((forms[e] for e in t), key=lambda x: x.text()))
    return terms


def atom_image(G, N, r):
    """p of the R^N vector r (coefficients per element of sorted N)."""
    cols = _atom_columns(G, tuple(sorted(N)))
    out = [0] * len(cols[0]) if cols else []
    for col, c in zip(cols, r):
        if c:
            out = [a + c * b for a, b in zip(out, col)]
    return tuple(out)


_ATOM_COLS = {}


def _atom_columns(G, N):
    key = (id(G.lat), N)
    if key not in _ATOM_COLS:
        L = G.lat
        atoms = sorted(L.atoms, key=L.id)
        cols = []
        for f in N:
            below = set(L.atom_set(f))
            cols.append(tuple(1 if a in below else 0 for a in atoms))
        _ATOM_COLS[key] = cols
    return _ATOM_COLS[key]


def _quotient_ray(v):
    # representative modulo u_tot with the last coordinate zero
    w = [x - v[-1] for x in v]
    return primitive(w) if any(w) else None


@dataclass
class ProjectedRefinement:
    G: Nestable
    mode: str
    per_N: dict = field(default_factory=dict)
    upstairs: int = 0
    downstairs: Fan = None
    universe_up: int = 0
    universe_down: Fan = None
    quotient: Fan = None
    link: Fan = None
    witness_methods: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())


def _pullback_cone(tree, gens_q, coords_q):
    """Δ₀⁻¹ of a full cone in the quotient by top⁻: rays in R^N."""
    N = tree.N
    top = tree.maximal
    idx = {c: i for i, c in enumerate(coords_q)}
    # Δ₀ as a matrix R^N -> quotient coordinates
    cols = []
    for f in N:
        v = [0] * len(coords_q)
        v[idx[("p", f)]] = 1
        if f not in top:
            v[idx[("m", f)]] = 1
        cols.append(v)
    facets = cone_facets([list(g) for g in gens_q])
    ineqs = []
    for nv, _ in facets:
        ineqs.append([dot(nv, col) for col in cols])
    rays = extreme_rays_h(ineqs, [], len(N))
    return rays


def _layer_witness(tree, tubing):
    """Σ over the layers T_0, T_1, ... of Σ_{t ∈ T_i} w_t, following the layer recipe."""
    T = [frozenset(t) for t in tubing]
    retired = set()
    total = [0] * len(tree.coords())
    for _ in range(len(T) + 1):
        rest = [t for t in T if t not in retired]
        layer = [t for t in rest if not any(u < t for u in rest)]
        for t in layer:
            total = [a + b for a, b in zip(total, tree.w_vector(t))]
        inner = [t for t in layer if any(t < u for u in T)]
        if not inner:
            break
        retired |= set(inner)
    return tuple(total)


def _partition_witness(tree, tubing):
    """Σ over t of the partition {t} ∪ {maximal tubes disjoint from t}; always diagonal."""
    T = [frozenset(t) for t in tubing]
    total = [0] * len(tree.coords())
    for t in T:
        away = [u for u in T if not (u & t)]
        part = [t] + [u for u in away if not any(u < v for v in away)]
        for s in part:
            total = [a + b for a, b in zip(total, tree.w_vector(s))]
    return tuple(total)


def _on_diagonal(tree, x):
    coords = tree.coords()
    return all(x[coords.index(("m", f))] == x[coords.index(("p", f))]
               for f in tree.N if f not in tree.maximal)


def nested_link_fan(G: Nestable) -> Fan:
    """Σ̄_G: the nested set fan on R^E modulo u_tot (rays p(f) for f ≠ top)."""
    L = G.lat
    fan = Fan(len(L.atoms))
    for N in enumerate_nested_sets(G, only_maximal=True):
        gens = [_quotient_ray(atom_image(G, [f], [1])) for f in N if f != G.top]
        fan.add_cone([g for g in gens if g is not None], label=G.ids(N))
    return fan


def project_refinement(G: Nestable, mode="max", witnesses=True) -> ProjectedRefinement:
    """Pull the lightcone refinement back along Δ₀ and push it forward along p."""
    L = G.lat
    if not L.is_atomic:
        raise NotAtomic("projection needs an atomic lattice")
    selector = "graphical" if mode == "max" else "minimal"
    natoms = len(L.atoms)
    out = ProjectedRefinement(G, mode, downstairs=Fan(natoms), universe_down=Fan(natoms),
                              quotient=Fan(natoms), link=nested_link_fan(G))
    checks = {"pullback equals Σ^max of B_N": True, "full-dimensional images": True,
              "PL function linear on each cone": True}
    wit_points, methods = [], {}
    for N in enumerate_nested_sets(G, only_maximal=True):
        tree = HasseTree(G, N)
        B = _select(tree, selector)
        sub = lightcone_subdivide(G, N, B)
        coords_q = [c for c in tree.coords() if not (c[0] == "m" and c[1] in tree.maximal)]
        h, forms = local_inverse(G, N)
        atom_names = ["a:" + L.id(a) for a in sorted(L.atoms, key=L.id)]
        pl = {e: (lambda v, fm=forms[e]: fm.evaluate(dict(zip(atom_names, v)))) for e in tree.N}
        pulled = []
        n_universe = 0
        for i in range(len(sub.cones)):
            label = (G.ids(N), sub.label(i))
            rays = _pullback_cone(tree, sub.gens(i, drop_top_minus=True), coords_q)
            if rank(rays) != len(N):
                checks["full-dimensional images"] = False
            pulled.append(frozenset(rays))
            down = [atom_image(G, N, r) for r in rays]
            out.downstairs.add_cone(down, label=label)
            if not alpha_linear_on(B, down, "max", pl):
                checks["PL function linear on each cone"] = False
            if _in_universe_part(tree, sub, i, mode):
                n_universe += 1
                out.universe_down.add_cone(down, label=label)
                q = extreme_generators([v for v in (_quotient_ray(d) for d in down) if v is not None])
                out.quotient.add_cone(q, label=label)
            if witnesses:
                x, how = _cone_witness(tree, sub, i, mode, rays)
                methods[how] = methods.get(how, 0) + 1
                if x is not None:
                    wit_points.append((x, len(out.downstairs.cones) - 1, tree))
        # Σ^max of B_N as a second route
        bt = minmax_subdivision(B, "max")
        route_b = {frozenset(primitive(g) for g in bt.cone_gens(k)) for k in range(len(bt.cones))}
        if set(pulled) != route_b:
            checks["pullback equals Σ^max of B_N"] = False
        out.per_N[tuple(N)] = {"h": h, "terms": pl_function_terms(G, N, B),
                               "upstairs": len(sub.cones), "universe": n_universe}
        out.upstairs += len(sub.cones)
        out.universe_up += n_universe
    checks["count bijection"] = out.upstairs == len(out.downstairs.cone_sets())
    checks["universe count bijection"] = out.universe_up == len(out.universe_down.cone_sets())
    link = [ConeZ(out.link.cone_gens(k)) for k in range(len(out.link.cones))]
    checks["quotient refines the link fan"] = all(
        any(all(c.contains(g) for g in out.quotient.cone_gens(k)) for c in link)
        for k in range(len(out.quotient.cones)))
    if witnesses:
        checks["diagonal witness for every cone"] = "no diagonal witness" not in methods
        checks["each witness in exactly one cone"] = _witnesses_unique(G, out.downstairs, wit_points)
    out.witness_methods = methods
    out.checks = checks
    return out


def _witnesses_unique(G, fan, wit_points):
    """Each witness image lies in the interior of its own downstairs cone and of no other.

    A downstairs cone sits inside C_N = p(R^N_+) for its nested set, so only
    cones over nested-set cones containing the point need testing.
    """
    cones = [ConeZ(fan.cone_gens(k)) for k in range(len(fan.cones))]
    by_N = {}
    for k, lab in enumerate(fan.labels):
        by_N.setdefault(tuple(lab[0]), []).append(k)
    blocks = {}
    for Nids, ks in by_N.items():
        rays = sorted({r for k in ks for r in fan.cone_gens(k)})
        blocks[Nids] = ConeZ(rays)
    for x, i, tree in wit_points:
        y = _downstairs_point(G, tree, x)
        hits = [k for Nids, ks in by_N.items() if blocks[Nids].contains(y)
                for k in ks if cones[k].relative_interior(y)]
        if hits != [i]:
            return False
    return True


def _in_universe_part(tree, sub, i, mode):
    """Is cone i part of the subfan refining U_N?"""
    if mode == "min":
        return not any(frozenset([f]) in sub.cones[i][0] for f in tree.maximal)
    return _rooted_tubing_is_forest(tree, sub.cones[i][1])


def _rooted_tubing_is_forest(tree, subs):
    """A maximal rooted tubing refines U_N iff {*} and all of F_N's vertices form tubes."""
    return frozenset(tree.N) in set(subs) if len(tree.maximal) == 1 else \
        all(c in set(subs) for c in tree.forest_components())


def _cone_witness(tree, sub, i, mode, rays=None):
    """(diagonal point in the interior of cone i, method) modulo top⁻, or (None, reason)."""
    coords = tree.coords()
    top = tree.maximal
    keep = [j for j, c in enumerate(coords) if not (c[0] == "m" and c[1] in top)]
    gens_q = sub.gens(i, drop_top_minus=True)
    cone = ConeZ(gens_q)

    def good(x):
        return _on_diagonal(tree, x) and cone.relative_interior([x[j] for j in keep])

    if mode == "max":
        x = _layer_witness(tree, sub.cones[i][1])
        if good(x):
            return x, "layers"
        x = _partition_witness(tree, sub.cones[i][1])
        return (x, "partitions") if good(x) else (None, "no diagonal witness")
    # sum of the pulled-back rays, pushed forward by Δ₀
    if rays is None:
        rays = _pullback_cone(tree, gens_q, [coords[j] for j in keep])
    y = [sum(col) for col in zip(*rays)]
    x = tuple(y[tree.N.index(f)] if (k == "p" or f not in top) else 0 for k, f in coords)
    return (x, "pullback") if good(x) else (None, "no diagonal witness")


def _downstairs_point(G, tree, x):
    coords = tree.coords()
    y = [x[coords.index(("p", f))] for f in tree.N]
    return atom_image(G, tree.N, y)


# ---------------------------------------------------------------------------
# second wavefunction route


def wavefunction_by_min_subdivision(G: Nestable, nested=None):
    """Ψ from the minimal lightcone subdivision: U_N = C_top ∩ {m_top = 0}, pull-triangulated.

    Each simplex contributes its lattice index over the product of its poles,
    so no unimodularity is assumed along this route.
    """
    from .fan import local_coords
    from .polyhedral import pulling_triangulation
    from .ratexpr import RatExpr
    L = G.lat
    terms = []
    for N in (enumerate_nested_sets(G, only_maximal=True) if nested is None else nested):
        tree = HasseTree(G, N)
        sub = lightcone_subdivide(G, N, "minimal")
        i_top = next(i for i, (M, _) in enumerate(sub.cones) if frozenset([G.top]) not in M)
        coords = tree.coords()
        keep = [j for j, c in enumerate(coords) if c != ("m", G.top)]
        V = sorted({tuple(v[j] for j in keep) for v in sub.gens(i_top)
                    if v[coords.index(("m", G.top))] == 0})
        V = [v for v in V if any(v)]
        names = [("Ep:" if coords[j][0] == "p" else "Em:") + L.id(coords[j][1]) for j in keep]
        for simp in pulling_triangulation(V):
            gens = [V[k] for k in simp]
            idx = lattice_index(gens)
            terms.append((idx, [LinForm({names[k]: x for k, x in enumerate(g) if x}) for g in gens]))
    return RatExpr(terms)
