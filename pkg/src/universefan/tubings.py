"""Rooted Hasse trees of nested sets, tubes, tubings and cut vectors w_s.

For a nested set N the Hasse diagram is a forest F_N; adjoining a root ``*``
gives the tree T̄_N whose edges are labelled by their lower endpoints, so
E(T̄_N) = N.  A subgraph is encoded by its vertex set (a frozenset of element
indices, with :data:`ROOT` standing for ``*``).
"""
from __future__ import annotations

from itertools import combinations

from .errors import TooLarge
from .ratexpr import LinForm

ROOT = -1
ROOT_ID = "*"


class HasseTree:
    """T̄_N for a nested set N of the nestable set G."""

    def __init__(self, G, N):
        self.G = G
        self.lat = G.lat
        L = self.lat
        self.N = tuple(sorted(set(N)))
        parent = {}
        for g in self.N:
            above = [h for h in self.N if L.lt(g, h)]
            # the elements above g form a chain; the cover is the smallest one
            cover = [h for h in above if not any(k != h and L.lt(k, h) for k in above)]
            parent[g] = cover[0] if cover else ROOT
        self.parent = parent
        kids = {v: [] for v in self.N + (ROOT,)}
        for g, p in parent.items():
            kids[p].append(g)
        self.children = {v: tuple(sorted(c)) for v, c in kids.items()}
        self.maximal = self.children[ROOT]

    # -- naming ---------------------------------------------------------
    def vid(self, v):
        return ROOT_ID if v == ROOT else self.lat.id(v)

    def tube_label(self, S):
        return "{" + ",".join(sorted((self.vid(v) for v in S), key=self._sort_name)) + "}"

    def _sort_name(self, name):
        return (name != ROOT_ID, name)

    # -- structure --------------------------------------------------------
    def vertices(self, with_root=True):
        return self.N + ((ROOT,) if with_root else ())

    def neighbours(self, v, with_root=True):
        out = list(self.children[v])
        if v != ROOT:
            p = self.parent[v]
            if p != ROOT or with_root:
                out.append(p)
        return [u for u in out if with_root or u != ROOT]

    def edges_of(self, S):
        """Edge labels of the induced subgraph on vertex set S."""
        return frozenset(g for g in self.N if g in S and self.parent[g] in S)

    def is_connected(self, S, with_root=True):
        S = set(S)
        if not S:
            return False
        start = next(iter(S))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in self.neighbours(v, with_root):
                if u in S and u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen == S

    def components(self, S, with_root=True):
        S = set(S)
        out = []
        while S:
            start = min(S)
            comp = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for u in self.neighbours(v, with_root):
                    if u in S and u not in comp:
                        comp.add(u)
                        stack.append(u)
            out.append(frozenset(comp))
            S -= comp
        return sorted(out, key=lambda c: sorted(c))

    def forest_components(self):
        """Vertex sets of the trees of F_N (one per maximal element)."""
        return self.components(self.N, with_root=False)

    def connected_subsets(self, with_root=True, cap=200000):
        """All connected vertex sets (tubes), grown from their top vertex downwards."""
        out = []
        verts = self.vertices(with_root)

        def down_closed_options(v):
            # all connected sets with top vertex v
            opts = [frozenset([v])]
            for c in self.children[v]:
                sub = down_closed_options(c)
                opts = opts + [o | s for o in opts for s in sub]
                if len(opts) > cap:
                    raise TooLarge("too many subtrees")
            return opts

        memo = {}

        def opts(v):
            if v not in memo:
                memo[v] = down_closed_options(v)
            return memo[v]

        for v in verts:
            out.extend(opts(v))
        return sorted(set(out), key=lambda s: (len(s), sorted(s)))

    # -- cut vectors ------------------------------------------------------
    def cut_sets(self, S):
        """(δ⁺, δ⁻): edges entering S from above, edges leaving S downwards."""
        S = set(S)
        plus = sorted(f for f in self.N if f in S and self.parent[f] not in S)
        minus = sorted(g for g in self.N if g not in S and self.parent[g] in S)
        return plus, minus

    def w_form(self, S):
        """Laplace pole E_{w_S} = Σ_{δ⁺} Ep + Σ_{δ⁻} Em."""
        plus, minus = self.cut_sets(S)
        L = self.lat
        d = {"Ep:" + L.id(f): 1 for f in plus}
        for g in minus:
            d["Em:" + L.id(g)] = 1
        return LinForm(d)

    def coords(self):
        """Local coordinate order of R^{2N}: (p_f, m_f) for f in N."""
        out = []
        for f in self.N:
            out += [("p", f), ("m", f)]
        return out

    def w_vector(self, S):
        plus, minus = self.cut_sets(S)
        idx = {c: i for i, c in enumerate(self.coords())}
        v = [0] * len(idx)
        for f in plus:
            v[idx[("p", f)]] += 1
        for g in minus:
            v[idx[("m", g)]] += 1
        return tuple(v)

    def dual_vars(self):
        L = self.lat
        return [("Ep:" if k == "p" else "Em:") + L.id(f) for k, f in self.coords()]

    def is_full(self, S, with_root=True):
        return set(S) == set(self.vertices(with_root))


# ---------------------------------------------------------------------------
# tubings


def split_tubings(tree: HasseTree, X, with_root=True):
    """Maximal tubings of the connected vertex set X that contain X itself.

    With no non-adjacency condition a maximal laminar family of tubes is a
    full binary hierarchy: every tube of two or more vertices splits along one
    of its edges into two tubes.  Yields tuples of frozensets.
    """
    X = frozenset(X)
    memo = {}

    def rec(S):
        if S in memo:
            return memo[S]
        if len(S) == 1:
            res = [(S,)]
        else:
            res = []
            for g in sorted(tree.edges_of(S)):
                below = _below_in(tree, g, S)
                A, B = below, S - below
                for ta in rec(A):
                    for tb in rec(B):
                        res.append((S,) + ta + tb)
        memo[S] = res
        return res

    return rec(X)


def _below_in(tree, g, S):
    out = {g}
    stack = [g]
    while stack:
        v = stack.pop()
        for c in tree.children[v]:
            if c in S and c not in out:
                out.add(c)
                stack.append(c)
    return frozenset(out)


def count_split_tubings(tree: HasseTree, X):
    X = frozenset(X)
    memo = {}

    def rec(S):
        if S in memo:
            return memo[S]
        if len(S) == 1:
            r = 1
        else:
            r = 0
            for g in tree.edges_of(S):
                A = _below_in(tree, g, S)
                r += rec(A) * rec(S - A)
        memo[S] = r
        return r

    return rec(X)


def forest_tubings(tree: HasseTree):
    """Maximal tubings of F_N (no tube contains the root): product over its trees."""
    comps = tree.forest_components()
    result = [()]
    for comp in comps:
        result = [r + t for r in result for t in split_tubings(tree, comp, with_root=False)]
    return result


def count_forest_tubings(tree: HasseTree):
    n = 1
    for comp in tree.forest_components():
        n *= count_split_tubings(tree, comp)
    return n


def rooted_tubings(tree: HasseTree):
    """Maximal tubings of T̄_N without the maximal tube (simplices of R^{2N}_+)."""
    full = frozenset(tree.vertices(True))
    return [tuple(t for t in tub if t != full) for tub in split_tubings(tree, full)]


def brute_force_max_tubings(tree: HasseTree, with_root=True, drop_full=False, cap_tubes=16):
    """Oracle: all inclusion-maximal laminar families of tubes (exponential)."""
    tubes = tree.connected_subsets(with_root)
    full = frozenset(tree.vertices(with_root))
    if drop_full:
        tubes = [t for t in tubes if t != full]
    if len(tubes) > cap_tubes:
        raise TooLarge("laminar oracle capped")

    def compatible(a, b):
        return a <= b or b <= a or not (a & b)

    fams = []

    def rec(i, cur):
        ext = False
        for k in range(len(tubes)):
            t = tubes[k]
            if t not in cur and all(compatible(t, c) for c in cur):
                ext = True
                if k >= i:
                    rec(k + 1, cur + [t])
        if not ext:
            fams.append(frozenset(cur))

    rec(0, [])
    return sorted(set(fams), key=lambda f: sorted(sorted(t) for t in f))


def tubing_is_laminar(tubing):
    ts = list(tubing)
    for a, b in combinations(ts, 2):
        if not (a <= b or b <= a or not (a & b)):
            return False
    return True
