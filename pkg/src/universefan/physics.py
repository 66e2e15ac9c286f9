"""The polygon case: chords of an (n+1)-gon as intervals of sides.

Sides are 1..n plus the distinguished side ``star``.  The ambient lattice is
Boolean on the n-1 edges of the path 1-2-...-n; edge k joins sides k and k+1,
so an interval of sides {a..b} is the edge set {a..b-1}.  The polygon has
vertices 0..n, side i runs from vertex i-1 to vertex i and the star side from
n back to 0; the chord between vertices a < b cuts off the sides a+1..b.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .amplitude import amplitude, amplitude_E
from .errors import InputError, TooLarge
from .fan import check_region_factorization, check_total_energy_residue, wavefunction
from .lattice import SetLattice
from .nestoid import Nestable, enumerate_nested_sets, parse_region
from .ratexpr import LinForm, RatExpr, evaluate, substitute, to_canonical

MAX_N = 12
MAX_N_WAVEFUNCTION = 8
MAX_N_RUSSIAN_DOLL = 6
STAR = "star"


def catalan(k):
    return comb(2 * k, k) // (k + 1)


@dataclass
class PolygonModel:
    n: int
    lattice: SetLattice
    nestable: Nestable
    sep: str

    def sides(self, elem):
        """Sides cut off by the chord (sorted list of ints)."""
        m = self.lattice.mask(elem)
        edges = [k for k in range(self.n - 1) if m >> k & 1]
        return list(range(edges[0] + 1, edges[-1] + 3))

    def vertices(self, elem):
        s = self.sides(elem)
        return (s[0] - 1, s[-1])

    def chord(self, a, b):
        """Element for the chord between polygon vertices a < b."""
        if b - a < 2:
            raise InputError(f"({a},{b}) is a side, not a chord")
        m = sum(1 << k for k in range(a, b - 1))
        return self.lattice.index_of_mask(m)

    def side_name(self, i):
        return STAR if i == STAR else str(i)

    def chord_name(self, sides):
        return self.sep.join(str(i) for i in sides)

    @property
    def top(self):
        return self.nestable.top

    def id(self, elem):
        return self.lattice.id(elem)


def build_polygon(n) -> PolygonModel:
    if n < 3:
        raise InputError("the polygon model needs n ≥ 3")
    if n > MAX_N:
        raise TooLarge(f"n = {n} exceeds the cap {MAX_N}")
    sep = "" if n <= 9 else "."
    nedges = n - 1

    def runs(m):
        out, k = [], 0
        while k < nedges:
            if m >> k & 1:
                j = k
                while j + 1 < nedges and m >> (j + 1) & 1:
                    j += 1
                out.append((k, j))
                k = j + 1
            else:
                k += 1
        return out

    def namer(m):
        return "|".join(sep.join(str(i) for i in range(a + 1, b + 3)) for a, b in runs(m))

    labels = [sep.join((str(k + 1), str(k + 2))) for k in range(nedges)]
    L = SetLattice(labels, namer=namer)
    members = []
    for a in range(nedges):
        for b in range(a, nedges):
            members.append(L.index_of_mask(sum(1 << k for k in range(a, b + 1))))
    G = Nestable(L, members)
    return PolygonModel(n, L, G, sep)


# ---------------------------------------------------------------------------
# energies


def side_var(i):
    return "E:" + (STAR if i == STAR else str(i))


def chord_var(model, elem):
    return "E:" + (STAR if elem == model.top else model.id(elem))


def physical_map(model):
    """Ep:I ↦ E_I + Σ_{i∈I} E_i and Em:I ↦ E_I − Σ_{i∈I} E_i, with E_1̂ = E_star."""
    sub = {}
    for I in model.nestable.members:
        sides = model.sides(I)
        plus = {chord_var(model, I): 1}
        minus = {chord_var(model, I): 1}
        for i in sides:
            plus[side_var(i)] = plus.get(side_var(i), 0) + 1
            minus[side_var(i)] = minus.get(side_var(i), 0) - 1
        sub["Ep:" + model.id(I)] = LinForm(plus)
        sub["Em:" + model.id(I)] = LinForm(minus)
    return sub


def physical_substitution(expr: RatExpr, model) -> RatExpr:
    if expr.is_zero():
        return expr
    return substitute(expr, physical_map(model))


def physical_form(form: LinForm, model) -> LinForm:
    return form.substitute(physical_map(model))


def mandelstam(model, elem):
    """s_I = E_I² − (Σ_{i∈I} E_i)² as a function on a point dict."""
    sides = model.sides(elem)

    def s(point):
        return point[chord_var(model, elem)] ** 2 - sum(point[side_var(i)] for i in sides) ** 2
    return s


# ---------------------------------------------------------------------------
# Ψ and A


def psi_n(n, physical=False) -> RatExpr:
    if n > MAX_N_WAVEFUNCTION:
        raise TooLarge(f"the wavefunction is capped at n = {MAX_N_WAVEFUNCTION}")
    model = build_polygon(n)
    psi = wavefunction(model.nestable, check=False)
    return physical_substitution(psi, model) if physical else psi


def amplitude_n(n, doubled=False) -> RatExpr:
    model = build_polygon(n)
    if doubled:
        return amplitude_E(model.nestable, check=False)
    return amplitude(model.nestable, check=False)


def check_total_energy(n):
    return check_total_energy_residue(build_polygon(n).nestable)


def check_mandelstam(n, trials=6, seed=0):
    """A_E(physical point) = A(s_I) with s_I = E_I² − (Σ E_i)², exactly at random points."""
    model = build_polygon(n)
    A = amplitude_n(n)
    AE = physical_substitution(amplitude_n(n, doubled=True), model)
    rng = random.Random(seed)
    names = [side_var(i) for i in range(1, n + 1)] + [side_var(STAR)]
    names += [chord_var(model, I) for I in model.nestable.members if I != model.top]
    for _ in range(trials):
        pt = {v: Fraction(rng.randint(1, 97), rng.randint(1, 13)) for v in names}
        svals = {"s:" + model.id(I): mandelstam(model, I)(pt)
                 for I in model.nestable.members if I != model.top}
        if any(v == 0 for v in svals.values()):
            continue
        if evaluate(AE, pt) != evaluate(A, svals):
            return False
    return True


# ---------------------------------------------------------------------------
# polygon geometry: triangulations, subpolygons, Russian dolls


def triangulations(lo, hi):
    """Triangulations of the sub-polygon on vertices lo..hi, as tuples of triangles (a, k, b)."""
    memo = {}

    def rec(a, b):
        if b - a < 2:
            return [()]
        if (a, b) not in memo:
            out = []
            for k in range(a + 1, b):
                for left in rec(a, k):
                    for right in rec(k, b):
                        out.append(((a, k, b),) + left + right)
            memo[(a, b)] = out
        return memo[(a, b)]

    return rec(lo, hi)


def triangulation_chords(model, tri):
    """The nested set of a triangulation: each triangle's edge facing the star side."""
    return tuple(sorted(model.chord(a, b) for a, _, b in tri))


def _edges(t):
    a, k, b = t
    return [(a, k), (k, b), (a, b)]


def subpolygons(tri):
    """Connected sets of triangles (adjacent across a shared chord)."""
    tri = list(tri)
    adj = {t: [u for u in tri if u != t and set(_edges(t)) & set(_edges(u))] for t in tri}
    seen = set()
    out = []
    frontier = [frozenset([t]) for t in tri]
    while frontier:
        nxt = []
        for S in frontier:
            if S in seen:
                continue
            seen.add(S)
            out.append(S)
            for t in S:
                for u in adj[t]:
                    if u not in S:
                        nxt.append(S | {u})
        frontier = nxt
    return out


def boundary(S):
    count = {}
    for t in S:
        for e in _edges(t):
            count[e] = count.get(e, 0) + 1
    return sorted(e for e, c in count.items() if c == 1)


def region_of(model, S):
    """(top chord, feet chords) of a subpolygon, from its boundary."""
    bd = boundary(S)
    top = max(bd, key=lambda e: e[1] - e[0])
    feet = [e for e in bd if e != top and e[1] - e[0] >= 2]
    return model.chord(*top), sorted(model.chord(*e) for e in feet)


def perimeter_sides(model, S):
    """Sides and chords around the boundary of S, by name, with the star side for 1̂."""
    out = []
    for a, b in boundary(S):
        if b - a == 1:
            out.append(side_var(b))
        elif (a, b) == (0, model.n):
            out.append(side_var(STAR))
        else:
            out.append(chord_var(model, model.chord(a, b)))
    return sorted(out)


def region_pole(model, S) -> LinForm:
    top, feet = region_of(model, S)
    d = {"Ep:" + model.id(top): 1}
    for g in feet:
        d["Em:" + model.id(g)] = 1
    return LinForm(d)


def complete_nestings(S):
    """Maximal nestings of subpolygons inside S: cut along an inner chord, recurse."""
    S = frozenset(S)
    if len(S) == 1:
        return [(S,)]
    out = []
    for t in S:
        for u in S:
            if t < u and set(_edges(t)) & set(_edges(u)):
                A, B = _cut(S, t, u)
                for na in complete_nestings(A):
                    for nb in complete_nestings(B):
                        out.append((S,) + na + nb)
    return out


def _cut(S, t, u):
    # removing the dual edge t-u splits the dual tree of S in two
    side = {t}
    stack = [t]
    while stack:
        x = stack.pop()
        for y in S:
            if y not in side and set(_edges(x)) & set(_edges(y)) and {x, y} != {t, u}:
                side.add(y)
                stack.append(y)
    return frozenset(side), S - side


def russian_doll(n) -> RatExpr:
    """Σ over triangulations and complete nestings of subpolygons of Π 1/E_R."""
    if n > MAX_N_RUSSIAN_DOLL:
        raise TooLarge(f"the Russian-doll expansion is capped at n = {MAX_N_RUSSIAN_DOLL}")
    model = build_polygon(n)
    terms = []
    for tri in triangulations(0, n):
        for nest in complete_nestings(frozenset(tri)):
            terms.append((1, [region_pole(model, S) for S in nest]))
    return RatExpr(terms)


def nestings_for(model, N):
    """Complete nestings for the triangulation with chord set N, as lists of region labels."""
    N = tuple(sorted(N))
    for tri in triangulations(0, model.n):
        if triangulation_chords(model, tri) == N:
            return [sorted(_region_label(model, S) for S in nest)
                    for nest in complete_nestings(frozenset(tri))]
    raise InputError("not a triangulation")


def _region_label(model, S):
    top, feet = region_of(model, S)
    return model.id(top) + (";" + ",".join(model.id(g) for g in feet) if feet else "")


def check_catalan(n):
    """(#maximal nested sets, #triangulations by apex recursion, Catalan(n-1))."""
    model = build_polygon(n)
    nested = enumerate_nested_sets(model.nestable, only_maximal=True)
    tris = triangulations(0, n)
    same = {tuple(sorted(N)) for N in nested} == {triangulation_chords(model, t) for t in tris}
    return len(nested), len(tris), catalan(n - 1), same


# ---------------------------------------------------------------------------
# lightcone forms, diagonal refinement, factorization


def chord_lambda(model, N, I) -> LinForm:
    """λ_I = Σ_{J ⊋ I} p_J + Σ_{J ⊊ I or J ∩ I = ∅} m_J over chords J of N."""
    sI = set(model.sides(I))
    d = {}
    for J in N:
        if J == I:
            continue
        sJ = set(model.sides(J))
        if sI < sJ:
            d["p:" + model.id(J)] = 1
        elif sJ < sI or not (sI & sJ):
            d["m:" + model.id(J)] = 1
    return LinForm(d)


def diagonal_refinement(model, N):
    """Cones of the universe part of the maximal refinement of U_N on the diagonal, modulo 1̂.

    Each cone is returned as a sorted list of chord sums such as "12+34".
    """
    from .polyhedral import extreme_generators
    from .refine import _pullback_cone, _rooted_tubing_is_forest, lightcone_subdivide
    G = model.nestable
    sub = lightcone_subdivide(G, N, "graphical")
    tree = sub.tree
    coords_q = [c for c in tree.coords() if not (c[0] == "m" and c[1] in tree.maximal)]
    drop = tree.N.index(G.top)
    cones = []
    for i in range(len(sub.cones)):
        if not _rooted_tubing_is_forest(tree, sub.cones[i][1]):
            continue
        rays = _pullback_cone(tree, sub.gens(i, drop_top_minus=True), coords_q)
        q = [tuple(x for k, x in enumerate(r) if k != drop) for r in rays]
        q = extreme_generators([v for v in q if any(v)])
        names = [model.id(f) for f in tree.N if f != G.top]
        cones.append(sorted("+".join(names[k] if c == 1 else f"{c}{names[k]}"
                                     for k, c in enumerate(v) if c) for v in q))
    return sorted(cones)


def resolve_aliases(model, text):
    """Accept "star-complement" for the top chord 1̂."""
    return text.replace("star-complement", model.id(model.top))


def factorization_demo(n, region_text):
    model = build_polygon(n)
    G = model.nestable
    R = parse_region(G, resolve_aliases(model, region_text))
    res = check_region_factorization(G, R, check=False, detail=True)
    ids = lambda S: sorted((model.id(g) for g in S), key=lambda s: (-len(s), s))
    return {
        "region": R.label(model.lattice),
        "G_in": ids(res["down"]),
        "G_out": ids(res["H"]),
        "A_sh": to_canonical(res["A_sh"]),
        "psi_out": to_canonical(res["psi_H"]),
        "pole": res["E"].text(),
        "equal": res["equal"],
    }


def check_all_regions(n):
    from .nestoid import enumerate_causal_regions
    G = build_polygon(n).nestable
    return all(check_region_factorization(G, R, check=False) for R in enumerate_causal_regions(G))


def check_lambda(model, N):
    """Chord-geometric λ_I against refine's λ_e under the chord/edge dictionary."""
    from .refine import lambda_forms
    from .tubings import HasseTree
    tree = HasseTree(model.nestable, N)
    coords = tree.coords()
    for e, vec in lambda_forms(tree).items():
        mine = chord_lambda(model, N, e).coeffs
        theirs = {f"{k}:{model.id(f)}": c for (k, f), c in zip(coords, vec) if c}
        if {k: Fraction(v) for k, v in mine.items()} != {k: Fraction(v) for k, v in theirs.items()}:
            return False
    return True


def check_perimeter(n):
    """After substitution, E_R is the sum of energies around the subpolygon's perimeter."""
    model = build_polygon(n)
    for tri in triangulations(0, n):
        for S in subpolygons(tri):
            lhs = physical_form(region_pole(model, S), model)
            rhs = LinForm({v: 1 for v in perimeter_sides(model, S)})
            if lhs != rhs:
                return False
    return True
