"""The universe fan: causal cone, maximal cones U_N, markings and the wavefunction.

Vectors live in the doubled space with coordinates (p_f, m_f) for f in G and
m_top projected out.  A causal region R = (r*, feet) gives the ray
w_R = r*⁺ + Σ feet⁻.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .amplitude import amplitude_E
from .errors import (InputError, InvalidMarking, NotAFace, NotMaximal, NotNestoid, NotSimplicial,
                     NotStable, NotUnimodular, TooLarge)
from .nestoid import (CausalRegion, Nestable, enumerate_causal_regions, enumerate_nested_sets,
                      is_maximal_nested, is_nested, is_nestoid, is_stable, region_split)
from .polyhedral import (ConeZ, cone_faces, cone_facets, dot, extreme_rays_h, lattice_index,
                         primitive, pulling_triangulation, rank, solve)
from .ratexpr import LinForm, RatExpr, compare, divide_out, residue_at, substitute
from .tubings import HasseTree, count_forest_tubings, forest_tubings

WAVEFUNCTION_CAP = 10 ** 6
FACE_LATTICE_CAP = 12


# ---------------------------------------------------------------------------
# coordinates


class DoubledSpace:
    """Coordinates (p_f, m_f) for f in G in member order, without m_top."""

    def __init__(self, G: Nestable):
        self.G = G
        self.lat = G.lat
        coords = []
        for f in G.members:
            coords.append(("p", f))
            if f != G.top:
                coords.append(("m", f))
        self.coords = coords
        self.index = {c: i for i, c in enumerate(coords)}

    @property
    def dim(self):
        return len(self.coords)

    def zero(self):
        return [0] * self.dim

    def vector(self, plus=(), minus=()):
        v = self.zero()
        for f in plus:
            v[self.index[("p", f)]] += 1
        for g in minus:
            if g == self.G.top:
                continue
            v[self.index[("m", g)]] += 1
        return tuple(v)

    def w(self, R: CausalRegion):
        return self.vector([R.star], R.feet)

    def form_vector(self, form: dict):
        """A functional {('p'|'m', f): c} as a coefficient vector."""
        v = [Fraction(0)] * self.dim
        for (k, f), c in form.items():
            if (k, f) in self.index:
                v[self.index[(k, f)]] += c
        return v

    def coord_names(self):
        L = self.lat
        return [k + ":" + L.id(f) for k, f in self.coords]

    def dual_vars(self):
        L = self.lat
        return [("Ep:" if k == "p" else "Em:") + L.id(f) for k, f in self.coords]

    def ray_text(self, v):
        L = self.lat
        parts = []
        for (k, f), x in zip(self.coords, v):
            if x:
                s = L.id(f) + ("+" if k == "p" else "-")
                parts.append(s if x == 1 else f"{x}{s}")
        return " + ".join(parts) if parts else "0"


def region_text(lat, R: CausalRegion):
    return " + ".join([lat.id(R.star) + "+"] + [lat.id(g) + "-" for g in R.feet])


# ---------------------------------------------------------------------------
# causal forms


def _global_form(G: Nestable, g):
    L = G.lat
    top = G.top
    d = {("p", top): Fraction(1)}
    for f in G.members:
        if f != top and L.lt(g, f):
            d[("p", f)] = d.get(("p", f), 0) + 1
            d[("m", f)] = d.get(("m", f), 0) - 1
    if g != top:
        d[("m", g)] = d.get(("m", g), 0) - 1
    return {k: v for k, v in d.items() if v}


def _restricted_form(G: Nestable, N, g):
    L = G.lat
    above = [h for h in N if L.lt(g, h)]
    h = max(above, key=lambda x: L.grade(x)) if above else g
    d = {("p", h): Fraction(1)}
    for f in above:
        if f != h:
            d[("p", f)] = d.get(("p", f), 0) + 1
            d[("m", f)] = d.get(("m", f), 0) - 1
    if g != G.top:
        d[("m", g)] = d.get(("m", g), 0) - 1
    return {k: v for k, v in d.items() if v}


def _as_linform(lat, form):
    return LinForm({k + ":" + lat.id(f): c for (k, f), c in form.items()})


def causal_forms(G: Nestable, N=None, as_dict=False):
    """F_g for every g in G (global), or along the chains of N when N is given.

    Returns a dict {g: LinForm} over the names ``p:ID`` and ``m:ID``; with
    ``as_dict`` the raw {('p'|'m', f): coefficient} maps are returned instead.
    """
    L = G.lat
    if N is None:
        raw = {g: _global_form(G, g) for g in G.members}
    else:
        N = sorted(set(N))
        raw = {g: _restricted_form(G, N, g) for g in N}
    if as_dict:
        return raw
    return {g: _as_linform(L, f) for g, f in raw.items()}


def causal_values(G: Nestable, space: DoubledSpace, x):
    """(p_g, m_g, F_g) values of the point x for every g."""
    forms = causal_forms(G, as_dict=True)
    out = {}
    for g in G.members:
        p = x[space.index[("p", g)]]
        m = x[space.index[("m", g)]] if g != G.top else 0
        F = dot(space.form_vector(forms[g]), x)
        out[g] = (p, m, F)
    return out


def in_causal_cone(G: Nestable, x):
    space = DoubledSpace(G)
    return all(p >= 0 and m >= 0 and F >= 0 for p, m, F in causal_values(G, space, x).values())


# ---------------------------------------------------------------------------
# maximal cones


@dataclass
class UniverseCone:
    G: Nestable
    N: tuple
    regions: list
    gens: ConeZ
    marking: "MarkedNestedSet" = None
    checks: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.gens.dim

    def ray_texts(self):
        return [region_text(self.G.lat, R) for R in self.regions]


def local_coords(G: Nestable, N):
    """(p_f, m_f) for f in N without m_top: the N-coordinate subspace."""
    out = []
    for f in sorted(N):
        out.append(("p", f))
        if f != G.top:
            out.append(("m", f))
    return out


def _local_vector(coords, R):
    idx = {c: i for i, c in enumerate(coords)}
    v = [0] * len(coords)
    v[idx[("p", R.star)]] += 1
    for g in R.feet:
        v[idx[("m", g)]] += 1
    return tuple(v)


def _local_inequalities(G, N, coords):
    idx = {c: i for i, c in enumerate(coords)}
    forms = causal_forms(G, N, as_dict=True)
    rows = []
    names = []
    for c in coords:
        r = [0] * len(coords)
        r[idx[c]] = 1
        rows.append(r)
        names.append(c[0] + ":" + G.lat.id(c[1]))
    for g in sorted(N):
        r = [0] * len(coords)
        for k, v in forms[g].items():
            r[idx[k]] += v
        if any(r) and r not in rows:
            rows.append(r)
            names.append("F:" + G.lat.id(g))
    return rows, names


def universe_max_cone(G: Nestable, N, verify=True, samples=12, seed=0) -> UniverseCone:
    """U_N spanned by w_R over causal regions R within N, with the H/V cross-check."""
    N = tuple(sorted(set(N)))
    if not is_maximal_nested(G, N):
        raise NotMaximal(f"{G.ids(N)} is not a maximal nested set")
    space = DoubledSpace(G)
    regions = enumerate_causal_regions(G, within=N)
    cone = ConeZ([space.w(R) for R in regions], labels=[R.label(G.lat) for R in regions])
    out = UniverseCone(G, N, regions, cone)
    if verify:
        out.checks = verify_universe_cone(G, N, regions, samples=samples, seed=seed)
        if not all(out.checks.values()):
            bad = [k for k, v in out.checks.items() if not v]
            raise AssertionError(f"U_N cross-check failed: {bad}")
    return out


def verify_universe_cone(G, N, regions, samples=12, seed=0):
    """Compare the V-description (the w_R) with the H-description {p, m, F ≥ 0}."""
    coords = local_coords(G, N)
    d = len(coords)
    V = [_local_vector(coords, R) for R in regions]
    ineqs, _ = _local_inequalities(G, N, coords)
    checks = {}
    checks["rays satisfy inequalities"] = all(dot(a, v) >= 0 for a in ineqs for v in V)
    checks["dimension 2|N|-1"] = rank(V) == 2 * len(N) - 1 == d
    tight_ok = True
    for a in ineqs:
        tight = [v for v in V if dot(a, v) == 0]
        if tight and rank(tight) not in (d - 1,):
            # only facet-defining inequalities must be tight on a spanning set;
            # others are tight on a face, which is still checked for consistency
            if rank(tight) >= d:
                tight_ok = False
    checks["tight sets"] = tight_ok
    facet_normals = [tuple(primitive(n)) for n, _ in cone_facets(V)]
    ineq_dirs = {tuple(primitive(a)) for a in ineqs}
    checks["facets are causal inequalities"] = all(n in ineq_dirs for n in facet_normals)
    H_rays = extreme_rays_h(ineqs, [], d)
    checks["H rays equal V rays"] = sorted(H_rays) == sorted(primitive(v) for v in V)
    # sampled H-side points are covered by the tubing triangulation
    tree = HasseTree(G, N)
    simplices = [[_tube_local(tree, coords, S) for S in tub] for tub in forest_tubings(tree)]
    rng = random.Random(seed)
    covered = True
    for _ in range(samples):
        x = [Fraction(0)] * d
        for r in H_rays:
            c = Fraction(rng.randint(0, 9), rng.randint(1, 5))
            x = [a + c * b for a, b in zip(x, r)]
        if not any(_in_simplex(sim, x) for sim in simplices):
            covered = False
            break
    checks["triangulation covers H samples"] = covered
    return checks


def _tube_local(tree, coords, S):
    plus, minus = tree.cut_sets(S)
    idx = {c: i for i, c in enumerate(coords)}
    v = [0] * len(coords)
    for f in plus:
        v[idx[("p", f)]] += 1
    for g in minus:
        v[idx[("m", g)]] += 1
    return tuple(v)


def _in_simplex(gens, x):
    A = [[g[i] for g in gens] for i in range(len(x))]
    sol = solve(A, x)
    return sol is not None and all(c >= 0 for c in sol)


def max_cones(G: Nestable):
    return enumerate_nested_sets(G, only_maximal=True)


def universe_rays(G: Nestable):
    """Rays of the universe fan: one per causal region."""
    space = DoubledSpace(G)
    return [(R, space.w(R)) for R in enumerate_causal_regions(G)]


# ---------------------------------------------------------------------------
# markings

ROMAN = {1: "i", 2: "ii", 3: "iii", 4: "iv", 5: "v"}


@dataclass(frozen=True)
class MarkedNestedSet:
    N: tuple
    plus: frozenset
    minus: frozenset
    dot: frozenset

    @classmethod
    def make(cls, N, plus=(), minus=(), dot=()):
        return cls(tuple(sorted(set(N))), frozenset(plus), frozenset(minus), frozenset(dot))

    def marks(self, g):
        return ("+" if g in self.plus else "") + ("-" if g in self.minus else "") + \
               ("*" if g in self.dot else "")

    def text(self, lat):
        order = sorted(self.N, key=lambda g: (-lat.grade(g), lat.id(g)))
        return "{" + ",".join(lat.id(g) + self.marks(g) for g in order) + "}"

    def key(self):
        return (self.N, tuple(sorted(self.plus)), tuple(sorted(self.minus)), tuple(sorted(self.dot)))


def parse_marking(G: Nestable, text: str) -> MarkedNestedSet:
    """'{123+,12+-*,1+-*}' (• accepted for *, marks in any order)."""
    L = G.lat
    s = text.strip()
    if s.startswith("{"):
        s = s[1:]
    if s.endswith("}"):
        s = s[:-1]
    plus, minus, dots, N = set(), set(), set(), set()
    for part in filter(None, (p.strip() for p in s.split(","))):
        part = part.replace("•", "*").replace("₊", "+").replace("₋", "-")
        k = len(part)
        while k and part[k - 1] in "+-*":
            k -= 1
        name, marks = part[:k], part[k:]
        if not name:
            raise InputError(f"bad marking entry {part!r}")
        g = L.index(name)
        N.add(g)
        if "+" in marks:
            plus.add(g)
        if "-" in marks:
            minus.add(g)
        if "*" in marks:
            dots.add(g)
    return MarkedNestedSet.make(N, plus, minus, dots)


def _covers_in(tree: HasseTree, g):
    """(element covering g in N or None, elements of N covered by g)."""
    p = tree.parent[g]
    return (None if p < 0 else p), tree.children[g]


def marking_violation(G: Nestable, m: MarkedNestedSet):
    """First violated marking condition as (index, detail), or None."""
    L = G.lat
    N = set(m.N)
    if not N:
        return None if not (m.plus or m.minus or m.dot) else (1, "marks outside N")
    if not (m.plus | m.minus | m.dot) <= N:
        return (1, "marks outside N")
    if not is_nested(G, m.N):
        return (0, f"{G.ids(m.N)} is not nested")
    tree = HasseTree(G, m.N)
    # i: every element carries + or -
    for g in m.N:
        if g not in m.plus and g not in m.minus:
            return (1, f"{L.id(g)} has neither + nor -")
    # ii: maximal elements are exactly +
    for h in tree.maximal:
        if h not in m.plus or h in m.minus or h in m.dot:
            return (2, f"maximal element {L.id(h)} must be marked + only")
    # iii: f in β⁺ covering g forces g in β⁻ ∪ β•
    for g in m.N:
        f, _ = _covers_in(tree, g)
        if f is not None and f in m.plus and g not in m.minus and g not in m.dot:
            return (3, f"{L.id(f)}+ covers {L.id(g)}, which lacks - and *")
    # iv: g in β⁻ covered by f forces f in β⁺ ∪ β•
    for g in m.N:
        f, _ = _covers_in(tree, g)
        if g in m.minus and f is not None and f not in m.plus and f not in m.dot:
            return (4, f"{L.id(g)}- is covered by {L.id(f)}, which lacks + and *")
    # v: dotted elements
    for g in m.dot:
        f, kids = _covers_in(tree, g)
        if f is not None and f not in m.plus and f not in m.dot:
            return (5, f"{L.id(g)}* is covered by {L.id(f)}, which lacks + and *")
        for h in kids:
            if h not in m.minus and h not in m.dot:
                return (5, f"{L.id(g)}* covers {L.id(h)}, which lacks - and *")
    return None


def validate_marking(G: Nestable, m: MarkedNestedSet):
    bad = marking_violation(G, m)
    if bad is not None:
        k, why = bad
        raise InvalidMarking(ROMAN.get(k, "nested"), why)
    return m


def adapted_regions(G: Nestable, m: MarkedNestedSet):
    """Causal regions R ⊆ N with r* ∈ β⁺, feet ⊆ β⁻ and the gap below r* dotted."""
    L = G.lat
    out = []
    for R in enumerate_causal_regions(G, within=m.N):
        if R.star not in m.plus or any(g not in m.minus for g in R.feet):
            continue
        ok = True
        for g in m.N:
            if L.lt(g, R.star) and not any(L.leq(g, h) for h in R.feet) and g not in m.dot:
                ok = False
                break
        if ok:
            out.append(R)
    return sorted(out)


def cone_of_marking(G: Nestable, m: MarkedNestedSet) -> UniverseCone:
    validate_marking(G, m)
    space = DoubledSpace(G)
    regions = adapted_regions(G, m)
    cone = ConeZ([space.w(R) for R in regions], dim_space=space.dim,
                 labels=[R.label(G.lat) for R in regions])
    return UniverseCone(G, m.N, regions, cone, marking=m)


def marking_of_point(G: Nestable, x):
    """Support sets of p, m, F at a point x of the doubled space."""
    space = DoubledSpace(G)
    vals = causal_values(G, space, x)
    if any(p < 0 or mm < 0 or F < 0 for p, mm, F in vals.values()):
        raise NotAFace("point outside the causal cone")
    plus = {g for g, (p, _, _) in vals.items() if p > 0}
    minus = {g for g, (_, mm, _) in vals.items() if mm > 0}
    N = plus | minus
    if not N:
        return MarkedNestedSet.make(())
    L = G.lat
    maxN = {g for g in N if not any(L.lt(g, h) for h in N)}
    dots = {g for g, (_, _, F) in vals.items() if F > 0 and g in N and g not in maxN}
    return MarkedNestedSet.make(N, plus, minus, dots)


def marking_of_cone(G: Nestable, gens) -> MarkedNestedSet:
    """Marking read off the relative interior of the cone spanned by gens."""
    gens = [tuple(g) for g in getattr(gens, "gens", gens)]
    if not gens:
        return MarkedNestedSet.make(())
    x = [sum(col) for col in zip(*gens)]
    m = marking_of_point(G, x)
    bad = marking_violation(G, m)
    if bad is not None:
        raise NotAFace(f"support pattern is not a marking (condition {ROMAN.get(bad[0], bad[0])})")
    back = cone_of_marking(G, m)
    if set(map(primitive, back.gens.gens)) != set(map(primitive, gens)):
        # the generators may be a redundant description: test mutual containment
        want, have = ConeZ(gens), back.gens
        if rank(gens) != have.dim or not all(have.contains(g) for g in gens) \
                or not all(want.contains(g) for g in have.gens):
            raise NotAFace("generators do not span a face of the universe fan")
    return m


def enumerate_markings(G: Nestable, nonempty=True):
    out = []
    options = ["+", "-", "+-", "+*", "-*", "+-*"]
    for N in enumerate_nested_sets(G, include_empty=not nonempty):
        if not N:
            out.append(MarkedNestedSet.make(()))
            continue
        for combo in product(options, repeat=len(N)):
            plus = [g for g, c in zip(N, combo) if "+" in c]
            minus = [g for g, c in zip(N, combo) if "-" in c]
            dots = [g for g, c in zip(N, combo) if "*" in c]
            m = MarkedNestedSet.make(N, plus, minus, dots)
            if marking_violation(G, m) is None:
                out.append(m)
    return out


@dataclass
class FaceLattice:
    G: Nestable
    markings: list
    regions: list          # frozenset of CausalRegion per face
    dims: list
    edges: list             # Hasse edges (i, j): face i covered by face j

    def __len__(self):
        return len(self.markings)

    def count_by_dim(self):
        out = {}
        for d in self.dims:
            out[d] = out.get(d, 0) + 1
        return dict(sorted(out.items()))

    def to_json(self):
        L = self.G.lat
        return {"nodes": [m.text(L) for m in self.markings],
                "dims": list(self.dims),
                "rays": [[region_text(L, R) for R in sorted(rs)] for rs in self.regions],
                "edges": [list(e) for e in self.edges]}


def face_lattice(G: Nestable, cap=FACE_LATTICE_CAP) -> FaceLattice:
    """All nonempty faces as markings, ordered by containment of adapted regions."""
    if len(G) > cap:
        raise TooLarge(f"face lattice enumeration is capped at |G| <= {cap}")
    space = DoubledSpace(G)
    ms = enumerate_markings(G)
    items = []
    for m in ms:
        regs = frozenset(adapted_regions(G, m))
        d = rank([space.w(R) for R in regs]) if regs else 0
        items.append((d, m.text(G.lat), m, regs))
    items.sort(key=lambda t: (t[0], t[1]))
    markings = [t[2] for t in items]
    regions = [t[3] for t in items]
    dims = [t[0] for t in items]
    edges = []
    for j in range(len(items)):
        below = [i for i in range(len(items)) if i != j and regions[i] < regions[j]]
        for i in below:
            if not any(k != i and regions[i] < regions[k] for k in below):
                edges.append((i, j))
    return FaceLattice(G, markings, regions, dims, edges)


def faces_by_polyhedra(G: Nestable):
    """Oracle: faces of every U_N by facet enumeration, glued by ray sets."""
    faces = set()
    space = DoubledSpace(G)
    for N in max_cones(G):
        regions = enumerate_causal_regions(G, within=N)
        V = [space.w(R) for R in regions]
        for F in cone_faces(V):
            if F:
                faces.add(frozenset(regions[i] for i in F))
    return faces


# ---------------------------------------------------------------------------
# cosmological polytopes


def cosmological_polytope_map(G: Nestable, N):
    """Images of the dual generators p_g, m_g, F_g (g ≠ top) and p_top.

    Returns dict with 'images' {name: LinForm over x:/y:}, 'expected' (the
    three vectors per Hasse edge plus 2x_top), 'matches' and 'det'.
    """
    N = tuple(sorted(set(N)))
    if not is_maximal_nested(G, N):
        raise NotMaximal(f"{G.ids(N)} is not maximal")
    L = G.lat
    top = G.top
    tree = HasseTree(G, N)
    X = lambda g: "x:" + L.id(g)  # noqa: E731
    Y = lambda g: "y:" + L.id(g)  # noqa: E731
    basis = {("p", top): LinForm({X(top): 2})}
    for g in N:
        if g == top:
            continue
        f = tree.parent[g]
        basis[("p", g)] = LinForm({X(g): 1, Y(g): 1, X(f): -1})
        basis[("m", g)] = LinForm({X(f): 1, Y(g): 1, X(g): -1})

    def image(form):
        acc = LinForm({})
        for k, c in form.items():
            acc = acc + basis[k].scale(c)
        return acc

    forms = causal_forms(G, N, as_dict=True)
    images = {"p:" + L.id(top): basis[("p", top)]}
    expected = {"p:" + L.id(top): LinForm({X(top): 2})}
    for g in N:
        if g == top:
            continue
        f = tree.parent[g]
        images["p:" + L.id(g)] = basis[("p", g)]
        images["m:" + L.id(g)] = basis[("m", g)]
        images["F:" + L.id(g)] = image(forms[g])
        # the three cosmological-polytope vectors of the edge g < f
        expected["p:" + L.id(g)] = LinForm({X(g): 1, X(f): -1, Y(g): 1})
        expected["m:" + L.id(g)] = LinForm({X(g): -1, X(f): 1, Y(g): 1})
        expected["F:" + L.id(g)] = LinForm({X(g): 1, X(f): 1, Y(g): -1})
    coords = local_coords(G, N)
    targets = [X(v) for v in N] + [Y(g) for g in N if g != top]
    M = [[dict(basis[c].terms).get(t, 0) for t in targets] for c in coords]
    from .polyhedral import det
    return {"images": images, "expected": expected,
            "matches": images == expected, "det": det(M)}


# ---------------------------------------------------------------------------
# wavefunction


def wavefunction(G: Nestable, check=True, verify=True, nested=None) -> RatExpr:
    """Laplace transform of U_G through the tubing triangulation of each U_N.

    ``nested`` restricts the sum to the given maximal nested sets.
    """
    if check and not is_nestoid(G.lat, G):
        raise NotNestoid("the wavefunction needs a nestoid")
    cones = max_cones(G) if nested is None else [tuple(sorted(N)) for N in nested]
    trees = [HasseTree(G, N) for N in cones]
    total = sum(count_forest_tubings(t) for t in trees)
    if total > WAVEFUNCTION_CAP:
        raise TooLarge(f"{total} simplices exceed the cap {WAVEFUNCTION_CAP}")
    terms = []
    for N, tree in zip(cones, trees):
        coords = local_coords(G, N)
        for tub in forest_tubings(tree):
            if verify:
                vecs = [_tube_local(tree, coords, S) for S in tub]
                if len(vecs) != len(coords) or rank(vecs) != len(vecs):
                    raise NotSimplicial("tubing does not give a full simplex")
                idx = lattice_index(vecs)
                if idx != 1:
                    raise NotUnimodular(idx)
            terms.append((1, [tree.w_form(S) for S in tub]))
    return RatExpr(terms)


def wavefunction_by_pulling(G: Nestable) -> RatExpr:
    """Second route: pull-triangulate each U_N from its rays and sum weighted simplices.

    Each simplex contributes index/Π⟨g, y⟩, so unimodularity is not assumed.
    """
    terms = []
    for N in max_cones(G):
        coords = local_coords(G, N)
        regions = enumerate_causal_regions(G, within=N)
        V = [_local_vector(coords, R) for R in regions]
        L = G.lat
        names = [("Ep:" if k == "p" else "Em:") + L.id(f) for k, f in coords]
        for simp in pulling_triangulation(V):
            gens = [V[i] for i in simp]
            idx = lattice_index(gens)
            forms = [LinForm({names[i]: x for i, x in enumerate(g) if x}) for g in gens]
            terms.append((idx, forms))
    return RatExpr(terms)


def E_region(lat, R: CausalRegion) -> LinForm:
    d = {"Ep:" + lat.id(R.star): 1}
    for g in R.feet:
        d["Em:" + lat.id(g)] = 1
    return LinForm(d)


def total_energy_sides(G: Nestable):
    psi = wavefunction(G, check=False)
    pole = LinForm("Ep:" + G.lat.id(G.top))
    return residue_at(psi, pole), amplitude_E(G, check=False)


def check_total_energy_residue(G: Nestable, detail=False):
    lhs, rhs = total_energy_sides(G)
    res = compare(lhs, rhs, on_hyperplanes=[LinForm("Ep:" + G.lat.id(G.top))])
    return res if detail else res["equal"]


def shifted_amplitude(G: Nestable, R: CausalRegion, down):
    """A_E of (G_down_R, top r*) with E_h± shifted by the feet below h."""
    L = G.lat
    A = amplitude_E(Nestable(L, down, top=R.star, check=False), check=False)
    sub = {}
    for h in down:
        if h == R.star:
            continue
        feet = [g for g in R.feet if L.leq(g, h)]
        if not feet:
            continue
        shift = LinForm({"Em:" + L.id(g): 1 for g in feet})
        sub["Ep:" + L.id(h)] = LinForm("Ep:" + L.id(h)) + shift
        sub["Em:" + L.id(h)] = LinForm("Em:" + L.id(h)) - shift
    return substitute(A, sub) if sub else A


def region_factorization_sides(G: Nestable, R: CausalRegion, check=True, psi=None):
    """(Res_{E_R} Ψ(G), A^sh · (E_R Ψ(H))) for a causal region R.

    ``psi`` may carry a precomputed Ψ(G) when many regions are checked.
    """
    L = G.lat
    if check and not is_stable(L, G):
        raise NotStable("region factorization needs a stable nestoid")
    down, up, H = region_split(G, R, check=False)
    E = E_region(L, R)
    if psi is None:
        psi = wavefunction(G, check=False)
    lhs = residue_at(psi, E)
    psi_H = wavefunction(Nestable(L, H, top=G.top, check=False), check=False)
    try:
        cancelled = divide_out(psi_H, E)
    except ValueError:
        # not every simplex uses w_R; fall back to the residue, equal on E_R = 0
        cancelled = residue_at(psi_H, E)
    A_sh = shifted_amplitude(G, R, down)
    from .ratexpr import multiply
    return lhs, multiply(A_sh, cancelled), {"down": down, "up": up, "H": H, "E": E,
                                           "A_sh": A_sh, "psi_H": psi_H}


def check_region_factorization(G: Nestable, R: CausalRegion, check=True, detail=False, psi=None):
    lhs, rhs, info = region_factorization_sides(G, R, check=check, psi=psi)
    res = compare(lhs, rhs, on_hyperplanes=[info["E"]])
    if detail:
        res.update(info)
        return res
    return res["equal"]
