"""Free nested set fans, nestoid amplitudes and the atom projection."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError, NotAtomic, NotNestoid, NotStable
from .lattice import minimal_building_set
from .nestoid import Nestable, down_up_sets, enumerate_nested_sets, is_nestoid, is_stable
from .ratexpr import LinForm, RatExpr, equal, multiply, substitute, sum_exprs


def s_var(lat, f):
    return "s:" + lat.id(f)


@dataclass
class FreeNestedFan:
    nestable: Nestable
    max_cones: list

    @property
    def rays(self):
        return list(self.nestable.members)

    def quotient_ray(self):
        return self.nestable.top


def build_free_fan(G: Nestable, check=True) -> FreeNestedFan:
    if check and not is_nestoid(G.lat, G):
        raise NotNestoid("the free nested set fan needs a nestoid")
    cones = enumerate_nested_sets(G, only_maximal=True)
    for N in cones:
        # every maximal nested set contains the top, so quotienting drops one factor
        assert G.top in N, "maximal nested set without the top element"
    return FreeNestedFan(G, cones)


def amplitude(G: Nestable, check=True) -> RatExpr:
    """Σ over maximal nested sets N of Π_{f ∈ N, f ≠ top} 1/s_f."""
    L = G.lat
    fan = build_free_fan(G, check=check)
    terms = [(1, [LinForm(s_var(L, f)) for f in N if f != G.top]) for N in fan.max_cones]
    return RatExpr(terms)


def amplitude_E(G: Nestable, check=True) -> RatExpr:
    """The amplitude after s_f ↦ E_f⁺ E_f⁻ (each factor splits into two poles)."""
    L = G.lat
    fan = build_free_fan(G, check=check)
    terms = []
    for N in fan.max_cones:
        fs = []
        for f in N:
            if f != G.top:
                fs += [LinForm("Ep:" + L.id(f)), LinForm("Em:" + L.id(f))]
        terms.append((1, fs))
    return RatExpr(terms)


def matroid_substitution(G: Nestable):
    """s_f ↦ Σ_{e ≤ f} a_e for an atomic lattice."""
    L = G.lat
    if not L.is_atomic:
        raise NotAtomic("the matroid substitution needs an atomic lattice")
    return {s_var(L, f): LinForm({"a:" + L.id(e): 1 for e in L.atom_set(f)}) for f in G.members}


# ---------------------------------------------------------------------------
# projection p : R^G -> R^E and its retract


def atom_projection(G: Nestable, x) -> dict:
    """Image of x = {f: coefficient} under f ↦ Σ_{e ≤ f} e, keyed by atom index."""
    L = G.lat
    if not L.is_atomic:
        raise NotAtomic("atom projection needs an atomic lattice")
    y = {}
    for f, c in x.items():
        if c:
            for e in L.atom_set(f):
                y[e] = y.get(e, 0) + c
    return {e: v for e, v in y.items() if v}


def retract(G: Nestable, y) -> dict:
    """Inverse of the projection on the fan, by peeling the maximal G-elements inside the support."""
    L = G.lat
    y = {e: Fraction(v) for e, v in y.items() if v}
    x = {}
    atoms_of = {f: frozenset(L.atom_set(f)) for f in G.members}
    guard = 0
    while y:
        guard += 1
        if guard > 4 * len(G) + 4:
            raise InputError("point is not in the image of the fan")
        F = frozenset(y)
        inside = [f for f in G.members if atoms_of[f] <= F]
        top = [f for f in inside if not any(g != f and atoms_of[f] < atoms_of[g] for g in inside)]
        if not top:
            raise InputError("point is not in the image of the fan")
        lam = min(y.values())
        for f in top:
            x[f] = x.get(f, 0) + lam
            for e in atoms_of[f]:
                y[e] = y.get(e, 0) - lam
        y = {e: v for e, v in y.items() if v}
        if any(v < 0 for v in y.values()):
            raise InputError("point is not in the image of the fan")
    return x


def random_fan_point(G: Nestable, rng, cones=None):
    cones = cones if cones is not None else enumerate_nested_sets(G, only_maximal=True)
    N = rng.choice(cones)
    k = rng.randint(1, len(N))
    face = rng.sample(list(N), k)
    return {f: Fraction(rng.randint(1, 50), rng.randint(1, 7)) for f in face}


def check_projection_injective(G: Nestable, samples=1000, seed=0):
    """Round-trip r(p(x)) = x and distinct images for random fan points."""
    rng = random.Random(seed)
    cones = enumerate_nested_sets(G, only_maximal=True)
    seen = {}
    for _ in range(samples):
        x = random_fan_point(G, rng, cones)
        y = atom_projection(G, x)
        if retract(G, y) != x:
            return False
        key = tuple(sorted(y.items()))
        prev = seen.setdefault(key, x)
        if prev != x:
            return False
    return True


# ---------------------------------------------------------------------------
# factorization and building-set invariance


def factorization_sides(G: Nestable, f):
    """(lhs, rhs) for Res_{s_f=0} A(L,G) = A([0̂,f], G_down) · A(L, G_up)."""
    L = G.lat
    A = amplitude(G, check=False)
    if f == G.top:
        return A, A
    from .ratexpr import residue_at
    lhs = residue_at(A, LinForm(s_var(L, f)))
    down, up = down_up_sets(G, f)
    A_down = amplitude(Nestable(L, down, top=f, check=False), check=False)
    A_up = amplitude(Nestable(L, up, top=G.top, check=False), check=False) if up else RatExpr.one()
    return lhs, multiply(A_down, A_up)


def check_factorization(G: Nestable, f, check=True) -> bool:
    if check and not is_stable(G.lat, G):
        raise NotStable("factorization needs a stable nestoid")
    lhs, rhs = factorization_sides(G, f)
    hyper = [] if f == G.top else [LinForm(s_var(G.lat, f))]
    return equal(lhs, rhs, on_hyperplanes=hyper)


def factors_in(Gmin, g):
    """Maximal elements of Gmin below g: the factors of [0̂, g]."""
    L = Gmin.lat
    below = [h for h in Gmin.members if L.leq(h, g)]
    return [h for h in below if not any(k != h and L.leq(h, k) for k in below)]


def building_invariance_sides(G: Nestable, Gmin: Nestable = None):
    """(substituted A(G), A(Gmin)) with s_g ↦ Σ_{g' ∈ F(g)} s_{g'}."""
    L = G.lat
    if Gmin is None:
        Gmin = Nestable(L, minimal_building_set(L))
    sub = {s_var(L, g): LinForm({s_var(L, h): 1 for h in factors_in(Gmin, g)}) for g in G.members}
    left = substitute(amplitude(G, check=False), sub)
    right = amplitude(Gmin, check=False)
    return left, right


def check_building_invariance(G: Nestable, Gmin: Nestable = None) -> bool:
    left, right = building_invariance_sides(G, Gmin)
    return equal(left, right)


def term_degrees(expr: RatExpr):
    return sorted({len(fs) for _, fs in expr.terms})


__all__ = [
    "FreeNestedFan", "build_free_fan", "amplitude", "amplitude_E", "matroid_substitution",
    "atom_projection", "retract", "check_projection_injective", "factorization_sides",
    "check_factorization", "factors_in", "building_invariance_sides", "check_building_invariance",
    "sum_exprs", "term_degrees",
]
