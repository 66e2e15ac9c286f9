"""The acceptance suite: fourteen end-to-end checks against the worked examples.

Each check returns ``(ok, detail)``; ``run`` adds the wall-clock budget and
prints one line per criterion.  Expected values below are hand-entered from
the worked examples and compared with what the library computes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from .amplitude import amplitude, check_factorization, check_projection_injective, factorization_sides
from .fan import (DoubledSpace, check_region_factorization, check_total_energy_residue, face_lattice,
                  marking_violation, parse_marking, universe_max_cone, wavefunction)
from .fixtures import load_fixture
from .nestoid import enumerate_causal_regions, enumerate_nested_sets, is_building_set, is_nestoid, is_stable
from .oracles import ORACLE_CAP, building_oracle, nestoid_oracle, upstream_lower_set_holds
from .polyhedral import extreme_generators
from .ratexpr import RatExpr, compare, equal, multiply, sum_exprs, to_canonical
from .ratexpr import parse_linform as LinForm

ALL_FIXTURES = ["star", "bowtie", "bool2", "bool3-intervals", "nonbuild-nestoid"] + \
    [f"polygon-n{n}" for n in range(3, 9)]


@dataclass
class Outcome:
    number: int
    title: str
    ok: bool
    seconds: float
    budget: float
    detail: str

    @property
    def passed(self):
        return self.ok and (self.budget is None or self.seconds < self.budget)

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        slow = "" if self.budget is None or self.seconds < self.budget else f" (over {self.budget:g}s)"
        return f"[{mark}] {self.number:2d}. {self.title} ({self.seconds:.2f}s){slow}: {self.detail}"

    def to_json(self):
        return {"number": self.number, "title": self.title, "passed": self.passed, "ok": self.ok,
                "seconds": round(self.seconds, 3), "budget": self.budget, "detail": self.detail}


def _mono(*names, coef=1):
    return RatExpr([(coef, [LinForm(n) for n in names])])


def _sum_of_inverses(*names):
    return sum_exprs([_mono(n) for n in names])


def _vec(space, G, text):
    """'T+ + abc-' style text (T is the top element) as a doubled-space vector."""
    L = G.lat
    plus, minus = [], []
    for part in text.split(" + "):
        name, sign = part[:-1], part[-1]
        g = G.top if name == "T" else L.index(name)
        (plus if sign == "+" else minus).append(g)
    return space.vector(plus, minus)


def _ids(L, names, top):
    return tuple(sorted(top if n == "T" else L.index(n) for n in names))


# ---------------------------------------------------------------------------


def c01_star_amplitude():
    L, G = load_fixture("star")
    pairs = [("1", "12"), ("2", "12"), ("2", "23"), ("3", "23"), ("3", "13"), ("1", "13")]
    expected = sum_exprs([_mono("s:" + a, "s:" + b) for a, b in pairs])
    got = to_canonical(amplitude(G))
    ok = got == to_canonical(expected) and len(amplitude(G)) == 6
    return ok, got


BOWTIE_NONCHAIN = [
    "a abc f", "b abc f", "d def c", "e def c", "c abc f",
    "c def f", "c d abcd", "c e abce", "f a adef", "f b bdef",
]


def c02_bowtie_enumeration():
    L, G = load_fixture("bowtie")
    cones = enumerate_nested_sets(G, only_maximal=True)
    sizes = {len(N) for N in cones}

    def is_chain(N):
        return all(L.comparable(a, b) for a in N for b in N)

    nonchain = {N for N in cones if not is_chain(N)}
    expected = {_ids(L, s.split() + ["T"], G.top) for s in BOWTIE_NONCHAIN}
    ok = len(cones) == 38 and sizes == {4} and nonchain == expected
    return ok, f"{len(cones)} maximal nested sets, sizes {sorted(sizes)}, {len(nonchain)} non-chains match: {nonchain == expected}"


def c03_bowtie_residues():
    L, G = load_fixture("bowtie")
    out = []
    disp = {
        "abc": multiply(_sum_of_inverses("s:abcd", "s:abce", "s:f"), _sum_of_inverses("s:a", "s:b", "s:c")),
        "ae": multiply(_sum_of_inverses("s:abce", "s:adef"), _sum_of_inverses("s:a", "s:e")),
    }
    ok = True
    for f, shown in disp.items():
        lhs, rhs = factorization_sides(G, L.index(f))
        good = equal(lhs, shown) and equal(rhs, shown) and check_factorization(G, L.index(f))
        ok &= good
        out.append(f"s_{f}: {good}")
    return ok, ", ".join(out)


def _star_closed_form(G):
    L = G.lat
    T = L.id(G.top)
    terms = []
    for a in ("1", "2", "3"):
        for b in (x for x in ("12", "13", "23") if a in x):
            base = [f"Ep:{T}", f"Ep:{T}+Em:{b}", f"Ep:{b}+Em:{a}", f"Ep:{a}"]
            terms.append((1, [LinForm(x) for x in base + [f"Ep:{b}"]]))
            terms.append((1, [LinForm(x) for x in base + [f"Ep:{T}+Em:{a}"]]))
    return RatExpr(terms)


def c04_star_wavefunction():
    L, G = load_fixture("star")
    psi = wavefunction(G)
    shown = _star_closed_form(G)
    c = compare(psi, shown)
    ok = c["exact"] is True and len(shown) == 12 and to_canonical(psi) == to_canonical(shown)
    return ok, f"{len(psi)} terms, exact={c['exact']}, sampled={c['sampled']}"


BOWTIE_UN = {
    "a abc abcd": ["T+", "T+ + abcd-", "T+ + abc-", "T+ + a-", "abcd+", "abcd+ + abc-", "abcd+ + a-",
                   "abc+", "abc+ + a-", "a+"],
    "a abc f": ["T+", "T+ + f-", "T+ + abc-", "T+ + abc- + f-", "T+ + a-", "T+ + a- + f-", "abc+",
                "abc+ + a-", "a+", "f+"],
    "c d abcd": ["T+", "T+ + abcd-", "T+ + c-", "T+ + d-", "T+ + c- + d-", "abcd+", "abcd+ + c-",
                 "abcd+ + d-", "abcd+ + c- + d-", "c+", "d+"],
}
# the star display for a ⊂ b ⊂ 1̂, with a = 1 and b = 12
STAR_UN_SHOWN = ["T+", "T+ + 12-", "T+ + 1-", "12+", "12+ + 1-", "1+ + 12-", "1+"]


def _compare_universe_cone(G, N, shown):
    space = DoubledSpace(G)
    cone = universe_max_cone(G, N)
    got = set(extreme_generators(cone.gens.gens))
    want = {_vec(space, G, t) for t in shown}
    extra = sorted(space.ray_text(v) for v in want - got)
    missing = sorted(space.ray_text(v) for v in got - want)
    return got == want, len(got), extra, missing


def c05_universe_generators():
    L, G = load_fixture("bowtie")
    ok = True
    parts = []
    for k, (names, shown) in enumerate(BOWTIE_UN.items(), 1):
        N = _ids(L, names.split() + ["T"], G.top)
        same, n, _, _ = _compare_universe_cone(G, N, shown)
        ok &= same and n == len(shown)
        parts.append(f"N{k}: {n} gens {'match' if same else 'differ'}")
    L, G = load_fixture("star")
    N = _ids(L, ["1", "12", "T"], G.top)
    same, n, extra, missing = _compare_universe_cone(G, N, STAR_UN_SHOWN)
    ok &= same
    star = f"star U_N: {n} gens" + ("" if same else f", shown but not generators: {extra}")
    if missing:
        star += f", not shown: {missing}"
    return ok, "; ".join(parts + [star])


# Hasse diagram of the Boolean {1,2} universe fan, without the empty face
BOOL2_FACES = {
    "1-2": "{12+,1+-*}", "1-6": "{12+,2+-*}",
    "2-1": "{12+,1+-}", "2-2": "{12+,1+*}", "2-3": "{12+,1-*}",
    "2-5": "{12+,2-*}", "2-6": "{12+,2+*}", "2-7": "{12+,2+-}",
    "3-2": "{1+}", "3-3": "{12+,1-}", "3-4": "{12+}", "3-5": "{12+,2-}", "3-6": "{2+}",
}
BOOL2_EDGES = [
    ("1-2", "2-1"), ("1-2", "2-2"), ("1-2", "2-3"), ("1-6", "2-5"), ("1-6", "2-6"), ("1-6", "2-7"),
    ("2-1", "3-2"), ("2-1", "3-3"), ("2-2", "3-2"), ("2-2", "3-4"), ("2-3", "3-3"), ("2-3", "3-4"),
    ("2-5", "3-4"), ("2-5", "3-5"), ("2-6", "3-4"), ("2-6", "3-6"), ("2-7", "3-5"), ("2-7", "3-6"),
]
MARKINGS = [
    ("{123+,12+-*,1+-*}", None), ("{123+,12+-,1*-}", None), ("{12+,1-}", None),
    ("{123+,12+*,1*}", 1), ("{123-,12+-*,1+-*}", 2), ("{123+,12+*,1+}", 3),
]


def c06_face_lattice():
    L, G = load_fixture("bool2")
    fl = face_lattice(G)
    texts = [m.text(L) for m in fl.markings]
    norm = {k: parse_marking(G, t).text(L) for k, t in BOOL2_FACES.items()}
    want_nodes = set(norm.values())
    want_edges = {(norm[lo], norm[hi]) for hi, lo in BOOL2_EDGES}
    got_edges = {(texts[i], texts[j]) for i, j in fl.edges}
    dims = fl.count_by_dim()
    ok_faces = (len(fl) == 13 and dims == {1: 5, 2: 6, 3: 2}
                and set(texts) == want_nodes and got_edges == want_edges)
    L3, G3 = load_fixture("bool3-intervals")
    verdicts = []
    for text, want in MARKINGS:
        v = marking_violation(G3, parse_marking(G3, text))
        verdicts.append((v[0] if v else None) == want)
    ok = ok_faces and all(verdicts)
    return ok, f"{len(fl)} faces, by dim {dims}, Hasse edges match: {got_edges == want_edges}; markings {sum(verdicts)}/6 classified"


def c07_total_energy():
    names = ["star", "bowtie", "polygon-n3", "polygon-n4", "polygon-n5"]
    res = {n: check_total_energy_residue(load_fixture(n)[1]) for n in names}
    return all(res.values()), ", ".join(f"{k}: {v}" for k, v in res.items())


def c08_region_factorization():
    from .physics import factorization_demo
    counts = {}
    ok = True
    for name in ("star", "bowtie", "polygon-n4"):
        L, G = load_fixture(name)
        regs = enumerate_causal_regions(G)
        if not is_stable(L, G):
            counts[name] = "not stable"
            ok = False
            continue
        psi = wavefunction(G, check=False)
        good = sum(bool(check_region_factorization(G, R, check=False, psi=psi)) for R in regs)
        counts[name] = f"{good}/{len(regs)}"
        ok &= good == len(regs)
    demo = factorization_demo(4, "1234;12")
    psi_out = RatExpr([(1, [LinForm("Ep:1234"), LinForm("Ep:12"), LinForm("Ep:1234+Em:12")])])
    a_sh = RatExpr([(1, [LinForm("Ep:123+Em:12"), LinForm("Em:123-Em:12")]),
                    (1, [LinForm("Ep:34"), LinForm("Em:34")])])
    from .ratexpr import parse_canonical
    ex = (sorted(demo["G_in"]) == sorted(["1234", "123", "34"])
          and sorted(demo["G_out"]) == sorted(["1234", "12"])
          and equal(parse_canonical(demo["psi_out"]), psi_out)
          and equal(parse_canonical(demo["A_sh"]), a_sh) and demo["equal"])
    ok &= ex
    return ok, f"regions {counts}; R={{1̂;12}} in={demo['G_in']} out={demo['G_out']}: {ex}"


def c09_unimodularity():
    from .refine import tubing_triangulation
    names = ["star", "bowtie", "bool2", "bool3-intervals", "nonbuild-nestoid"] + \
        [f"polygon-n{n}" for n in range(3, 7)]
    bad = []
    simplices = 0
    for name in names:
        L, G = load_fixture(name)
        for N in enumerate_nested_sets(G, only_maximal=True):
            tt = tubing_triangulation(G, N)
            simplices += len(tt.rooted) + len(tt.forest)
            if tt.dets["rooted"] != {1} or tt.dets["forest"] != {1}:
                bad.append((name, G.ids(N)))
    return not bad, f"{simplices} simplices on {len(names)} fixtures" + (f", bad: {bad[:3]}" if bad else ", all |det| = 1")


def c10_triangulation_independence():
    from .refine import wavefunction_by_min_subdivision
    parts = []
    ok = True
    for name in ("star", "bowtie", "polygon-n4"):
        L, G = load_fixture(name)
        exact = True
        for N in enumerate_nested_sets(G, only_maximal=True):
            c = compare(wavefunction(G, check=False, nested=[N]), wavefunction_by_min_subdivision(G, [N]))
            exact &= c["exact"] is True
        ok &= exact
        parts.append(f"{name}: {'exact' if exact else 'NOT exact'}")
    return ok, "per maximal cone, " + ", ".join(parts)


def _same_terms(got, shown):
    norm = lambda terms: sorted(sorted(f.text() for f in t) for t in terms)
    return norm(got) == norm(shown)


def _forms(*specs):
    return [LinForm(s) for s in specs]


def c11_refinement_projections():
    from .refine import _select, pl_function_terms, project_refinement
    from .tubings import HasseTree
    L, G = load_fixture("bool3-intervals")
    shown = {
        ("1", "12", "123"): [_forms("a:3", "a:2-a:3", "a:1-a:2"), _forms("a:3", "a:2-a:3"),
                             _forms("a:2-a:3", "a:1-a:2")],
        ("1", "3", "123"): [_forms("a:2", "a:1-a:2", "a:3-a:2"), _forms("a:2", "a:1-a:2"),
                            _forms("a:2", "a:3-a:2")],
    }
    pl = []
    for names, terms in shown.items():
        N = _ids(L, names, G.top)
        got = pl_function_terms(G, N, _select(HasseTree(G, N), "graphical"))
        pl.append((names, _same_terms(got, terms), len(got), len(terms)))
    ok_pl = all(p[1] for p in pl)
    mn = project_refinement(G, "min")
    mx = project_refinement(G, "max")
    ok_poly = (len(mn.quotient.cones) == 5 and len(mn.quotient.rays) == 5
               and len(mx.quotient.cones) == 10 and len(mx.quotient.rays) == 10)
    counts = []
    ok_counts = True
    for name in ["star", "bowtie", "bool2", "bool3-intervals", "nonbuild-nestoid",
                 "polygon-n3", "polygon-n4", "polygon-n5"]:
        Lf, Gf = load_fixture(name)
        for mode in ("min", "max"):
            pr = mn if (name, mode) == ("bool3-intervals", "min") else \
                mx if (name, mode) == ("bool3-intervals", "max") else project_refinement(Gf, mode)
            good = pr.ok and pr.upstairs == len(pr.downstairs.cones)
            ok_counts &= good
            counts.append(f"{name}/{mode} {pr.upstairs}={len(pr.downstairs.cones)}")
    pl_txt = "; ".join(f"{{{','.join(n)}}} {'matches' if s else f'has {g} terms, shown {w}'}"
                       for n, s, g, w in pl)
    detail = (f"PL functions: {pl_txt}; quotient {len(mn.quotient.rays)}→{len(mx.quotient.rays)} rays, "
              f"{len(mn.quotient.cones)}→{len(mx.quotient.cones)} cones; counts ok: {ok_counts}")
    return ok_pl and ok_poly and ok_counts, detail


def c12_btrees():
    from .refine import BooleanBuildingSet, btrees, minmax_subdivision
    from .polyhedral import rank
    B = BooleanBuildingSet([1, 2, 3], [{1}, {2}, {3}, {1, 2}, {1, 2, 3}])
    trees = sorted(T.text() for T in btrees(B))
    want = sorted(["1(2,3)", "2(1,3)", "3(2(1))", "3(1(2))"])
    fmax, fmin = minmax_subdivision(B, "max"), minmax_subdivision(B, "min")
    t1 = fmax.labels.index("1(2,3)")
    cmax = set(fmax.cone_gens(t1))
    cmin = set(fmin.cone_gens(fmin.labels.index("1(2,3)")))
    ok_gens = (cmax == {(1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1)}
               and cmin == {(0, 1, 0), (0, 0, 1), (1, 1, 1)})
    simp = lambda fan: all(len(c) == rank(fan.cone_gens(i)) for i, c in enumerate(fan.cones))
    ok = trees == want and ok_gens and simp(fmin) and not simp(fmax)
    return ok, f"trees {trees}; C^T1/C_T1 generators match: {ok_gens}; min simplicial {simp(fmin)}, max simplicial {simp(fmax)}"


def c13_physics():
    from .physics import check_catalan, psi_n, russian_doll
    shown = RatExpr([
        (1, [LinForm("Ep:123"), LinForm("Ep:123+Em:12"), LinForm("Ep:12")]),
        (1, [LinForm("Ep:123"), LinForm("Ep:123+Em:23"), LinForm("Ep:23")]),
    ])
    psi4 = psi_n(3)
    ok4 = to_canonical(psi4) == to_canonical(shown)
    cat = {n: check_catalan(n) for n in range(3, 8)}
    ok_cat = all(a == b == c and same for a, b, c, same in cat.values())
    rd = {n: equal(russian_doll(n), psi_n(n)) for n in range(3, 6)}
    ok = ok4 and ok_cat and all(rd.values())
    return ok, (f"Ψ₄ matches: {ok4}; Catalan {[v[0] for v in cat.values()]}: {ok_cat}; "
                f"Russian doll = Ψ for n=3..5: {all(rd.values())}")


def c14_property_suite():
    parts = []
    ok = True
    for name in ALL_FIXTURES:
        L, G = load_fixture(name)
        good = upstream_lower_set_holds(L, G)[0]
        if len(G) <= ORACLE_CAP:
            good &= is_nestoid(L, G) == nestoid_oracle(L, G)
            good &= is_building_set(L, G) == building_oracle(L, G)
        good &= check_projection_injective(G, samples=1000, seed=0)
        ok &= good
        if not good:
            parts.append(name)
    return ok, "all fixtures" if ok else f"failures on {parts}"


CRITERIA = [
    (1, "Star amplitude", c01_star_amplitude, 1),
    (2, "Bowtie enumeration", c02_bowtie_enumeration, 1),
    (3, "Bowtie residues", c03_bowtie_residues, 5),
    (4, "Star wavefunction", c04_star_wavefunction, 5),
    (5, "Universe-fan generators", c05_universe_generators, 5),
    (6, "Face lattice and markings", c06_face_lattice, 1),
    (7, "Total-energy residue", c07_total_energy, 30),
    (8, "Region factorization", c08_region_factorization, 60),
    (9, "Unimodular tubing triangulation", c09_unimodularity, 60),
    (10, "Triangulation independence", c10_triangulation_independence, 60),
    (11, "Refinement projections", c11_refinement_projections, 30),
    (12, "B-trees", c12_btrees, 1),
    (13, "Polygon physics", c13_physics, 120),
    (14, "Property suite", c14_property_suite, None),
]


def run_one(number) -> Outcome:
    num, title, fn, budget = next(c for c in CRITERIA if c[0] == number)
    t = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a failure, reported with its type
        ok, detail = False, f"raised {type(e).__name__}: {e}"
    return Outcome(num, title, bool(ok), time.perf_counter() - t, budget, detail)


def run(numbers=None, jobs=1, echo=print):
    numbers = [c[0] for c in CRITERIA] if numbers is None else list(numbers)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(run_one, numbers))
    else:
        outcomes = [run_one(n) for n in numbers]
    outcomes.sort(key=lambda o: o.number)
    for o in outcomes:
        if echo:
            echo(o.line())
    return outcomes
