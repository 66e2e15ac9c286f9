"""Linear forms and sums of reciprocal products of linear forms, over Q.

Variables are plain strings of the form ``kind:id`` with kind one of
``s``, ``Ep``, ``Em``, ``a``, ``E``.  A :class:`RatExpr` is a finite sum
``Σ c / (L_1 ⋯ L_k)`` with pairwise distinct normalized factors per term.
"""
from __future__ import annotations

import json
import os
import math
import random
import re
from fractions import Fraction

from .errors import (DegeneratePoint, DoublePole, NotSimplicial, NotUnimodular,
                     ParseError, ZeroDenominator)
from .polyhedral import lattice_index, rank

KINDS = ("s", "Ep", "Em", "a", "E")
DEFAULT_SEED = 20240917
EXACT_FACTOR_LIMIT = 160
MONOMIAL_BUDGET = 400_000


def var(kind, elem):
    if kind not in KINDS:
        raise ParseError(f"unknown variable kind {kind!r}")
    return f"{kind}:{elem}"


def var_kind(name):
    return name.split(":", 1)[0]


def var_elem(name):
    return name.split(":", 1)[1]


def seed_from_env(default=DEFAULT_SEED):
    raw = os.environ.get("UNIVERSEFAN_SEED")
    if raw is None or raw.strip() == "":
        return default
    return int(raw) & ((1 << 64) - 1)


def _fmt_q(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------


class LinForm:
    """An exact linear form ``Σ c_v · v``; immutable and hashable."""

    __slots__ = ("terms", "_hash")

    def __init__(self, coeffs=None):
        if isinstance(coeffs, str):
            coeffs = {coeffs: 1}
        items = {}
        for k, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                items[k] = items.get(k, Fraction(0)) + c
        self.terms = tuple(sorted((k, c) for k, c in items.items() if c))
        self._hash = hash(self.terms)

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = hash(terms)
        return obj

    @property
    def coeffs(self):
        return dict(self.terms)

    def variables(self):
        return [k for k, _ in self.terms]

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, LinForm) and self.terms == other.terms

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.terms < other.terms

    def __add__(self, other):
        if isinstance(other, str):
            other = LinForm(other)
        d = dict(self.terms)
        for k, c in other.terms:
            d[k] = d.get(k, 0) + c
        return LinForm(d)

    __radd__ = __add__

    def __neg__(self):
        return LinForm._raw(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other):
        if isinstance(other, str):
            other = LinForm(other)
        return self + (-other)

    def scale(self, q):
        q = Fraction(q)
        if q == 0:
            return LinForm()
        return LinForm._raw(tuple((k, c * q) for k, c in self.terms))

    def evaluate(self, point):
        return sum((c * point[k] for k, c in self.terms), Fraction(0))

    def substitute(self, mapping):
        out = {}
        for k, c in self.terms:
            img = mapping.get(k)
            if img is None:
                out[k] = out.get(k, 0) + c
                continue
            if isinstance(img, str):
                img = LinForm(img)
            for k2, c2 in img.terms:
                out[k2] = out.get(k2, 0) + c * c2
        return LinForm(out)

    def normalize(self):
        """(scalar, form) with self = scalar · form and the smallest variable's coefficient 1."""
        if not self.terms:
            raise ZeroDenominator("zero linear form")
        c0 = self.terms[0][1]
        if c0 == 1:
            return Fraction(1), self
        return c0, LinForm._raw(tuple((k, c / c0) for k, c in self.terms))

    def text(self):
        parts = []
        for i, (k, c) in enumerate(self.terms):
            sign = "-" if c < 0 else ("+" if i else "")
            a = abs(c)
            body = k if a == 1 else f"{_fmt_q(a)}·{k}"
            parts.append(sign + body)
        return "".join(parts) if parts else "0"

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"LinForm({self.text()!r})"

    def to_json(self):
        return {k: _fmt_q(c) for k, c in self.terms}

    @classmethod
    def from_json(cls, d):
        return cls({k: Fraction(v) for k, v in d.items()})


def lin(*names, **kw):
    """Shorthand: lin('Ep:1', 'Em:2') = Ep:1 + Em:2."""
    d = {}
    for n in names:
        d[n] = d.get(n, 0) + 1
    for k, v in kw.items():
        d[k] = d.get(k, 0) + v
    return LinForm(d)


# ---------------------------------------------------------------------------


def _canon_term(coef, factors):
    """Normalize factors, fold scalars into coef, sort; raise on double poles."""
    coef = Fraction(coef)
    out = []
    for f in factors:
        if isinstance(f, str):
            f = LinForm(f)
        if f.is_zero():
            raise ZeroDenominator("a denominator factor vanished")
        c, nf = f.normalize()
        coef /= c
        out.append(nf)
    out.sort()
    for x, y in zip(out, out[1:]):
        if x == y:
            raise DoublePole(f"factor {x.text()} appears twice in one term")
    return coef, tuple(out)


class RatExpr:
    """Σ coef / Π factors, stored as a dict from sorted factor tuples to coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        acc = {}
        for coef, factors in terms:
            c, fs = _canon_term(coef, factors)
            if c:
                acc[fs] = acc.get(fs, Fraction(0)) + c
        self._terms = {k: v for k, v in acc.items() if v}

    @classmethod
    def _from_dict(cls, d):
        obj = cls.__new__(cls)
        obj._terms = {k: v for k, v in d.items() if v}
        return obj

    @classmethod
    def zero(cls):
        return cls._from_dict({})

    @classmethod
    def one(cls):
        return cls._from_dict({(): Fraction(1)})

    @classmethod
    def monomial(cls, factors, coef=1):
        return cls([(coef, factors)])

    @property
    def terms(self):
        return sorted(((c, fs) for fs, c in self._terms.items()), key=lambda t: t[1])

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def factor_count(self):
        return sum(len(fs) for fs in self._terms)

    def variables(self):
        vs = set()
        for fs in self._terms:
            for f in fs:
                vs.update(f.variables())
        return sorted(vs)

    def __eq__(self, other):
        """Structural equality of canonical forms (use :func:`equal` for identities)."""
        return isinstance(other, RatExpr) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other):
        d = dict(self._terms)
        for fs, c in other._terms.items():
            d[fs] = d.get(fs, 0) + c
        return RatExpr._from_dict(d)

    def __neg__(self):
        return RatExpr._from_dict({fs: -c for fs, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, q):
        q = Fraction(q)
        return RatExpr._from_dict({fs: c * q for fs, c in self._terms.items()})

    def __mul__(self, other):
        return multiply(self, other)

    def text(self):
        return to_canonical(self)

    def __str__(self):
        return to_canonical(self)

    def __repr__(self):
        s = to_canonical(self)
        return f"RatExpr({s if len(s) < 120 else s[:117] + '...'})"


def sum_exprs(exprs):
    d = {}
    for e in exprs:
        for fs, c in e._terms.items():
            d[fs] = d.get(fs, 0) + c
    return RatExpr._from_dict(d)


def multiply(a: RatExpr, b: RatExpr) -> RatExpr:
    d = {}
    for fa, ca in a._terms.items():
        for fb, cb in b._terms.items():
            merged = tuple(sorted(fa + fb))
            for x, y in zip(merged, merged[1:]):
                if x == y:
                    raise DoublePole(f"product creates the double pole {x.text()}")
            d[merged] = d.get(merged, 0) + ca * cb
    return RatExpr._from_dict(d)


# ---------------------------------------------------------------------------
# canonical text


def _factor_text(f):
    if len(f.terms) == 1 and f.terms[0][1] == 1:
        return f.terms[0][0]
    return "(" + f.text() + ")"


def to_canonical(e: RatExpr) -> str:
    if e.is_zero():
        return "0"
    out = []
    for c, fs in e.terms:
        if not fs:
            out.append(_fmt_q(c))
        else:
            out.append(_fmt_q(c) + "/(" + "*".join(_factor_text(f) for f in fs) + ")")
    return " + ".join(out)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>(?:Ep|Em|s|a|E):[^\s*+()·/\-,]+)|(?P<op>[-+*/()·]))")


def _tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group("num"):
            out.append(("num", int(m.group("num"))))
        elif m.group("var"):
            out.append(("var", m.group("var")))
        else:
            out.append(("op", m.group("op")))
    return out


class _Parser:
    def __init__(self, toks):
        self.t = toks
        self.i = 0

    def peek(self, k=0):
        return self.t[self.i + k] if self.i + k < len(self.t) else (None, None)

    def take(self, kind=None, val=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (val and tok[1] != val):
            raise ParseError(f"expected {val or kind}, got {tok[1]!r}")
        self.i += 1
        return tok

    def at(self, val):
        return self.peek() == ("op", val)

    def number(self):
        n = Fraction(self.take("num")[1])
        # a/b unless followed by '(' (then it is the term's denominator)
        if self.at("/") and self.peek(1)[0] == "num":
            self.take()
            n /= self.take("num")[1]
        return n

    def expr(self):
        terms = []
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        elif self.at("+"):
            self.take()
        terms.append(self.term(sign))
        while self.at("+") or self.at("-"):
            sign = 1 if self.take()[1] == "+" else -1
            if self.at("-"):
                self.take()
                sign = -sign
            terms.append(self.term(sign))
        if self.peek()[0] is not None:
            raise ParseError(f"trailing input {self.peek()[1]!r}")
        return terms

    def term(self, sign):
        c = self.number() * sign
        factors = []
        if self.at("/"):
            self.take()
            self.take("op", "(")
            factors.append(self.factor())
            while self.at("*"):
                self.take()
                factors.append(self.factor())
            self.take("op", ")")
        return c, factors

    def factor(self):
        if self.at("("):
            self.take()
            f = self.linsum()
            self.take("op", ")")
            return f
        return self.linsum(single=True)

    def monomial(self):
        if self.peek()[0] == "num":
            c = self.number()
            self.take("op", "·")
        else:
            c = Fraction(1)
        return c, self.take("var")[1]

    def linsum(self, single=False):
        d = {}
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        c, v = self.monomial()
        d[v] = d.get(v, 0) + sign * c
        if not single:
            while self.at("+") or self.at("-"):
                sign = 1 if self.take()[1] == "+" else -1
                c, v = self.monomial()
                d[v] = d.get(v, 0) + sign * c
        return LinForm(d)


def parse_linform(text: str) -> LinForm:
    """'Ep:123+Em:12' or '2·a:1-a:3' as a LinForm."""
    p = _Parser(_tokenize(text.strip()))
    f = p.linsum()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input {p.peek()[1]!r}")
    return f


def parse_canonical(text: str) -> RatExpr:
    text = text.strip()
    if text == "0":
        return RatExpr.zero()
    return RatExpr(_Parser(_tokenize(text)).expr())


def to_json(e: RatExpr):
    return {"terms": [{"coef": _fmt_q(c), "denom": [f.to_json() for f in fs]} for c, fs in e.terms]}


def from_json(d) -> RatExpr:
    if isinstance(d, str):
        d = json.loads(d)
    return RatExpr([(Fraction(t["coef"]), [LinForm.from_json(f) for f in t["denom"]])
                    for t in d["terms"]])


# ---------------------------------------------------------------------------
# Laplace transforms


def laplace_simplicial(gens, dual_vars, coef=1) -> RatExpr:
    """1 / Π ⟨g, y⟩ for a unimodular simplicial cone; ``dual_vars[i]`` pairs with coordinate i."""
    gens = [list(g) for g in getattr(gens, "gens", gens)]
    if not gens:
        return RatExpr.one().scale(coef)
    if rank(gens) != len(gens):
        raise NotSimplicial(f"{len(gens)} generators of rank {rank(gens)}")
    idx = lattice_index(gens)
    if idx != 1:
        raise NotUnimodular(idx)
    factors = []
    for g in gens:
        factors.append(LinForm({dual_vars[i]: x for i, x in enumerate(g) if x}))
    return RatExpr([(coef, factors)])


def laplace_fan(cones, dual_vars) -> RatExpr:
    return sum_exprs(laplace_simplicial(c, dual_vars) for c in cones)


# ---------------------------------------------------------------------------
# residues and substitutions


def residue_at(e: RatExpr, pole: LinForm) -> RatExpr:
    """Syntactic residue at a simple pole; terms without the pole contribute 0.

    For a pole q = c·P with P normalized: Res_{q=0} k/(P·rest) = k·c/rest.
    """
    if isinstance(pole, str):
        pole = LinForm(pole)
    c, P = pole.normalize()
    d = {}
    for fs, k in e._terms.items():
        if P in fs:
            rest = tuple(f for f in fs if f != P)
            d[rest] = d.get(rest, 0) + k * c
    return RatExpr._from_dict(d)


def substitute(e: RatExpr, mapping) -> RatExpr:
    mapping = {k: (LinForm(v) if isinstance(v, str) else v) for k, v in mapping.items()}
    out = []
    for fs, k in e._terms.items():
        new = []
        for f in fs:
            g = f.substitute(mapping)
            if g.is_zero():
                raise ZeroDenominator(f"{f.text()} becomes zero under substitution")
            new.append(g)
        out.append((k, new))
    return RatExpr(out)


def divide_out(e: RatExpr, form: LinForm) -> RatExpr:
    """Cancel one factor ``form`` from every term (each term must contain it)."""
    c, P = form.normalize()
    d = {}
    for fs, k in e._terms.items():
        if P not in fs:
            raise ValueError(f"term lacks the factor {P.text()}")
        rest = tuple(f for f in fs if f != P)
        d[rest] = d.get(rest, 0) + k * c
    return RatExpr._from_dict(d)


def evaluate(e: RatExpr, point) -> Fraction:
    cache = {}
    total = Fraction(0)
    for fs, k in e._terms.items():
        den = Fraction(1)
        for f in fs:
            v = cache.get(f)
            if v is None:
                v = f.evaluate(point)
                cache[f] = v
            if v == 0:
                raise ZeroDivisionError(f.text())
            den *= v
        total += k / den
    return total


# ---------------------------------------------------------------------------
# equality testing


def _solve_hyperplanes(forms):
    """Express pivot variables through free ones: {pivot: LinForm}."""
    piv = {}
    for h in forms:
        if isinstance(h, str):
            h = LinForm(h)
        h = h.substitute(piv)
        if h.is_zero():
            continue
        v, c = h.terms[-1]
        expr = LinForm({k: -x / c for k, x in h.terms if k != v})
        piv = {k: f.substitute({v: expr}) for k, f in piv.items()}
        piv[v] = expr
    return piv


def _random_q(rng):
    return Fraction(rng.randint(-10 ** 4, 10 ** 4), rng.randint(1, 10 ** 4))


def sample_points(variables, hyperplanes, rng, forms=(), count=8, max_reject=100):
    """Random rational points on the hyperplanes avoiding the zero sets of ``forms``."""
    piv = _solve_hyperplanes(hyperplanes)
    free = sorted(set(variables) - set(piv) | {k for f in piv.values() for k in f.variables()})
    pts = []
    rej = 0
    while len(pts) < count:
        p = {v: _random_q(rng) for v in free}
        for k, f in piv.items():
            p[k] = f.evaluate(p)
        for v in variables:
            p.setdefault(v, _random_q(rng))
        if any(f.evaluate(p) == 0 for f in forms):
            rej += 1
            if rej >= max_reject:
                raise DegeneratePoint("100 consecutive samples hit a pole")
            continue
        rej = 0
        pts.append(p)
    return pts


def _all_forms(*exprs):
    s = set()
    for e in exprs:
        for fs in e._terms:
            s.update(fs)
    return sorted(s)


class _Budget(Exception):
    pass


def _poly_mul_lin(poly, lin_items, budget):
    # monomials are packed ints: exponent of variable i sits at bit offset 9 i
    out = {}
    get = out.get
    for mono, c in poly.items():
        for shift, a in lin_items:
            m = mono + shift
            out[m] = get(m, 0) + c * a
    out = {m: c for m, c in out.items() if c}
    if len(out) > budget:
        raise _Budget
    return out


def exact_difference_is_zero(lhs, rhs, hyperplanes=(), budget=MONOMIAL_BUDGET):
    """Common-denominator comparison on the hyperplane intersection.

    Returns True/False, or None when the expansion exceeds the budget or a
    factor vanishes identically on the hyperplanes.
    """
    piv = _solve_hyperplanes(hyperplanes)
    restricted = []  # (signed coef, [normalized forms])
    for sign, e in ((1, lhs), (-1, rhs)):
        for fs, k in e._terms.items():
            c = Fraction(k * sign)
            forms = []
            for f in fs:
                g = f.substitute(piv)
                if g.is_zero():
                    return None
                s, ng = g.normalize()
                c /= s
                forms.append(ng)
            restricted.append((c, forms))
    # lcm multiplicities
    mult = {}
    for _, forms in restricted:
        local = {}
        for f in forms:
            local[f] = local.get(f, 0) + 1
        for f, m in local.items():
            mult[f] = max(mult.get(f, 0), m)
    varlist = sorted({v for f in mult for v in f.variables()})
    vidx = {v: i for i, v in enumerate(varlist)}
    # integer multiples of each form keep the expansion in integers;
    # 1/f = d/(d f) so each missing factor contributes d to the coefficient
    scale = {f: math.lcm(*(Fraction(a).denominator for _, a in f.terms)) for f in mult}
    lin_items = {f: [(1 << (9 * vidx[v]), int(a * scale[f])) for v, a in f.terms] for f in mult}
    zero = 0
    coefs = []
    for c, forms in restricted:
        local = {}
        for f in forms:
            local[f] = local.get(f, 0) + 1
        for f, m in local.items():
            c *= Fraction(scale[f]) ** m
        coefs.append((c, local))
    den = math.lcm(*(c.denominator for c, _ in coefs)) if coefs else 1
    total = {}
    try:
        for c, local in coefs:
            c = int(c * den)
            poly = {zero: 1}
            # multiply wide forms last so single-variable ones stay cheap shifts
            need = sorted(((f, mult[f] - local.get(f, 0)) for f in mult),
                          key=lambda t: len(t[0].terms))
            for f, k in need:
                for _ in range(k):
                    poly = _poly_mul_lin(poly, lin_items[f], budget)
            for m, a in poly.items():
                total[m] = total.get(m, 0) + c * a
            if len(total) > 4 * budget:
                raise _Budget
    except _Budget:
        return None
    return all(v == 0 for v in total.values())


def compare(lhs: RatExpr, rhs: RatExpr, on_hyperplanes=(), trials=8, seed=None):
    """Detailed equality verdict: dict(sampled=..., exact=..., equal=...)."""
    seed = seed_from_env() if seed is None else seed
    rng = random.Random(seed)
    hyper = [LinForm(h) if isinstance(h, str) else h for h in on_hyperplanes]
    variables = sorted(set(lhs.variables()) | set(rhs.variables())
                       | {v for h in hyper for v in h.variables()})
    piv = _solve_hyperplanes(hyper)
    forms = _all_forms(lhs, rhs)
    # forms that vanish identically on the hyperplanes make the comparison undefined
    restricted = [f.substitute(piv) for f in forms]
    if any(g.is_zero() for g in restricted):
        raise DegeneratePoint("a denominator vanishes identically on the hyperplanes")
    sampled = True
    for p in sample_points(variables, hyper, rng, forms, count=trials):
        if evaluate(lhs, p) != evaluate(rhs, p):
            sampled = False
            break
    exact = None
    if lhs.factor_count() + rhs.factor_count() <= EXACT_FACTOR_LIMIT:
        exact = exact_difference_is_zero(lhs, rhs, hyper)
    verdict = exact if exact is not None else sampled
    return {"sampled": sampled, "exact": exact, "equal": verdict}


def equal(lhs: RatExpr, rhs: RatExpr, on_hyperplanes=(), trials=8, seed=None) -> bool:
    return compare(lhs, rhs, on_hyperplanes, trials, seed)["equal"]
