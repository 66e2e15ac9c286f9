"""Exact linear algebra and a small polyhedral toolkit over the rationals.

Everything works on lists of Fractions or ints; dimensions here stay below
twenty, so plain Gaussian elimination is the right tool.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd

from .errors import NotSimplicial, TooLarge


def _frac_rows(rows):
    return [[Fraction(x) for x in r] for r in rows]


def _int_row(r):
    """Scale a rational row to a primitive integer row (same row space)."""
    den = 1
    for x in r:
        if isinstance(x, Fraction) and x.denominator != 1:
            den = den * x.denominator // gcd(den, x.denominator)
    v = [int(x * den) for x in r]
    g = 0
    for x in v:
        g = gcd(g, x)
    return [x // g for x in v] if g > 1 else v


def _eliminate(rows, full=True):
    """Fraction-free elimination on integer rows; returns (rows, pivots)."""
    M = [_int_row(r) for r in rows]
    if not M:
        return M, []
    ncol = len(M[0])
    piv = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        a = M[r][c]
        for i in range(r + 1 if not full else 0, len(M)):
            if i != r and M[i][c] != 0:
                b = M[i][c]
                row = [a * x - b * y for x, y in zip(M[i], M[r])]
                g = 0
                for x in row:
                    g = gcd(g, x)
                M[i] = [x // g for x in row] if g > 1 else row
        piv.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], piv


def row_echelon(rows):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    M, piv = _eliminate(rows, full=True)
    out = []
    for row, c in zip(M, piv):
        d = row[c]
        out.append([Fraction(x, d) for x in row])
    return out, piv


def rank(rows) -> int:
    return len(_eliminate(rows, full=False)[1]) if rows else 0


def nullspace(rows, ncol=None):
    """Basis of {x : rows · x = 0} (list of Fraction vectors)."""
    if not rows:
        n = ncol or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, piv = row_echelon(rows)
    n = len(rows[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, pc in enumerate(piv):
            v[pc] = -R[i][f]
        basis.append(v)
    return basis


def det(M) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination when integral."""
    n = len(M)
    if n == 0:
        return Fraction(1)
    if all(isinstance(x, int) for r in M for x in r):
        return Fraction(_bareiss(M))
    A = _frac_rows(M)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return d


def _bareiss(M):
    A = [list(r) for r in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            p = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if p is None:
                return 0
            A[k], A[p] = A[p], A[k]
            sign = -sign
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * A[n - 1][n - 1]


def solve(A, b):
    """Some solution x of A x = b, or None when inconsistent."""
    rows = [list(r) + [bb] for r, bb in zip(A, b)]
    R, piv = row_echelon(rows)
    n = len(A[0]) if A else 0
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for i, pc in enumerate(piv):
        x[pc] = R[i][n]
    return x


def lattice_index(gens) -> int:
    """Index of the lattice spanned by ``gens`` inside its saturation.

    Unimodular column operations bring the generator matrix (rows = gens) to
    a lower-triangular block; the product of the diagonal is the gcd of the
    maximal minors, which is the index.
    """
    A = [list(map(int, g)) for g in gens]
    k = len(A)
    if k == 0:
        return 1
    n = len(A[0])
    col = 0
    diag = []
    for r in range(k):
        # euclid on row r over columns col..n-1
        while True:
            nz = [c for c in range(col, n) if A[r][c] != 0]
            if not nz:
                raise NotSimplicial("generators are linearly dependent")
            c0 = min(nz, key=lambda c: abs(A[r][c]))
            if len(nz) == 1:
                break
            for c in nz:
                if c != c0:
                    q = A[r][c] // A[r][c0]
                    for i in range(k):
                        A[i][c] -= q * A[i][c0]
        if c0 != col:
            for i in range(k):
                A[i][c0], A[i][col] = A[i][col], A[i][c0]
        diag.append(abs(A[r][col]))
        col += 1
    out = 1
    for d in diag:
        out *= d
    return out


def primitive(v):
    """Scale a rational vector to the primitive integer vector on its ray."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints) if g else tuple(ints)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


# ---------------------------------------------------------------------------
# cones


class ConeZ:
    """A cone given by integer generators in Z^d, with optional labels."""

    def __init__(self, gens, dim_space=None, labels=None):
        self.gens = [tuple(int(x) for x in g) for g in gens]
        self.dim_space = dim_space if dim_space is not None else (len(self.gens[0]) if self.gens else 0)
        self.labels = list(labels) if labels is not None else None
        self._facets = None
        self._rank = None
        self._eqs = None

    def __len__(self):
        return len(self.gens)

    @property
    def dim(self):
        if self._rank is None:
            self._rank = rank(self.gens) if self.gens else 0
        return self._rank

    def _in_span(self, x):
        if self.dim == self.dim_space:
            return True
        if self._eqs is None:
            self._eqs = [_int_row(v) for v in nullspace(self.gens, self.dim_space)]
        return all(dot(e, x) == 0 for e in self._eqs)

    def is_simplicial(self):
        return self.dim == len(self.gens)

    def span_basis(self):
        R, _ = row_echelon(self.gens)
        return R

    def facets(self):
        """(normal, tight generator indices) for each facet, within the linear span."""
        if self._facets is None:
            self._facets = cone_facets(self.gens)
        return self._facets

    def contains(self, x):
        """Membership test using the facet description plus the span."""
        if not self.gens:
            return all(v == 0 for v in x)
        if not self._in_span(x):
            return False
        return all(dot(nv, x) >= 0 for nv, _ in self.facets())

    def relative_interior(self, x):
        if not self._in_span(x):
            return False
        return all(dot(nv, x) > 0 for nv, _ in self.facets())

    def faces(self):
        return cone_faces(self.gens, self.facets())

    def __repr__(self):
        return f"ConeZ({self.gens})"


def _span_coords(gens):
    """Coordinates of gens in a basis of their span: (coords, basis, pivots)."""
    R, piv = row_echelon(gens)
    coords = [[Fraction(g[p]) for p in piv] for g in gens]
    return coords, R, piv


def cone_facets(gens):
    """Facets of a pointed cone within the span of its generators.

    Incremental double description on the dual cone {y : y·g ≥ 0}: start from
    a simplicial cone on r independent generators and add the others one at a
    time, combining adjacent pairs of rays across each new hyperplane.
    Normals are primitive integer vectors in ambient coordinates, supported on
    the pivot columns of the span.  Returns [(normal, tight generator indices)].
    """
    gens = [list(g) for g in gens]
    if not gens:
        return []
    r = rank(gens)
    if r == 0:
        return []
    if r == 1 or len(gens) == r:
        return cone_facets_bruteforce(gens)
    _, _, piv = _span_coords(gens)
    A = [_int_row([g[p] for p in piv]) for g in gens]
    order = _independent_rows(A, r)
    rest = [i for i in range(len(A)) if i not in order]
    # initial rays: columns of the inverse of the basis block (up to positive scaling)
    basis = [A[i] for i in order]
    rays = []
    for j in range(r):
        others = [basis[k] for k in range(r) if k != j]
        y = _int_row(nullspace(others, r)[0])
        if dot(basis[j], y) < 0:
            y = [-x for x in y]
        rays.append(y)
    seen_rows = list(order)
    for i in rest:
        a = A[i]
        vals = [dot(a, y) for y in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zero = [k for k, v in enumerate(vals) if v == 0]
        zsets = [frozenset(t for t in seen_rows if dot(A[t], y) == 0) for y in rays]
        new = [rays[k] for k in pos + zero]
        for p in pos:
            for n in neg:
                common = zsets[p] & zsets[n]
                if len(common) < r - 2:
                    continue
                if any(k != p and k != n and common <= zsets[k] for k in range(len(rays))):
                    continue
                y = [vals[p] * yn - vals[n] * yp for yp, yn in zip(rays[p], rays[n])]
                new.append(_int_row(y))
        rays = new
        seen_rows.append(i)
    out = {}
    for y in rays:
        tight = frozenset(k for k, g in enumerate(A) if dot(g, y) == 0)
        amb = [0] * len(gens[0])
        for k, p in enumerate(piv):
            amb[p] = y[k]
        out[tight] = tuple(_int_row(amb))
    return sorted(((v, t) for t, v in out.items()), key=lambda x: sorted(x[1]))


def _independent_rows(A, r):
    chosen = []
    for i, row in enumerate(A):
        if rank([A[j] for j in chosen] + [row]) > len(chosen):
            chosen.append(i)
            if len(chosen) == r:
                break
    return chosen


def cone_facets_bruteforce(gens):
    """Oracle for :func:`cone_facets`.

    Brute force over (r-1)-subsets: each independent subset gives a candidate
    normal; keep those with all generators on one side and a tight set of
    rank r-1.  Normals are returned in ambient coordinates, vanishing on the
    orthogonal complement of the span.
    """
    gens = [list(g) for g in gens]
    if not gens:
        return []
    r = rank(gens)
    if r == 0:
        return []
    coords, _, piv = _span_coords(gens)
    if r == 1:
        # a ray: the origin is the only facet
        nv = [Fraction(0)] * len(gens[0])
        w = coords[0]
        nv[piv[0]] = Fraction(1) if w[0] > 0 else Fraction(-1)
        return [(tuple(nv), frozenset())]
    if len(gens) > 40:
        raise TooLarge("facet enumeration is capped at 40 generators")
    seen = {}
    for sub in combinations(range(len(gens)), r - 1):
        M = [coords[i] for i in sub]
        if rank(M) != r - 1:
            continue
        ns = nullspace(M)
        if len(ns) != 1:
            continue
        nvec = ns[0]
        vals = [dot(nvec, c) for c in coords]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            nvec = [-x for x in nvec]
            vals = [-v for v in vals]
        else:
            continue
        tight = frozenset(i for i, v in enumerate(vals) if v == 0)
        if tight in seen or len(tight) == len(gens):
            continue
        if rank([coords[i] for i in tight]) != r - 1:
            continue
        amb = [0] * len(gens[0])
        for k, p in enumerate(piv):
            amb[p] = nvec[k]
        seen[tight] = tuple(_int_row(amb))
    return sorted(((v, t) for t, v in seen.items()), key=lambda x: sorted(x[1]))


def cone_faces(gens, facets=None):
    """All nonempty faces as frozensets of generator indices (including the cone)."""
    facets = facets if facets is not None else cone_facets(gens)
    full = frozenset(range(len(gens)))
    faces = {full}
    frontier = [full]
    tights = [t for _, t in facets]
    while frontier:
        nxt = []
        for F in frontier:
            for t in tights:
                G = F & t
                if G not in faces:
                    faces.add(G)
                    nxt.append(G)
        frontier = nxt
    return faces


def extreme_rays_h(ineqs, eqs, d):
    """Extreme rays of {x : ineqs·x ≥ 0, eqs·x = 0} in Q^d, by brute force.

    The cone is assumed pointed.  Each ray is the 1-dimensional solution of
    d-1 independent tight constraints (all equalities plus some inequalities).
    """
    rows_eq = [list(e) for e in eqs]
    r_eq = rank(rows_eq) if rows_eq else 0
    need = d - 1 - r_eq
    rays = set()
    for sub in combinations(range(len(ineqs)), max(need, 0)):
        rows = rows_eq + [list(ineqs[i]) for i in sub]
        if rank(rows) != d - 1:
            continue
        ns = nullspace(rows, d)
        if len(ns) != 1:
            continue
        v = ns[0]
        for cand in (v, [-x for x in v]):
            if all(dot(a, cand) >= 0 for a in ineqs):
                rays.add(primitive(cand))
                break
    return sorted(rays)


def pulling_triangulation(gens, facets=None):
    """Simplices (tuples of generator indices) of a pulling triangulation.

    Pull the first generator, then recurse on every facet not containing it.
    The simplices cover the cone and meet face-to-face.
    """
    gens = [tuple(g) for g in gens]
    idx = list(range(len(gens)))
    return sorted(_pull(gens, idx, facets))


def _pull(gens, idx, facets=None):
    sub = [gens[i] for i in idx]
    r = rank(sub)
    if r == len(idx):
        return [tuple(idx)]
    facets = facets if facets is not None else cone_facets(sub)
    v = 0
    out = []
    for _, tight in facets:
        if v in tight:
            continue
        face = [idx[i] for i in sorted(tight)]
        for simp in _pull(gens, face):
            out.append(tuple(sorted((idx[v],) + simp)))
    return out


# ---------------------------------------------------------------------------
# exact LP feasibility (phase one of the simplex method, Bland's rule)


def lp_feasible(A_ge, b_ge, A_eq=(), b_eq=(), n=None):
    """A point x (free variables) with A_ge·x ≥ b_ge and A_eq·x = b_eq, or None."""
    A_ge = [list(map(Fraction, r)) for r in A_ge]
    A_eq = [list(map(Fraction, r)) for r in A_eq]
    n = n if n is not None else len((A_ge or A_eq)[0])
    rows, rhs = [], []
    m_ge = len(A_ge)
    # variables: x⁺ (n), x⁻ (n), surplus (m_ge)
    for i, r in enumerate(A_ge):
        s = [Fraction(0)] * m_ge
        s[i] = Fraction(-1)
        rows.append(r + [-x for x in r] + s)
        rhs.append(Fraction(b_ge[i]))
    for r, b in zip(A_eq, b_eq):
        rows.append(r + [-x for x in r] + [Fraction(0)] * m_ge)
        rhs.append(Fraction(b))
    if not rows:
        return [Fraction(0)] * n
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
    nv = len(rows[0])
    m = len(rows)
    # tableau with artificials nv..nv+m-1
    T = [rows[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [nv + i for i in range(m)]
    total = nv + m
    # objective: minimise the sum of artificials -> reduced costs
    obj = [Fraction(0)] * (total + 1)
    for i in range(m):
        for j in range(total + 1):
            obj[j] -= T[i][j]
    for j in range(nv, total):
        obj[j] += 1
    for _ in range(10000):
        enter = next((j for j in range(total) if obj[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return None  # unbounded phase one cannot happen; treat as infeasible
        piv = T[leave][enter]
        T[leave] = [x / piv for x in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], T[leave])]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [a - f * b for a, b in zip(obj, T[leave])]
        basis[leave] = enter
    if -obj[-1] != 0:
        return None
    sol = [Fraction(0)] * total
    for i, bvar in enumerate(basis):
        sol[bvar] = T[i][-1]
    return [sol[j] - sol[n + j] for j in range(n)]


def cones_meet_properly(A, B):
    """True when cone(A) ∩ cone(B) = cone(A ∩ B) is a common face.

    Searches for a separating functional h with h = 0 on the shared
    generators, h ≥ 1 on the rest of A and h ≤ -1 on the rest of B.
    """
    A = [tuple(a) for a in A]
    B = [tuple(b) for b in B]
    shared = set(A) & set(B)
    ge, bge, eq, beq = [], [], [], []
    for a in A:
        if a in shared:
            eq.append(list(a))
            beq.append(0)
        else:
            ge.append(list(a))
            bge.append(1)
    for b in B:
        if b not in shared:
            ge.append([-x for x in b])
            bge.append(1)
    n = len((A or B)[0])
    if not ge:
        return True
    return lp_feasible(ge, bge, eq, beq, n=n) is not None


def extreme_generators(gens):
    """Primitive generators that are not in the cone of the others (the cone is assumed pointed)."""
    prim = sorted({primitive(g) for g in gens if any(g)})
    out = []
    for i, g in enumerate(prim):
        rest = prim[:i] + prim[i + 1:]
        if not rest or not ConeZ(rest, dim_space=len(g)).contains(g):
            out.append(g)
    return out
