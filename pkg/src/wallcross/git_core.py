"""Toric GIT data: anticones, chambers, walls, box elements and the
wall-crossing constants.

Conventions: the lattice L is Z^r, characters D_j are integer vectors in the
dual Z^r and pairings are plain dot products.  Character indices are
0-based in code; reports print them 1-based.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg as la
from .errors import (BasisSearchFailed, CrepantWall, InputTooLarge, LabelingError,
                     NotFullDimensional, WallcrossError)

logger = logging.getLogger(__name__)

MAX_SUBSET_M = 20
MAX_BOX_SCAN = 10 ** 6


@dataclass(frozen=True)
class GITData:
    r: int
    D: tuple                      # m columns, each an r-tuple of Fractions
    omega_plus: tuple
    omega_minus: Optional[tuple] = None

    def __post_init__(self):
        D = tuple(la.fvec(col) for col in self.D)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "omega_plus", la.fvec(self.omega_plus))
        if self.omega_minus is not None:
            object.__setattr__(self, "omega_minus", la.fvec(self.omega_minus))
        if self.r < 1 or not D:
            raise WallcrossError("need r >= 1 and at least one character")
        for j, col in enumerate(D):
            if len(col) != self.r:
                raise WallcrossError(f"character D_{j + 1} has length {len(col)}, expected {self.r}")
            if all(x == 0 for x in col):
                raise WallcrossError(f"character D_{j + 1} is zero")
            if any(x.denominator != 1 for x in col):
                raise WallcrossError(f"character D_{j + 1} is not integral")
        if la.rank([list(c) for c in D]) != self.r:
            raise WallcrossError("the characters do not span L^v (rank < r)")
        for name in ("omega_plus", "omega_minus"):
            w = getattr(self, name)
            if w is None:
                continue
            if len(w) != self.r:
                raise WallcrossError(f"{name} has length {len(w)}, expected {self.r}")
            if not in_nonnegative_span(D, w):
                raise WallcrossError(f"{name} is not in the non-negative span of the characters")

    @property
    def m(self) -> int:
        return len(self.D)

    @property
    def rho_hat(self) -> tuple:
        return tuple(sum(col[i] for col in self.D) for i in range(self.r))

    def omega(self, side: str) -> tuple:
        w = self.omega_plus if side == "plus" else self.omega_minus
        if w is None:
            raise WallcrossError(f"no stability condition for side {side!r}")
        return w


def in_nonnegative_span(D, w) -> bool:
    A = [[col[i] for col in D] for i in range(len(w))]
    return la.feasible(A, w)


# ---------------------------------------------------------------------------
# anticones
# ---------------------------------------------------------------------------

def anticone_contains(D: Sequence, I: Sequence[int], omega: Sequence) -> bool:
    """omega in the strictly positive span of {D_i : i in I}.

    Exact LP: a_i >= 1, t >= 1 with sum a_i D_i = t omega (homogeneous
    reformulation of a_i > 0).
    """
    omega = la.fvec(omega)
    I = list(I)
    if not I:
        return all(x == 0 for x in omega)
    r = len(omega)
    A = [[D[i][row] for i in I] + [-omega[row]] for row in range(r)]
    return la.feasible(A, [0] * r, lower=[1] * (len(I) + 1))


@dataclass(frozen=True)
class AnticoneFamily:
    omega: tuple
    members: tuple               # canonical order: by size, then lexicographic

    def __contains__(self, I) -> bool:
        return tuple(sorted(I)) in self._set

    @property
    def _set(self):
        return frozenset(self.members)

    def minimal(self) -> tuple:
        mem = self.members
        return tuple(I for I in mem if not any(set(J) < set(I) for J in mem))

    def contains_subset_of(self, S) -> bool:
        """Some anticone is contained in S."""
        S = set(S)
        return any(set(I) <= S for I in self.members)


def compute_anticone_family(data: GITData, omega, max_m: int = MAX_SUBSET_M) -> AnticoneFamily:
    if data.m > max_m:
        raise InputTooLarge(f"m = {data.m} exceeds the subset-enumeration bound {max_m}")
    omega = la.fvec(omega)
    members = []
    for size in range(data.m + 1):
        for I in itertools.combinations(range(data.m), size):
            if anticone_contains(data.D, I, omega):
                members.append(I)
    return AnticoneFamily(omega, tuple(members))


# ---------------------------------------------------------------------------
# cones in H-description
# ---------------------------------------------------------------------------

def _normalize(v) -> Optional[tuple]:
    if all(x == 0 for x in v):
        return None
    return la.primitive(v)


def _prune(normals: list, dim: int) -> list:
    """Drop duplicates and inequalities implied by the others (exact LP)."""
    uniq = []
    for n in normals:
        n = _normalize(n)
        if n is not None and n not in uniq:
            uniq.append(n)
    kept = list(uniq)
    for n in list(uniq):
        others = [o for o in kept if o != n]
        # n redundant iff {others >= 0, n.x <= -1} infeasible
        k = len(others)
        A = [list(o) + [Fraction(-int(i == j)) for j in range(k + 1)] for i, o in enumerate(others)]
        A.append([-x for x in n] + [Fraction(-int(j == k)) for j in range(k + 1)])
        b = [0] * k + [1]
        if not la.feasible(A, b, lower=[0] * dim + [0] * (k + 1), free=[True] * dim + [False] * (k + 1)):
            kept = others
    return sorted(kept)


def cone_hrep(gens: Sequence, dim: int) -> list:
    """Normals n with cone(gens) = {x : n.x >= 0 for all n}.

    Fourier-Motzkin elimination of the coefficient variables a from
    x = sum a_i g_i, a >= 0.  Equalities come out as opposite pairs.
    """
    k = len(gens)
    nv = dim + k
    eqs = []
    for row in range(dim):
        v = [Fraction(0)] * nv
        v[row] = Fraction(1)
        for i, g in enumerate(gens):
            v[dim + i] = -la.frac(g[row])
        eqs.append(v)
    ineqs = []
    for i in range(k):
        v = [Fraction(0)] * nv
        v[dim + i] = Fraction(1)
        ineqs.append(v)
    for var in range(nv - 1, dim - 1, -1):
        piv = next((e for e in eqs if e[var] != 0), None)
        if piv is not None:
            eqs = [e for e in eqs if e is not piv]

            def sub(v, piv=piv, var=var):
                if v[var] == 0:
                    return v
                f = v[var] / piv[var]
                return [a - f * b for a, b in zip(v, piv)]
            eqs = [sub(e) for e in eqs]
            ineqs = [sub(e) for e in ineqs]
            continue
        pos = [v for v in ineqs if v[var] > 0]
        neg = [v for v in ineqs if v[var] < 0]
        zero = [v for v in ineqs if v[var] == 0]
        new = list(zero)
        for p in pos:
            for q in neg:
                new.append([p[var] * b - q[var] * a for a, b in zip(p, q)])
        new_t = []
        for v in new:
            v = _normalize(v)
            if v is not None and v not in new_t:
                new_t.append(v)
        ineqs = [list(v) for v in new_t]
    normals = [tuple(v[:dim]) for v in ineqs]
    for e in eqs:
        e = tuple(e[:dim])
        if any(x != 0 for x in e):
            normals.append(e)
            normals.append(tuple(-x for x in e))
    return _prune(normals, dim)


def in_closed_cone(normals, x) -> bool:
    return all(la.dot(n, x) >= 0 for n in normals)


def in_open_cone(normals, x) -> bool:
    return all(la.dot(n, x) > 0 for n in normals)


# ---------------------------------------------------------------------------
# chambers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChamberData:
    omega: tuple
    normals: tuple               # closure of C_omega = {x : n.x >= 0}
    full_dimensional: bool
    proper: bool
    extended_weak_fano: bool
    anticones: AnticoneFamily = field(repr=False, compare=False, default=None)

    def dual_rays(self) -> tuple:
        """Generators of the dual cone C^v (the inequality normals)."""
        return self.normals


def gale_dual(D: Sequence, r: int) -> list:
    """Columns b_j of a matrix whose rows span the relations among the D_j."""
    m = len(D)
    A = [[D[j][i] for j in range(m)] for i in range(r)]
    rel = la.nullspace(A, m)
    return [tuple(rv[j] for rv in rel) for j in range(m)]


def fan_is_complete(data: GITData, fam: AnticoneFamily) -> bool:
    """Every facet of a maximal quotient-fan cone lies in exactly two maximal cones."""
    m, r = data.m, data.r
    if m == r:
        return True
    b = gale_dual(data.D, r)
    maximal = []
    for I in fam.minimal():
        if len(I) != r:
            continue
        comp = tuple(j for j in range(m) if j not in I)
        if la.rank([list(b[j]) for j in comp]) == m - r:
            maximal.append(comp)
    if not maximal:
        return False
    count = {}
    for S in maximal:
        for j in S:
            F = tuple(x for x in S if x != j)
            count[F] = count.get(F, 0) + 1
    return all(v == 2 for v in count.values())


def compute_chamber(data: GITData, omega, strict: bool = True) -> ChamberData:
    omega = la.fvec(omega)
    fam = compute_anticone_family(data, omega)
    if not fam.members:
        raise WallcrossError("empty anticone family: omega outside the effective cone")
    normals = []
    for I in fam.minimal():
        normals.extend(cone_hrep([data.D[i] for i in I], data.r))
    normals = _prune(normals, data.r)
    full = la.strict_feasible_inequalities(normals, data.r)
    if strict and not full:
        raise NotFullDimensional(f"omega = {tuple(map(str, omega))} lies on a wall")
    proper = fan_is_complete(data, fam) if full else False
    if full and not proper:
        logger.warning("quotient for omega=%s is not proper; continuing", omega)
    ewf = in_closed_cone(normals, data.rho_hat)
    return ChamberData(omega, tuple(normals), full, proper, ewf, fam)


# ---------------------------------------------------------------------------
# box elements
# ---------------------------------------------------------------------------

def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass(frozen=True, order=True)
class BoxElement:
    f: tuple                     # canonical representative, entries in [0, 1)
    I_f: tuple = field(compare=False)
    age: Fraction = field(compare=False)

    @property
    def is_untwisted(self) -> bool:
        return all(x == 0 for x in self.f)


def canonical_box(data: GITData, fam: AnticoneFamily, f) -> BoxElement:
    f = tuple(_frac_part(la.frac(x)) for x in f)
    I_f = tuple(j for j in range(data.m) if la.dot(data.D[j], f).denominator == 1)
    age = sum((_frac_part(la.dot(data.D[j], f)) for j in range(data.m)), Fraction(0))
    return BoxElement(f, I_f, age)


def enumerate_boxes(data: GITData, omega, fam: AnticoneFamily | None = None,
                    max_scan: int = MAX_BOX_SCAN) -> list:
    fam = fam or compute_anticone_family(data, omega)
    delta = la.lcm_of_minors(data.D, data.r)
    if delta ** data.r > max_scan:
        raise InputTooLarge(f"box scan of size {delta}^{data.r} exceeds {max_scan}")
    out = []
    for v in itertools.product(range(delta), repeat=data.r):
        f = tuple(Fraction(x, delta) for x in v)
        box = canonical_box(data, fam, f)
        if box.I_f in fam:
            out.append(box)
    return sorted(set(out))


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

def integer_lattice_basis(vectors: Sequence[Sequence[int]], dim: int) -> list:
    """Basis (rows) of the Z-span of integer vectors, by integer row reduction."""
    rows = [list(map(int, v)) for v in vectors if any(v)]
    basis = []
    col = 0
    while rows and col < dim:
        rows = [rw for rw in rows if any(rw)]
        nz = [rw for rw in rows if rw[col] != 0]
        if not nz:
            col += 1
            continue
        while len([rw for rw in rows if rw[col] != 0]) > 1:
            nz = sorted((rw for rw in rows if rw[col] != 0), key=lambda rw: abs(rw[col]))
            piv = nz[0]
            new = [piv]
            for rw in rows:
                if rw is piv:
                    continue
                if rw[col] != 0:
                    q = rw[col] // piv[col]
                    rw = [a - q * b for a, b in zip(rw, piv)]
                new.append(rw)
            rows = [rw for rw in new if any(rw)]
        piv = next(rw for rw in rows if rw[col] != 0)
        basis.append(piv)
        rows = [rw for rw in rows if rw is not piv]
        col += 1
    return basis


@dataclass(frozen=True)
class RationalLattice:
    """Full-rank lattice in Q^r given by basis rows."""
    basis: tuple

    @classmethod
    def generated_by(cls, vectors: Sequence, r: int) -> "RationalLattice":
        vecs = [la.fvec(v) for v in vectors]
        den = math.lcm(1, *(x.denominator for v in vecs for x in v))
        ints = [[int(x * den) for x in v] for v in vecs]
        b = integer_lattice_basis(ints, r)
        return cls(tuple(tuple(Fraction(x, den) for x in row) for row in b))

    @property
    def covolume(self) -> Fraction:
        return abs(la.det([list(b) for b in self.basis]))

    def dual(self) -> "RationalLattice":
        inv = la.inverse([list(b) for b in self.basis])
        return RationalLattice(tuple(tuple(row) for row in la.transpose(inv)))

    def contains(self, v) -> bool:
        coeffs = la.solve(la.transpose([list(b) for b in self.basis]), la.fvec(v))
        return coeffs is not None and all(c.denominator == 1 for c in coeffs)


def ltilde(data: GITData, boxes: Sequence[BoxElement]) -> RationalLattice:
    gens = [tuple(Fraction(int(i == j)) for j in range(data.r)) for i in range(data.r)]
    gens += [b.f for b in boxes if not b.is_untwisted]
    return RationalLattice.generated_by(gens, data.r)


# ---------------------------------------------------------------------------
# wall crossing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WallCrossing:
    e: tuple
    wall_normal: tuple           # W = {x : e.x = 0}
    p_plus: tuple
    p_minus: tuple
    c: Fraction
    c_i: tuple
    discrepancy_sum: Fraction
    ltilde_plus: RationalLattice
    ltilde_minus: RationalLattice
    chamber_plus: ChamberData = field(repr=False)
    chamber_minus: ChamberData = field(repr=False)
    boxes_plus: tuple = field(repr=False)
    boxes_minus: tuple = field(repr=False)
    basis_source: str = "search"

    @property
    def r(self) -> int:
        return len(self.e)

    def p(self, side: str) -> tuple:
        return self.p_plus if side == "plus" else self.p_minus


def _wall_between(cp: ChamberData, cm: ChamberData, r: int) -> Optional[tuple]:
    for n in cp.normals:
        neg = tuple(-x for x in n)
        if neg not in cm.normals:
            continue
        W = la.nullspace([list(n)], r)
        others = [o for o in list(cp.normals) + list(cm.normals) if o not in (n, neg)]
        pulled = [tuple(la.dot(o, w) for w in W) for o in others]
        if la.strict_feasible_inequalities([p for p in pulled if any(p)], r - 1):
            return n
    return None


def _candidates(height: int, r: int):
    vecs = [tuple(Fraction(x) for x in v)
            for v in itertools.product(range(-height, height + 1), repeat=r) if any(v)]
    return sorted(vecs, key=lambda v: (max(abs(x) for x in v), sum(abs(x) for x in v),
                                       tuple(-x for x in v)))


def _check_bases(p_plus, p_minus, e, cp, cm, lp_dual, lm_dual, W_normal) -> list:
    problems = []
    r = len(e)
    for name, ps, ch, ld in (("plus", p_plus, cp, lp_dual), ("minus", p_minus, cm, lm_dual)):
        if len(ps) != r:
            problems.append(f"p_{name} must have {r} vectors")
            continue
        for i, p in enumerate(ps):
            if not in_closed_cone(ch.normals, p):
                problems.append(f"p_{i + 1}^{name} not in the closed chamber")
            if not ld.contains(p):
                problems.append(f"p_{i + 1}^{name} not in the dual lattice")
        if abs(la.det([list(p) for p in ps])) != ld.covolume:
            problems.append(f"p^{name} is not a basis of the dual lattice")
    for i in range(r - 1):
        if p_plus[i] != p_minus[i]:
            problems.append(f"p_{i + 1}^+ != p_{i + 1}^-")
        if la.dot(p_plus[i], e) != 0:
            problems.append(f"p_{i + 1} not on the wall")
        elif not (in_closed_cone(cp.normals, p_plus[i]) and in_closed_cone(cm.normals, p_plus[i])):
            problems.append(f"p_{i + 1} not in the wall closure")
    if r and la.dot(p_plus[-1], e) <= 0:
        problems.append("p_r^+ . e must be positive")
    if r and la.dot(p_minus[-1], e) >= 0:
        problems.append("p_r^- . e must be negative")
    return problems


def search_bases(e, cp, cm, lp_dual, lm_dual, height: int = 8):
    r = len(e)
    cands = _candidates(height, r)
    wall = [v for v in cands if la.dot(v, e) == 0 and in_closed_cone(cp.normals, v)
            and in_closed_cone(cm.normals, v) and lp_dual.contains(v) and lm_dual.contains(v)]
    plus_r = [v for v in cands if la.dot(v, e) > 0 and in_closed_cone(cp.normals, v) and lp_dual.contains(v)]
    minus_r = [v for v in cands if la.dot(v, e) < 0 and in_closed_cone(cm.normals, v) and lm_dual.contains(v)]
    for ws in itertools.combinations(wall, r - 1):
        if la.rank([list(w) for w in ws]) != r - 1 and r > 1:
            continue
        pp = next((v for v in plus_r
                   if abs(la.det([list(w) for w in ws] + [list(v)])) == lp_dual.covolume), None)
        pm = next((v for v in minus_r
                   if abs(la.det([list(w) for w in ws] + [list(v)])) == lm_dual.covolume), None)
        if pp is not None and pm is not None:
            return tuple(ws) + (pp,), tuple(ws) + (pm,)
    raise BasisSearchFailed(f"no admissible bases with coordinates bounded by {height}; "
                            "supply p_plus/p_minus explicitly")


def change_of_basis_constants(p_plus, p_minus, e):
    """c, (c_1..c_{r-1}) with p_r^+ = sum_i c_i p_i^- - c p_r^-."""
    r = len(e)
    M = la.transpose([list(p) for p in p_minus])
    coeffs = la.solve(M, p_plus[-1])
    c = -coeffs[-1]
    c_formula = -la.dot(p_plus[-1], e) / la.dot(p_minus[-1], e)
    if c != c_formula:
        raise WallcrossError("inconsistent change of basis: c mismatch")
    return c, tuple(coeffs[: r - 1])


def compute_wall_crossing(data: GITData, p_plus=None, p_minus=None, height: int = 8) -> WallCrossing:
    if data.omega_minus is None:
        raise WallcrossError("wall crossing needs both omega_plus and omega_minus")
    cp = compute_chamber(data, data.omega_plus)
    cm = compute_chamber(data, data.omega_minus)
    n = _wall_between(cp, cm, data.r)
    if n is None:
        raise WallcrossError("the two chambers do not share a codimension-one wall")
    e = la.primitive(n)
    s = sum((la.dot(Dj, e) for Dj in data.D), Fraction(0))
    if s == 0:
        raise CrepantWall("sum_j D_j . e = 0: the two sides are K-equivalent")
    if s < 0:
        e = tuple(-x for x in e)
        s = -s
    if la.dot(data.omega_plus, e) < 0:
        raise LabelingError("omega_plus . e < 0; swap omega_plus and omega_minus")
    bp = tuple(enumerate_boxes(data, data.omega_plus, cp.anticones))
    bm = tuple(enumerate_boxes(data, data.omega_minus, cm.anticones))
    lp, lm = ltilde(data, bp), ltilde(data, bm)
    lpd, lmd = lp.dual(), lm.dual()
    if p_plus is not None or p_minus is not None:
        if p_plus is None or p_minus is None:
            raise WallcrossError("supply both p_plus and p_minus")
        p_plus = tuple(la.fvec(p) for p in p_plus)
        p_minus = tuple(la.fvec(p) for p in p_minus)
        problems = _check_bases(p_plus, p_minus, e, cp, cm, lpd, lmd, n)
        if problems:
            raise BasisSearchFailed("user-supplied bases rejected: " + "; ".join(problems))
        source = "user"
    else:
        p_plus, p_minus = search_bases(e, cp, cm, lpd, lmd, height)
        source = f"search(height={height})"
    c, c_i = change_of_basis_constants(p_plus, p_minus, e)
    return WallCrossing(e=e, wall_normal=e, p_plus=p_plus, p_minus=p_minus, c=c, c_i=c_i,
                        discrepancy_sum=s, ltilde_plus=lp, ltilde_minus=lm,
                        chamber_plus=cp, chamber_minus=cm, boxes_plus=bp, boxes_minus=bm,
                        basis_source=source)
