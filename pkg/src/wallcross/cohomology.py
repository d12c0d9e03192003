"""Sector cohomology rings and Chen-Ruan classes.

Each sector X^f is presented as its own toric quotient built from the
characters {D_j : j in I_f}.  Since those characters span L^v, every u_j is a
linear form in r auxiliary variables x_1..x_r, namely u_j = sum_k D_j[k] x_k
(x_k is theta of the k-th standard basis vector).  The ring is then
Q[x_1..x_r] / (Stanley-Reisner products of these linear forms), and its
normal forms are found degree by degree with exact linear algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg as la
from .errors import SectorNotInFan, SpanFailure, WallcrossError
from .git_core import AnticoneFamily, BoxElement, GITData, canonical_box, compute_anticone_family, enumerate_boxes

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# polynomials in x_1..x_r: dict exponent-tuple -> Fraction
# ---------------------------------------------------------------------------

def poly_mul(a: Mapping, b: Mapping) -> dict:
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            out[m] = out.get(m, ZERO) + ca * cb
    return {m: c for m, c in out.items() if c}


def linear_poly(coeffs: Sequence, r: int) -> dict:
    out = {}
    for k, c in enumerate(coeffs):
        if c:
            out[tuple(int(i == k) for i in range(r))] = Fraction(c)
    return out


def monomials(r: int, d: int) -> list:
    """Degree-d exponent vectors in r variables, lex-descending."""
    out = []
    for combo in itertools.combinations_with_replacement(range(r), d):
        e = [0] * r
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(set(out), reverse=True)


# ---------------------------------------------------------------------------
# sector rings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorRing:
    box: BoxElement
    r: int
    linear_relations: tuple      # kernel of Q^{I_f} -> L^v, rows indexed like I_f
    sr_monomials: tuple          # minimal vanishing subsets S of I_f
    basis: tuple                 # standard monomials in x, graded
    degrees: tuple
    _pivots: dict = field(repr=False, compare=False)   # degree -> (rows, pivot monomials, monomial list)
    _index: dict = field(repr=False, compare=False)
    D: tuple = field(repr=False, compare=False, default=())

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def top_degree(self) -> int:
        return max(self.degrees)

    @property
    def I_f(self) -> tuple:
        return self.box.I_f

    def zero(self) -> tuple:
        return (ZERO,) * self.dim

    def one(self) -> tuple:
        return tuple(ONE if d == 0 else ZERO for d in self.degrees)

    def normal_form(self, poly: Mapping) -> tuple:
        """Coordinates of a polynomial in x with respect to the basis."""
        by_deg = {}
        for m, c in poly.items():
            if c:
                by_deg.setdefault(sum(m), {})[m] = c
        out = [ZERO] * self.dim
        for d, part in by_deg.items():
            if d not in self._pivots:
                continue
            rows, piv_monos, _ = self._pivots[d]
            part = dict(part)
            for row, pm in zip(rows, piv_monos):
                c = part.get(pm, ZERO)
                if c:
                    for m, v in row.items():
                        part[m] = part.get(m, ZERO) - c * v
                    part[pm] = ZERO
            for m, c in part.items():
                if c:
                    idx = self._index.get(m)
                    if idx is None:
                        raise WallcrossError("normal form left a non-standard monomial")
                    out[idx] += c
        return tuple(out)

    def to_poly(self, vec: Sequence) -> dict:
        return {self.basis[i]: c for i, c in enumerate(vec) if c}

    def mul(self, a: Sequence, b: Sequence) -> tuple:
        return self.normal_form(poly_mul(self.to_poly(a), self.to_poly(b)))

    def theta(self, xi: Sequence) -> tuple:
        """Class of a character xi in L^v (as a ring vector)."""
        xi = la.fvec(xi)
        if la.rank([list(self.D[j]) for j in self.I_f]) != self.r:
            raise SpanFailure(f"characters of sector {self.box.f} do not span")
        return self.normal_form(linear_poly(xi, self.r))

    def restrict_u(self, j: int) -> tuple:
        return self.theta(self.D[j])

    def mult_matrix(self, vec: Sequence) -> list:
        """Matrix (rows = output coords) of multiplication by a class."""
        cols = [self.mul(vec, self.basis_vector(i)) for i in range(self.dim)]
        return la.transpose(cols) if cols else []

    def basis_vector(self, i: int) -> tuple:
        return tuple(ONE if k == i else ZERO for k in range(self.dim))

    def nilpotency_order(self, vec: Sequence) -> int:
        """Smallest n with vec^n = 0 (vec must have zero degree-0 part)."""
        p, n = tuple(vec), 1
        while any(p):
            p = self.mul(p, vec)
            n += 1
            if n > self.top_degree + 2:
                raise WallcrossError("class is not nilpotent")
        return n


def _sr_minimal(I_f: Sequence[int], fam: AnticoneFamily) -> tuple:
    I_f = tuple(I_f)
    bad = []
    for size in range(1, len(I_f) + 1):
        for S in itertools.combinations(I_f, size):
            if any(set(B) <= set(S) for B in bad):
                continue
            rest = set(I_f) - set(S)
            if not fam.contains_subset_of(rest):
                bad.append(S)
    return tuple(bad)


def build_sector_ring(data: GITData, fam: AnticoneFamily, box: BoxElement) -> SectorRing:
    if box.I_f not in fam:
        raise SectorNotInFan(f"I_f = {box.I_f} is not an anticone")
    r = data.r
    I_f = box.I_f
    A = [[data.D[j][row] for j in I_f] for row in range(r)]
    if la.rank(A) != r:
        raise SpanFailure(f"characters of sector {box.f} do not span")
    kernel = tuple(la.nullspace(A, len(I_f)))
    sr = _sr_minimal(I_f, fam)
    gens = [linear_poly(data.D[j], r) for j in I_f]
    pos = {j: i for i, j in enumerate(I_f)}
    sr_polys = []
    for S in sr:
        p = {(0,) * r: ONE}
        for j in S:
            p = poly_mul(p, gens[pos[j]])
        sr_polys.append((len(S), p))
    basis, degrees, pivots = [], [], {}
    cap = len(I_f) + r + 2
    for d in range(cap + 1):
        monos = monomials(r, d)
        col = {m: i for i, m in enumerate(monos)}
        rows = []
        for s, p in sr_polys:
            if s > d:
                continue
            for mu in monomials(r, d - s):
                q = poly_mul({mu: ONE}, p)
                v = [ZERO] * len(monos)
                for m, c in q.items():
                    v[col[m]] = c
                rows.append(v)
        R, piv = la.rref(rows) if rows else ([], [])
        std = [m for i, m in enumerate(monos) if i not in piv]
        pivots[d] = ([{monos[i]: c for i, c in enumerate(row) if c and i != p} for row, p in zip(R, piv)],
                     [monos[p] for p in piv], monos)
        basis.extend(std)
        degrees.extend([d] * len(std))
        if not std:
            break
    else:
        raise WallcrossError(f"sector ring for {box.f} is not finite-dimensional")
    index = {m: i for i, m in enumerate(basis)}
    return SectorRing(box, r, kernel, sr, tuple(basis), tuple(degrees), pivots, index, data.D)


# ---------------------------------------------------------------------------
# Chen-Ruan cohomology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HCRClass:
    """Sparse map sector index -> ring vector; zero components omitted."""
    parts: tuple = ()            # sorted tuple of (sector index, vector)

    @classmethod
    def from_dict(cls, d: Mapping) -> "HCRClass":
        return cls(tuple(sorted((s, tuple(v)) for s, v in d.items() if any(v))))

    def as_dict(self) -> dict:
        return dict(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __add__(self, other: "HCRClass") -> "HCRClass":
        d = self.as_dict()
        for s, v in other.parts:
            if s in d:
                d[s] = tuple(a + b for a, b in zip(d[s], v))
            else:
                d[s] = v
        return HCRClass.from_dict(d)

    def __neg__(self) -> "HCRClass":
        return self.scale(-1)

    def __sub__(self, other: "HCRClass") -> "HCRClass":
        return self + (-other)

    def scale(self, c) -> "HCRClass":
        if not c:
            return HCRClass()
        return HCRClass(tuple((s, tuple(c * x for x in v)) for s, v in self.parts))


@dataclass(frozen=True)
class HCRSpace:
    data: GITData
    omega: tuple
    family: AnticoneFamily = field(repr=False)
    boxes: tuple
    rings: tuple = field(repr=False)
    _theta_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return sum(R.dim for R in self.rings)

    @property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for R in self.rings:
            out.append(acc)
            acc += R.dim
        return tuple(out)

    def sector_of(self, f) -> int:
        """Index of the sector containing the class of f modulo L."""
        b = canonical_box(self.data, self.family, f)
        for i, box in enumerate(self.boxes):
            if box.f == b.f:
                return i
        raise SectorNotInFan(f"{f} is not a box element")

    def unit(self, sector: int = 0) -> HCRClass:
        return HCRClass.from_dict({sector: self.rings[sector].one()})

    def theta(self, xi, sector: int = 0) -> HCRClass:
        return HCRClass.from_dict({sector: self.rings[sector].theta(xi)})

    def mul_theta(self, xi, c: HCRClass) -> HCRClass:
        """theta(xi) * c, sector by sector."""
        out = {}
        xi = la.fvec(xi)
        for s, v in c.parts:
            key = (s, xi)
            M = self._theta_cache.get(key)
            if M is None:
                R = self.rings[s]
                M = R.mult_matrix(R.theta(xi))
                self._theta_cache[key] = M
            out[s] = la.matvec(M, v) if M else v
        return HCRClass.from_dict(out)

    def mul(self, a: HCRClass, b: HCRClass) -> HCRClass:
        """Sectorwise product (used only for classes pulled back by theta)."""
        bd = b.as_dict()
        out = {}
        for s, v in a.parts:
            if s in bd:
                out[s] = self.rings[s].mul(v, bd[s])
        return HCRClass.from_dict(out)

    def to_vector(self, c: HCRClass) -> tuple:
        out = [ZERO] * self.dim
        offs = self.offsets
        for s, v in c.parts:
            for i, x in enumerate(v):
                out[offs[s] + i] = x
        return tuple(out)

    def from_vector(self, vec: Sequence) -> HCRClass:
        d, offs = {}, self.offsets
        for s, R in enumerate(self.rings):
            d[s] = tuple(vec[offs[s]: offs[s] + R.dim])
        return HCRClass.from_dict(d)

    def basis_labels(self) -> list:
        """Human readable labels: sector fraction and x-monomial."""
        out = []
        for box, R in zip(self.boxes, self.rings):
            f = "(" + ",".join(str(x) for x in box.f) + ")"
            for m in R.basis:
                mono = "*".join(f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(m) if e) or "1"
                out.append(f"1_{f}*{mono}")
        return out


def build_hcr(data: GITData, omega, family: AnticoneFamily | None = None,
              boxes: Sequence[BoxElement] | None = None) -> HCRSpace:
    omega = la.fvec(omega)
    family = family or compute_anticone_family(data, omega)
    boxes = tuple(boxes) if boxes is not None else tuple(enumerate_boxes(data, omega, family))
    rings = tuple(build_sector_ring(data, family, b) for b in boxes)
    return HCRSpace(data, omega, family, boxes, rings)


def hcr_dimension(data: GITData, omega) -> int:
    return build_hcr(data, omega).dim
