"""Truncated I-functions, their twisted variants and the G-block split."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg as la
from .cohomology import HCRClass, HCRSpace, build_hcr
from .errors import NonIntegralPairing, WallcrossError
from .git_core import (ChamberData, GITData, WallCrossing, compute_chamber, cone_hrep, enumerate_boxes,
                       in_closed_cone, ltilde, search_bases)
from .series import DegreeFunctional, FormalSeries, ZLaurent, sigma_exp

logger = logging.getLogger(__name__)
ZERO = Fraction(0)


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass
class Side:
    """Everything needed to expand the I-function of one quotient."""
    data: GITData
    name: str                    # "plus" or "minus"
    omega: tuple
    chamber: ChamberData
    space: HCRSpace
    p: tuple                     # basis p_1..p_r of the dual lattice
    degree: DegreeFunctional
    var: str                     # "y" or "ytilde"
    dual_cone: tuple = field(repr=False)   # H-description of C^v

    @property
    def r(self) -> int:
        return self.data.r

    @property
    def P(self) -> list:
        return [list(p) for p in self.p]

    def exponents(self, k) -> tuple:
        """Actual y-exponents n_i = p_i . k."""
        return tuple(la.dot(p, k) for p in self.p)

    def k_of(self, n) -> tuple:
        return la.solve(self.P, la.fvec(n))

    def deg(self, k) -> Fraction:
        return la.dot(self.omega, k)

    def a_coeffs(self, xi) -> tuple:
        """Coordinates of a character xi in the basis p (so xi = sum a^i p_i)."""
        return la.solve(la.transpose(self.P), la.fvec(xi))


def make_side(data: GITData, name: str, omega, p: Optional[Sequence] = None, chamber=None,
              boxes=None, degree_weights=None) -> Side:
    omega = la.fvec(omega)
    chamber = chamber or compute_chamber(data, omega)
    boxes = tuple(boxes) if boxes is not None else tuple(enumerate_boxes(data, omega, chamber.anticones))
    space = build_hcr(data, omega, chamber.anticones, boxes)
    if p is None:
        lt = ltilde(data, boxes).dual()
        p = _single_side_basis(chamber, lt, data.r)
    p = tuple(la.fvec(v) for v in p)
    degree = DegreeFunctional.from_stability(degree_weights or omega, p)
    dual = tuple(cone_hrep(list(chamber.normals), data.r))
    return Side(data, name, omega, chamber, space, p, degree, "y" if name == "plus" else "ytilde", dual)


def _single_side_basis(chamber: ChamberData, lattice, r: int, height: int = 8) -> tuple:
    """A dual-lattice basis inside the closed chamber (used when no wall is given)."""
    from .git_core import _candidates
    cands = [v for v in _candidates(height, r) if in_closed_cone(chamber.normals, v) and lattice.contains(v)]
    for combo in itertools.combinations(cands, r):
        if abs(la.det([list(v) for v in combo])) == lattice.covolume:
            return combo
    raise WallcrossError("no dual-lattice basis found in the closed chamber")


def sides_from_wall(data: GITData, wc: WallCrossing) -> tuple:
    plus = make_side(data, "plus", data.omega_plus, wc.p_plus, wc.chamber_plus, wc.boxes_plus)
    minus = make_side(data, "minus", data.omega_minus, wc.p_minus, wc.chamber_minus, wc.boxes_minus)
    return plus, minus


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def gamma_quotient_factor(side: Side, j: int, k, value: ZLaurent) -> ZLaurent:
    """Multiply ``value`` (supported on sector [-k]) by the j-th Gamma quotient.

    Common factors are cancelled first: for t = D_j.k > 0 this divides by
    prod_{0 < a <= t, a = t mod 1} (u_j + a z), for t <= 0 it multiplies by
    prod_{t < a <= 0, a = t mod 1} (u_j + a z).  A surviving a = 0 factor is an
    honest multiplication by u_j.
    """
    Dj = side.data.D[j]
    t = la.dot(Dj, k)
    if t > 0:
        a = t
        while a > 0:
            value = value.div_linear(side.space, Dj, a)
            a -= 1
    elif t < 0:
        a = t + 1
        while a <= 0:
            value = value.mul_linear(side.space, Dj, a)
            a += 1
    return value


def i_coefficient(side: Side, k) -> ZLaurent:
    """I_k as an exact Laurent class on sector [-k]."""
    k = la.fvec(k)
    s = side.space.sector_of(tuple(-x for x in k))
    value = ZLaurent.constant(side.space.unit(s))
    for j in range(side.data.m):
        value = gamma_quotient_factor(side, j, k, value)
        if not value:
            break
    return value


def enumerate_k(side: Side, N) -> list:
    """Points k of K (box representatives + L) in C^v with deg(k) <= N, sorted."""
    N = Fraction(N)
    r = side.r
    normals = side.chamber.normals
    if N < 0:
        return []
    verts = [tuple(Fraction(0) for _ in range(r))]
    for n in normals:
        w = la.dot(side.omega, n)
        if w <= 0:
            raise WallcrossError("degree functional is not positive on the dual cone")
        verts.append(tuple(x * N / w for x in n))
    lo = [min(v[i] for v in verts) for i in range(r)]
    hi = [max(v[i] for v in verts) for i in range(r)]
    out = []
    for box in side.space.boxes:
        ranges = [range(math.ceil(lo[i] - box.f[i]), math.floor(hi[i] - box.f[i]) + 1) for i in range(r)]
        for lam in itertools.product(*ranges):
            k = tuple(box.f[i] + lam[i] for i in range(r))
            if side.deg(k) <= N and in_closed_cone(side.dual_cone, k):
                out.append(k)
    return sorted(set(out), key=lambda k: (side.deg(k), k))


# ---------------------------------------------------------------------------
# twists
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistData:
    E: tuple                     # integer characters E_1..E_n

    @classmethod
    def of(cls, vectors) -> "TwistData":
        return cls(tuple(la.fvec(v) for v in vectors))

    def b_coeffs(self, side: Side) -> list:
        """Coordinates b_j^i of E_j in the p-basis of the side."""
        return [side.a_coeffs(E) for E in self.E]

    def check_wall(self, wc: WallCrossing) -> list:
        problems = []
        for j, E in enumerate(self.E):
            if la.dot(E, wc.e) != 0:
                problems.append(f"E_{j + 1} is not on the wall")
            elif not (in_closed_cone(wc.chamber_plus.normals, E) and in_closed_cone(wc.chamber_minus.normals, E)):
                problems.append(f"E_{j + 1} is not in the wall closure")
        return problems


def twist_factor(side: Side, twist: TwistData, k, value: ZLaurent) -> ZLaurent:
    """prod_j prod_{a=1}^{E_j.k} (v_j + a z) applied to ``value``."""
    for j, E in enumerate(twist.E):
        t = la.dot(E, k)
        if t.denominator != 1:
            if value:
                raise NonIntegralPairing(f"E_{j + 1}.k = {t} is not an integer for k = {k}")
            continue
        for a in range(1, int(t) + 1):
            value = value.mul_linear(side.space, E, a)
    return value


def euler_class(side: Side, twist: TwistData, value: ZLaurent) -> ZLaurent:
    for E in twist.E:
        value = value.mul_theta(side.space, E)
    return value


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

def _assemble(side: Side, N, coeff_fn) -> FormalSeries:
    sig = sigma_exp(side.space, side.name, side.var, side.p, side.degree, N)
    terms = {}
    for k in enumerate_k(side, N):
        c = coeff_fn(k)
        if c:
            terms[(side.exponents(k), (0,) * side.r)] = c
    body = FormalSeries(side.space, side.name, side.var, side.degree, N, terms)
    return (sig * body).shift_z(1)


def build_I(side: Side, N) -> FormalSeries:
    return _assemble(side, N, lambda k: i_coefficient(side, k))


def build_I_twisted(side: Side, twist: TwistData, N) -> FormalSeries:
    return _assemble(side, N, lambda k: twist_factor(side, twist, k, i_coefficient(side, k)))


def build_I_Y(side: Side, twist: TwistData, N) -> FormalSeries:
    return _assemble(side, N, lambda k: euler_class(side, twist,
                                                    twist_factor(side, twist, k, i_coefficient(side, k))))


def block_key(side: Side, n) -> tuple:
    """Class of an exponent modulo e: the first r-1 actual exponents."""
    return tuple(n[: side.r - 1])


def group_G(series: FormalSeries, side: Side, kbar) -> FormalSeries:
    kbar = la.fvec(kbar)
    return series.filter(lambda key: block_key(side, key[0]) == kbar)


def blocks(series: FormalSeries, side: Side) -> dict:
    out = {}
    for key in series.terms:
        out.setdefault(block_key(side, key[0]), None)
    return {b: group_G(series, side, b) for b in sorted(out)}


def coefficient_degree(side: Side, k) -> Fraction:
    """Expected homogeneous degree of I_k with deg z = deg u_j = 1."""
    box = side.space.boxes[side.space.sector_of(tuple(-x for x in k))]
    return -la.dot(side.data.rho_hat, k) - box.age


def zl_homogeneous_degrees(side: Side, value: ZLaurent) -> set:
    degs = set()
    for zexp, cls in value.terms.items():
        for s, vec in cls.parts:
            R = side.space.rings[s]
            for i, c in enumerate(vec):
                if c:
                    degs.add(zexp + R.degrees[i])
    return degs
