"""Exact truncated series in y_1..y_r with log-monomials.

A term is keyed by ``(n, logpow)``: ``n`` holds the actual exponents of
y_1..y_r (so y^k contributes n_i = p_i . k) and ``logpow`` the powers of
log y_i.  Coefficients are :class:`ZLaurent` values: finite maps from a
z-exponent to a Chen-Ruan class.  Products of classes are taken sector by
sector, which is how theta-classes (and so e^{sigma/z}) act.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import linalg as la
from .cohomology import HCRClass, HCRSpace
from .errors import DivisionByPureNilpotent, TagMismatch

ZERO = Fraction(0)


class ZLaurent:
    """Finite Laurent polynomial in z with Chen-Ruan class coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, HCRClass] | None = None):
        self.terms = {e: c for e, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, c: HCRClass, zexp: int = 0) -> "ZLaurent":
        return cls({zexp: c})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, ZLaurent) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"ZLaurent({dict(sorted(self.terms.items()))})"

    def __add__(self, other: "ZLaurent") -> "ZLaurent":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return ZLaurent(out)

    def __neg__(self) -> "ZLaurent":
        return ZLaurent({e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "ZLaurent") -> "ZLaurent":
        return self + (-other)

    def scale(self, a) -> "ZLaurent":
        if not a:
            return ZLaurent()
        return ZLaurent({e: c.scale(a) for e, c in self.terms.items()})

    def shift_z(self, n: int) -> "ZLaurent":
        return ZLaurent({e + n: c for e, c in self.terms.items()})

    def map_classes(self, fn: Callable[[HCRClass], HCRClass]) -> "ZLaurent":
        return ZLaurent({e: fn(c) for e, c in self.terms.items()})

    def mul_theta(self, space: HCRSpace, xi) -> "ZLaurent":
        return self.map_classes(lambda c: space.mul_theta(xi, c))

    def mul_linear(self, space: HCRSpace, xi, a) -> "ZLaurent":
        """(theta(xi) + a z) * self."""
        return self.mul_theta(space, xi) + self.shift_z(1).scale(a)

    def div_linear(self, space: HCRSpace, xi, a) -> "ZLaurent":
        """(theta(xi) + a z)^{-1} * self for a != 0, by the nilpotent geometric series."""
        a = Fraction(a)
        if a == 0:
            raise DivisionByPureNilpotent("division by a pure nilpotent class")
        out = ZLaurent()
        cur = self
        n = 0
        while cur:
            out = out + cur.shift_z(-n - 1).scale((-1) ** n / a ** (n + 1))
            cur = cur.mul_theta(space, xi)
            n += 1
        return out

    def mul(self, space: HCRSpace, other: "ZLaurent") -> "ZLaurent":
        out = ZLaurent()
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out = out + ZLaurent({e1 + e2: space.mul(c1, c2)})
        return out

    def sectors(self) -> set:
        return {s for c in self.terms.values() for s, _ in c.parts}


@dataclass(frozen=True)
class DegreeFunctional:
    """deg(n) = weights . n on actual y-exponents (weights = P^{-T} omega_hat)."""
    weights: tuple

    @classmethod
    def from_stability(cls, omega_hat, p_basis) -> "DegreeFunctional":
        P = [list(p) for p in p_basis]
        return cls(la.matvec(la.transpose(la.inverse(P)), la.fvec(omega_hat)))

    def __call__(self, n) -> Fraction:
        return la.dot(self.weights, n)


class FormalSeries:
    """Truncated series: terms[(n, logpow)] = ZLaurent, kept when deg(n) <= N."""

    def __init__(self, space: HCRSpace, side: str, var: str, degree: DegreeFunctional, N,
                 terms: Mapping | None = None):
        self.space = space
        self.side = side
        self.var = var
        self.degree = degree
        self.N = Fraction(N)
        self.terms = {}
        for key, c in (terms or {}).items():
            if c and self.degree(key[0]) <= self.N:
                self.terms[key] = c

    @property
    def r(self) -> int:
        return len(self.degree.weights)

    def like(self, terms: Mapping, N=None) -> "FormalSeries":
        return FormalSeries(self.space, self.side, self.var, self.degree,
                            self.N if N is None else N, terms)

    def _check(self, other: "FormalSeries"):
        if (self.side, self.var) != (other.side, other.var) or self.degree != other.degree \
                or self.space is not other.space:
            raise TagMismatch(f"cannot combine {self.side}/{self.var} with {other.side}/{other.var}")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalSeries) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"FormalSeries({self.side}/{self.var}, N={self.N}, {len(self.terms)} terms)"

    def sorted_keys(self) -> list:
        return sorted(self.terms, key=lambda k: (self.degree(k[0]), k[0], k[1]))

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return self.like(out, min(self.N, other.N))

    def __neg__(self) -> "FormalSeries":
        return self.like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        return self + (-other)

    def scale(self, a) -> "FormalSeries":
        return self.like({k: c.scale(a) for k, c in self.terms.items()})

    def map_coeffs(self, fn) -> "FormalSeries":
        return self.like({k: fn(c) for k, c in self.terms.items()})

    def shift_z(self, n: int) -> "FormalSeries":
        return self.map_coeffs(lambda c: c.shift_z(n))

    def mul_theta(self, xi) -> "FormalSeries":
        return self.map_coeffs(lambda c: c.mul_theta(self.space, xi))

    def mul_monomial(self, n_shift) -> "FormalSeries":
        """Multiply by y^{n_shift}; terms beyond the window drop out."""
        n_shift = la.fvec(n_shift)
        return self.like({(la.vadd(n, n_shift), l): c for (n, l), c in self.terms.items()})

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        self._check(other)
        N = min(self.N, other.N)
        out = {}
        for (n1, l1), c1 in self.terms.items():
            for (n2, l2), c2 in other.terms.items():
                n = la.vadd(n1, n2)
                if self.degree(n) > N:
                    continue
                key = (n, tuple(a + b for a, b in zip(l1, l2)))
                prod = c1.mul(self.space, c2)
                out[key] = out[key] + prod if key in out else prod
        return self.like(out, N)

    def truncate(self, N) -> "FormalSeries":
        return self.like(self.terms, N)

    def log_derivation(self, i: int) -> "FormalSeries":
        """y_i d/dy_i, exact on log-monomials."""
        out = {}
        for (n, l), c in self.terms.items():
            if n[i]:
                out[(n, l)] = out.get((n, l), ZLaurent()) + c.scale(n[i])
            if l[i]:
                l2 = tuple(x - int(j == i) for j, x in enumerate(l))
                out[(n, l2)] = out.get((n, l2), ZLaurent()) + c.scale(l[i])
        return self.like(out)

    def linear_derivation(self, coeffs: Sequence) -> "FormalSeries":
        """sum_i coeffs[i] y_i d/dy_i."""
        out = self.like({})
        for i, a in enumerate(coeffs):
            if a:
                out = out + self.log_derivation(i).scale(a)
        return out

    def filter(self, pred) -> "FormalSeries":
        return self.like({k: c for k, c in self.terms.items() if pred(k)})

    def window(self, N) -> "FormalSeries":
        """Terms with deg <= N (N may lie below the truncation bound)."""
        return self.filter(lambda k: self.degree(k[0]) <= N)


def sigma_exp(space: HCRSpace, side: str, var: str, p_basis: Sequence, degree: DegreeFunctional,
              N) -> FormalSeries:
    """e^{sigma/z} with sigma = sum_i theta(p_i) log y_i, in every sector.

    The constant term is the sum of the sector units (the unit for the
    sectorwise product).
    """
    r = len(p_basis)
    terms = {}
    for s, R in enumerate(space.rings):
        top = R.top_degree
        thetas = [R.theta(p) for p in p_basis]
        powers = []
        for t in thetas:
            pw = [R.one()]
            while len(pw) <= top:
                pw.append(R.mul(pw[-1], t))
            powers.append(pw)
        for ell in itertools.product(range(top + 1), repeat=r):
            if sum(ell) > top:
                continue
            v = R.one()
            for i, e in enumerate(ell):
                v = R.mul(v, powers[i][e])
            if not any(v):
                continue
            coeff = Fraction(1, math.prod(math.factorial(e) for e in ell))
            key = ((ZERO,) * r, tuple(ell))
            zl = ZLaurent({-sum(ell): HCRClass.from_dict({s: tuple(coeff * x for x in v)})})
            terms[key] = terms[key] + zl if key in terms else zl
    return FormalSeries(space, side, var, degree, N, terms)
