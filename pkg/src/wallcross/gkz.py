"""GKZ operators, their regularized versions and fractional x-derivatives.

Operator words are applied right to left exactly as written; nothing is
reordered because fractional derivatives do not commute with the rest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .errors import NonCancellingGamma, NonIntegralPairing
from .ifunction import Side, TwistData
from .series import FormalSeries, ZLaurent

ZERO = Fraction(0)


# ---------------------------------------------------------------------------
# log-derivations and GKZ words on ordinary series
# ---------------------------------------------------------------------------

def log_derivation_coeffs(side: Side, xi) -> tuple:
    """a^i with xi = sum_i a^i p_i, so that sum_i a^i y_i d/dy_i y^d = (xi.d) y^d."""
    return side.a_coeffs(xi)


def z_partial_minus(side: Side, xi, l, s: FormalSeries) -> FormalSeries:
    """(z d_xi - l z) s."""
    d = s.linear_derivation(log_derivation_coeffs(side, xi))
    return (d - s.scale(l)).shift_z(1)


@dataclass(frozen=True)
class GKZOperator:
    d: tuple
    left: tuple                  # factors (j, l) for z d_j - l z, applied right to left
    right: tuple

    @classmethod
    def of(cls, side: Side, d) -> "GKZOperator":
        d = la.fvec(d)
        left, right = [], []
        for j, Dj in enumerate(side.data.D):
            dj = la.dot(Dj, d)
            if dj.denominator != 1:
                raise NonIntegralPairing(f"D_{j + 1}.d = {dj} for d = {d}")
            for l in range(abs(int(dj))):
                (left if dj > 0 else right).append((j, l))
        return cls(d, tuple(left), tuple(right))

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for x in self.d)


def apply_word(side: Side, word: Sequence, s: FormalSeries) -> FormalSeries:
    for j, l in reversed(word):
        s = z_partial_minus(side, side.data.D[j], l, s)
    return s


def apply_gkz(side: Side, op: GKZOperator, s: FormalSeries) -> FormalSeries:
    if op.is_zero:
        return s.like({})
    lhs = apply_word(side, op.left, s)
    rhs = apply_word(side, op.right, s).mul_monomial(side.exponents(op.d))
    return lhs - rhs


def gkz_window(side: Side, d, N) -> Fraction:
    return Fraction(N) + min(ZERO, side.deg(d))


def default_degrees(r: int, radius: int = 2) -> list:
    """Standard basis of L plus every d with |d|_inf <= radius."""
    out = [tuple(Fraction(int(i == j)) for j in range(r)) for i in range(r)]
    for d in itertools.product(range(-radius, radius + 1), repeat=r):
        d = tuple(Fraction(x) for x in d)
        if d not in out:
            out.append(d)
    return out


def annihilation_check(side: Side, series: FormalSeries, degrees: Sequence, N=None) -> dict:
    N = series.N if N is None else Fraction(N)
    rows = []
    for d in degrees:
        d = la.fvec(d)
        op = GKZOperator.of(side, d)
        win = gkz_window(side, d, N)
        res = apply_gkz(side, op, series).window(win)
        witness = None
        if res.terms:
            key = res.sorted_keys()[0]
            witness = {"key": key, "value": res.terms[key]}
        rows.append({"d": d, "window": win, "nonzero_terms": len(res.terms), "witness": witness,
                     "passed": not res.terms})
    return {"side": side.name, "N": N, "rows": rows, "passed": all(r["passed"] for r in rows)}


# ---------------------------------------------------------------------------
# twisted derivations and the Lefschetz words
# ---------------------------------------------------------------------------

def lefschetz_word(twist: TwistData, k, sign: int = -1) -> list:
    """Factors (j, a*sign) of prod_j prod_{a=0}^{E_j.k} (z dbar_j + sign * a z).

    The default sign -1 is the one for which the word reproduces the twist
    factors on a G-block; sign=+1 is kept for comparison.
    """
    word = []
    for j, E in enumerate(twist.E):
        t = la.dot(E, k)
        if t.denominator != 1 or t < 0:
            raise NonIntegralPairing(f"E_{j + 1}.k = {t} is not a non-negative integer")
        word.extend((j, sign * a) for a in range(int(t) + 1))
    return word


def apply_lefschetz(side: Side, twist: TwistData, word: Sequence, s: FormalSeries) -> FormalSeries:
    for j, a in reversed(word):
        s = z_partial_minus(side, twist.E[j], -a, s)
    return s


# ---------------------------------------------------------------------------
# Gamma symbols and fractional derivatives
# ---------------------------------------------------------------------------

class PoleFlag(Exception):
    """A reduced Gamma ratio needs Gamma at a non-positive integer."""


@dataclass(frozen=True, order=True)
class GammaSymbol:
    """Gamma(base + nil * T), T a fixed nilpotent class divided by z."""
    base: Fraction
    nil: Fraction = ZERO

    def shifted(self, n) -> "GammaSymbol":
        return GammaSymbol(self.base + n, self.nil)

    def is_pole(self) -> bool:
        return self.nil == 0 and self.base.denominator == 1 and self.base <= 0

    def __str__(self) -> str:
        if self.nil:
            return f"Gamma({self.base} + ({self.nil})T)"
        return f"Gamma({self.base})"


def gamma_ratio_scalar(num: GammaSymbol, den: GammaSymbol):
    """Gamma(num)/Gamma(den) for scalar symbols.

    Returns an exact Fraction when the arguments differ by an integer (or
    are both positive integers); otherwise returns the pair unchanged.
    """
    if num.nil or den.nil:
        raise ValueError("scalar reduction needs nil = 0")
    for g in (num, den):
        if g.is_pole():
            raise PoleFlag(str(g))
    diff = num.base - den.base
    if diff.denominator == 1:
        out = Fraction(1)
        if diff >= 0:
            for i in range(int(diff)):
                out *= den.base + i
        else:
            for i in range(int(-diff)):
                out /= num.base + i
        return out
    if num.base.denominator == 1 and den.base.denominator == 1:
        return Fraction(math.factorial(int(num.base) - 1), math.factorial(int(den.base) - 1))
    return (num, den)


def frac_derivative_monomial(a, mu_base, mu_nil=ZERO):
    """(d/dx)^a x^mu = Gamma(1+mu)/Gamma(1+mu-a) x^{mu-a}.

    Returns ((numerator symbol, denominator symbol), (new base, nil)).  For
    scalar exponents the ratio is reduced by :func:`gamma_ratio_scalar` when
    possible; symbols whose base is a positive integer evaluate to factorials.
    """
    a, mu_base, mu_nil = Fraction(a), Fraction(mu_base), Fraction(mu_nil)
    num = GammaSymbol(1 + mu_base, mu_nil)
    den = GammaSymbol(1 + mu_base - a, mu_nil)
    if mu_nil == 0:
        if den.is_pole():
            raise PoleFlag(f"{den} in a denominator")
        ratio = gamma_ratio_scalar(num, den)
        if isinstance(ratio, tuple):
            n, d = ratio
            if d.base.denominator == 1:
                ratio = (n, Fraction(math.factorial(int(d.base) - 1)))
        return ratio, (mu_base - a, mu_nil)
    return (num, den), (mu_base - a, mu_nil)


# ---------------------------------------------------------------------------
# operators on regularized series
# ---------------------------------------------------------------------------

def _mul_linear_T(side: Side, value: ZLaurent, b, c, xi_T) -> ZLaurent:
    """(b + c*theta(xi_T)/z) * value."""
    out = value.scale(b)
    if c:
        out = out + value.mul_theta(side.space, xi_T).shift_z(-1).scale(c)
    return out


def _div_linear_T(side: Side, value: ZLaurent, b, c, xi_T) -> ZLaurent:
    """(b + c*theta(xi_T)/z)^{-1} * value, b != 0."""
    if b == 0:
        raise PoleFlag("division by a pure nilpotent Gamma factor")
    out = ZLaurent()
    cur = value.scale(1 / Fraction(b))
    n = 0
    while cur:
        out = out + cur
        cur = cur.mul_theta(side.space, xi_T).shift_z(-1).scale(-Fraction(c) / b)
        n += 1
    return out


def normalize_gamma(reg, xbase, gammas: dict, value: ZLaurent):
    """Bring the Gamma bookkeeping of a term to the canonical 1/Gamma(1 + mu).

    mu = xbase + nil*T is the x-exponent.  Identical symbols cancel; a symbol
    whose argument differs from 1 + mu by an integer is rewritten through the
    functional equation, producing exact linear factors; anything else raises
    NonCancellingGamma.
    """
    side, nil, xi_T = reg.side, reg.nil, reg.xi_T
    target = GammaSymbol(1 + xbase, nil)
    total = 0
    for sym, power in gammas.items():
        if power == 0:
            continue
        m = sym.base - target.base
        if sym.nil != nil or m.denominator != 1:
            raise NonCancellingGamma(f"{sym} does not reduce against {target}")
        m = int(m)
        # Gamma(t + m) = Gamma(t) * F, F a product of linear factors
        factors = [(target.base + i, nil) for i in range(m)] if m >= 0 else \
            [(target.base - i, nil) for i in range(1, -m + 1)]
        f_in_num = (m >= 0) == (power > 0)
        for _ in range(abs(power)):
            for b, c in factors:
                if f_in_num:
                    value = _mul_linear_T(side, value, b, c, xi_T)
                else:
                    value = _div_linear_T(side, value, b, c, xi_T)
        total += power
    if value and total != -1:
        raise NonCancellingGamma(f"term keeps Gamma power {total} instead of -1")
    return value


def reg_apply_partial(reg, j: int, l, terms: dict) -> dict:
    """(z d_j - l z) on regularized terms keyed (n_lo, xbase)."""
    side = reg.side
    a = side.a_coeffs(side.data.D[j])
    out = {}
    for (n_lo, xbase), value in terms.items():
        scalar = sum((a[i] * n_lo[i] for i in range(side.r - 1)), ZERO) + a[-1] * xbase / reg.beta - l
        new = value.mul_theta(side.space, side.data.D[j]) + value.shift_z(1).scale(scalar)
        if new:
            out[(n_lo, xbase)] = new
    return out


def reg_apply_word(reg, word, terms: dict) -> dict:
    for j, l in reversed(word):
        terms = reg_apply_partial(reg, j, l, terms)
    return terms


def reg_apply_frac(reg, a, terms: dict) -> dict:
    """(d/dx)^a termwise, with the Gamma ratio absorbed into the canonical form."""
    a = Fraction(a)
    if a == 0:
        return dict(terms)
    out = {}
    for (n_lo, xbase), value in terms.items():
        if not value:
            continue
        (num, den), (new_base, _) = frac_derivative_monomial(a, xbase, reg.nil)
        # current term carries 1/Gamma(1 + xbase); multiply by num/den
        gammas = {}
        for sym, p in ((GammaSymbol(1 + xbase, reg.nil), -1), (num, 1), (den, -1)):
            gammas[sym] = gammas.get(sym, 0) + p
        gammas = {s: p for s, p in gammas.items() if p}
        value = normalize_gamma(reg, new_base, gammas, value)
        if value:
            key = (n_lo, new_base)
            out[key] = out[key] + value if key in out else value
    return out


def _add_terms(a: dict, b: dict, sign=1) -> dict:
    out = dict(a)
    for k, v in b.items():
        v = v if sign > 0 else -v
        out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if v}


def reg_gkz_apply(reg, d) -> tuple:
    """Delta^reg_d applied to the regularized series: (result terms, case, order)."""
    side = reg.side
    d = la.fvec(d)
    op = GKZOperator.of(side, d)
    if op.is_zero:
        return {}, "zero", ZERO
    nd = side.exponents(d)
    shift_lo = nd[: side.r - 1]
    prd = nd[-1]
    terms = reg.terms

    def shift(ts):
        return {(la.vadd(n_lo, shift_lo), xb): v for (n_lo, xb), v in ts.items()}

    if prd < 0:
        order = -reg.beta * prd
        lhs = reg_apply_word(reg, op.left, terms)
        rhs = shift(reg_apply_frac(reg, order, reg_apply_word(reg, op.right, terms)))
        case = "p_r.d<0"
    else:
        order = reg.beta * prd
        lhs = reg_apply_frac(reg, order, reg_apply_word(reg, op.left, terms))
        rhs = shift(reg_apply_word(reg, op.right, terms))
        case = "p_r.d>=0"
    return _add_terms(lhs, rhs, -1), case, order


def reg_window(reg, d, N) -> tuple:
    """Valid key-degree window for the result of Delta^reg_d."""
    side = reg.side
    dd = side.deg(d)
    prd = side.exponents(d)[-1]
    if prd < 0:
        return Fraction(N) + min(ZERO, dd)
    return Fraction(N) - max(ZERO, dd)


def reg_annihilation_check(reg, degrees: Sequence, N=None) -> dict:
    N = reg.N if N is None else Fraction(N)
    rows = []
    for d in degrees:
        d = la.fvec(d)
        row = {"d": d}
        try:
            res, case, order = reg_gkz_apply(reg, d)
        except PoleFlag as exc:
            row.update(passed=False, pole=str(exc), case=None, order=None, window=None, nonzero_terms=None)
            rows.append(row)
            continue
        win = reg_window(reg, d, N)
        bad = {k: v for k, v in res.items() if reg.key_degree(k) <= win}
        row.update(case=case, order=order, window=win, nonzero_terms=len(bad), passed=not bad, pole=None)
        if bad:
            k = sorted(bad)[0]
            row["witness"] = {"key": k, "value": bad[k]}
        rows.append(row)
    return {"N": N, "rows": rows, "passed": all(r["passed"] for r in rows)}
