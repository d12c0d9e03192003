"""Regularization, termwise Laplace transform, changes of variables and the
convergence/Watson diagnostics.

Variables on the minus side: x = ytilde_r^{1/beta} with beta = -s/q, where
s = sum_j D_j.e and q = p_r^-.e < 0.  A regularized term is stored as

    numerator * prod_{i<r} ytilde_i^{theta_i/z + n_i} * x^{xbase + beta T} / Gamma(1 + xbase + beta T)

with T = theta_-(p_r^-)/z.  The Gamma factor is kept as a symbol and never
expanded here.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import linalg as la
from .errors import GammaMismatch, WallcrossError
from .gkz import GammaSymbol
from .ifunction import Side, i_coefficient
from .git_core import WallCrossing
from .numerics import QuadratureConfig, gamma, integrate_ray
from .series import DegreeFunctional, FormalSeries, ZLaurent, sigma_exp

ZERO = Fraction(0)


@dataclass
class RegSeries:
    side: Side
    s: Fraction                  # sum_j D_j . e
    q: Fraction                  # p_r^- . e  (< 0)
    N: Fraction
    terms: dict                  # (n_lo, xbase) -> ZLaurent numerator (includes the overall z)

    @property
    def beta(self) -> Fraction:
        return -self.s / self.q

    @property
    def nil(self) -> Fraction:
        """Coefficient of T in the x-exponent (and in every Gamma argument)."""
        return self.beta

    @property
    def xi_T(self) -> tuple:
        return self.side.p[-1]

    def lam(self, key) -> tuple:
        """lambda of a term as (base, nilpotent coefficient of T)."""
        return key[1], self.nil

    def denominator(self, key) -> GammaSymbol:
        return GammaSymbol(1 + key[1], self.nil)

    def key_degree(self, key) -> Fraction:
        n_lo, xbase = key
        return self.side.degree(tuple(n_lo) + (xbase / self.beta,))


def regularize(I_minus: FormalSeries, side: Side, wc: WallCrossing) -> RegSeries:
    """Divide each term of I^- by Gamma(1 + lambda_k) and pass to x."""
    if I_minus.side != "minus":
        raise WallcrossError("regularize expects the minus-side series")
    s = wc.discrepancy_sum
    q = la.dot(side.p[-1], wc.e)
    if q >= 0:
        raise WallcrossError("p_r^- . e must be negative")
    beta = -s / q
    r = side.r
    terms = {}
    for (n, logpow), c in I_minus.terms.items():
        if any(logpow):
            continue
        terms[(tuple(n[: r - 1]), beta * n[r - 1])] = c
    return RegSeries(side, s, q, I_minus.N, terms)


def regularize_direct(side: Side, wc: WallCrossing, ks, N) -> RegSeries:
    """Regularized series assembled straight from the coefficients I_k."""
    s = wc.discrepancy_sum
    q = la.dot(side.p[-1], wc.e)
    beta = -s / q
    r = side.r
    terms = {}
    for k in ks:
        c = i_coefficient(side, k)
        if c:
            n = side.exponents(k)
            terms[(tuple(n[: r - 1]), beta * n[r - 1])] = c.shift_z(1)
    return RegSeries(side, s, q, Fraction(N), terms)


# ---------------------------------------------------------------------------
# Laplace transform
# ---------------------------------------------------------------------------

@dataclass
class LaplaceImage:
    """u-series: exponents (n_lo, a) stand for prod ytilde_i^{n_i} u^{a}."""
    series: FormalSeries
    reg: RegSeries = field(repr=False)
    gamma_checks: int = 0


def _u_degree(side: Side, beta) -> DegreeFunctional:
    w = side.degree.weights
    return DegreeFunctional(tuple(w[:-1]) + (-w[-1] / beta,))


def laplace_termwise(reg: RegSeries) -> LaplaceImage:
    """u L(x^lambda) = Gamma(1 + lambda) u^{-lambda}; the Gammas cancel by symbol."""
    side = reg.side
    beta = reg.beta
    deg_u = _u_degree(side, beta)
    r = side.r
    body = {}
    checks = 0
    for key, value in reg.terms.items():
        produced = GammaSymbol(1 + reg.lam(key)[0], reg.lam(key)[1])
        stored = reg.denominator(key)
        if produced != stored:
            raise GammaMismatch(f"{produced} does not cancel {stored}")
        checks += 1
        n_lo, xbase = key
        body[(tuple(n_lo) + (-xbase,), (0,) * r)] = value
    body_series = FormalSeries(side.space, "laplace", "u", deg_u, reg.N, body)
    # prefactor prod_{i<r} ytilde_i^{theta_i/z} u^{-beta T}, expanded in logs
    p_u = tuple(side.p[:-1]) + (tuple(-beta * x for x in side.p[-1]),)
    pref = sigma_exp(side.space, "laplace", "u", p_u, deg_u, reg.N)
    return LaplaceImage(pref * body_series, reg, checks)


# ---------------------------------------------------------------------------
# linear changes of log-coordinates
# ---------------------------------------------------------------------------

def relabel_log_coordinates(series: FormalSeries, M, side_tag: str, var: str) -> FormalSeries:
    """Rewrite a series under old_log = M new_log (M an r x r rational matrix).

    A monomial prod old_i^{n_i} becomes prod new^{M^T n}; powers of old logs
    are expanded multinomially.  The degree functional is carried along so
    that every term keeps its degree.
    """
    M = [[la.frac(x) for x in row] for row in M]
    r = len(M)
    MT = la.transpose(M)
    w_new = la.matvec(la.inverse(M), series.degree.weights)
    deg_new = DegreeFunctional(tuple(w_new))
    out = {}
    for (n, logpow), c in series.terms.items():
        n_new = la.matvec(MT, n)
        # expand prod_i (sum_k M[i][k] L_k)^{logpow_i}
        poly = {(0,) * r: Fraction(1)}
        for i, e in enumerate(logpow):
            for _ in range(e):
                nxt = {}
                for mono, coef in poly.items():
                    for k in range(r):
                        if M[i][k]:
                            m2 = tuple(v + int(t == k) for t, v in enumerate(mono))
                            nxt[m2] = nxt.get(m2, ZERO) + coef * M[i][k]
                poly = {m: v for m, v in nxt.items() if v}
        for mono, coef in poly.items():
            key = (n_new, mono)
            add = c.scale(coef)
            out[key] = out[key] + add if key in out else add
    return FormalSeries(series.space, side_tag, var, deg_new, series.N, out)


def u_to_ytilde_matrix(reg: RegSeries) -> list:
    """old (ytilde_lo, u) logs in terms of new (ytilde) logs: log u = -(1/beta) log ytilde_r."""
    r = reg.side.r
    M = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    M[r - 1][r - 1] = -1 / reg.beta
    return M


def cov2_matrix(wc: WallCrossing, beta) -> list:
    """old (ytilde_lo, u) logs in terms of y logs.

    log ytilde_i = log y_i + c_i log y_r, log u = (c / beta) log y_r.
    """
    r = wc.r
    M = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    for i in range(r - 1):
        M[i][r - 1] = wc.c_i[i]
    M[r - 1][r - 1] = wc.c / beta
    return M


def cov_matrix(wc: WallCrossing) -> list:
    """ytilde logs in terms of y logs: log ytilde_i = log y_i + c_i log y_r, log ytilde_r = -c log y_r."""
    r = wc.r
    M = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    for i in range(r - 1):
        M[i][r - 1] = wc.c_i[i]
    M[r - 1][r - 1] = -wc.c
    return M


def change_variables_to_y(img: LaplaceImage, wc: WallCrossing) -> FormalSeries:
    return relabel_log_coordinates(img.series, cov2_matrix(wc, img.reg.beta), "laplace", "y")


def asymptotic_identity_check(img: LaplaceImage, I_minus: FormalSeries) -> dict:
    """Rewrite the u-series via ytilde_r = u^{s/q} and compare with I^- term by term."""
    reg = img.reg
    back = relabel_log_coordinates(img.series, u_to_ytilde_matrix(reg), I_minus.side, I_minus.var)
    back = FormalSeries(I_minus.space, I_minus.side, I_minus.var, I_minus.degree, I_minus.N, back.terms)
    r = reg.side.r
    period = -reg.q
    groups = {}
    keys = set(back.terms) | set(I_minus.terms)
    for key in keys:
        g = key[0][r - 1] % period
        groups.setdefault(g, []).append(key)
    rows = []
    for g in sorted(groups):
        ks = groups[g]
        bad = [k for k in ks if back.terms.get(k) != I_minus.terms.get(k)]
        rows.append({"group": g, "terms": len(ks), "mismatches": len(bad),
                     "witness": sorted(bad)[0] if bad else None})
    return {"groups": rows, "total_terms": len(keys),
            "passed": all(r_["mismatches"] == 0 for r_ in rows)}


# ---------------------------------------------------------------------------
# convergence diagnostics
# ---------------------------------------------------------------------------

def closed_form_ratio(data, e, k, l) -> Fraction:
    """Ratio of the (l+1)-st to l-th scalar term of F_d with u_j/z set to 0.

    prod_{e_j<0} prod_{m=0}^{-e_j-1} (k_j + l e_j - m) / prod_{e_j>0} prod_{m=1}^{e_j} (k_j + l e_j + m)
    (the y_r power and z-scaling are dropped).
    """
    num = Fraction(1)
    den = Fraction(1)
    for Dj in data.D:
        ej = la.dot(Dj, e)
        kj = la.dot(Dj, k)
        if ej < 0:
            for m in range(int(-ej)):
                num *= kj + l * ej - m
        elif ej > 0:
            for m in range(1, int(ej) + 1):
                den *= kj + l * ej + m
    return num / den


def _scalar_size(value: ZLaurent, z: complex = 1.0) -> float:
    """Max-norm of the coefficient vector at a numeric z."""
    acc = {}
    for zexp, cls in value.terms.items():
        for s, vec in cls.parts:
            for i, c in enumerate(vec):
                acc[(s, i)] = acc.get((s, i), 0) + float(c) * z ** zexp
    return max((abs(v) for v in acc.values()), default=0.0)


def observed_ratios(side: Side, d, direction, ls) -> list:
    """|I_{d+(l+1)v}| / |I_{d+lv}| at z = 1 for the actual coefficients."""
    out = []
    for l in ls:
        a = _scalar_size(i_coefficient(side, la.vadd(d, la.vscale(l, direction))))
        b = _scalar_size(i_coefficient(side, la.vadd(d, la.vscale(l + 1, direction))))
        out.append(b / a if a else math.inf)
    return out


def displayed_singular_locus(wc: WallCrossing, data, q) -> dict:
    """Roots of ((-q/s) x)^s = prod_{e_j != 0} e_j^{-e_j}."""
    s = wc.discrepancy_sum
    rhs = Fraction(1)
    for Dj in data.D:
        ej = la.dot(Dj, wc.e)
        if ej:
            rhs *= Fraction(ej) ** (-int(ej))
    return {"rhs": rhs, "scale": -q / s, "roots": _roots(rhs, -q / s, s)}


def operator_singular_locus(side: Side, wc: WallCrossing, q) -> dict:
    """Finite singular points of Delta^reg_e read off its leading symbol.

    On a G-block, d_j acts on x-dependence as kappa_j x d/dx with
    kappa_j = (coefficient of p_r in D_j) * (-q/s).  The leading symbol is
    prod_{e_j>0} kappa_j^{e_j} - x^{-s} prod_{e_j<0} kappa_j^{-e_j}.
    """
    s = wc.discrepancy_sum
    A = Fraction(1)
    B = Fraction(1)
    kappas = []
    for Dj in side.data.D:
        ej = la.dot(Dj, wc.e)
        kappa = side.a_coeffs(Dj)[-1] * (-q / s)
        kappas.append(kappa)
        if ej > 0:
            A *= kappa ** int(ej)
        elif ej < 0:
            B *= kappa ** int(-ej)
    # x^s = B / A
    return {"x_power_s": B / A, "kappa": kappas, "roots": _roots(B / A, Fraction(1), s)}


def _roots(rhs: Fraction, scale: Fraction, s: Fraction) -> list:
    """Solutions x of (scale * x)^s = rhs (s a positive integer)."""
    if s.denominator != 1:
        return []
    s = int(s)
    if s == 1:
        return [rhs / scale]
    mag = abs(float(rhs)) ** (1.0 / s)
    phase = cmath.phase(complex(float(rhs)))
    return [mag * cmath.exp(1j * (phase + 2 * math.pi * t) / s) / float(scale) for t in range(s)]


def series_radius_estimate(side: Side, wc: WallCrossing, d, ls) -> dict:
    """Root-test radius of the regularized minus block through d, at z = 1.

    Returns the estimated radius in x and the sign pattern of the leading
    coefficients (constant sign places the singularity on the positive axis).
    """
    q = la.dot(side.p[-1], wc.e)
    beta = -wc.discrepancy_sum / q
    vals = []
    for l in ls:
        k = la.vadd(d, la.vscale(-l, wc.e))
        c = i_coefficient(side, k)
        if not c:
            continue
        n_r = side.exponents(k)[-1]
        size = _scalar_size(c) / abs(gamma(1 + float(beta * n_r)))
        sgn = _leading_sign(c)
        vals.append((float(beta * n_r), size, sgn))
    if len(vals) < 2:
        return {"radius": None, "signs": []}
    (x0, s0, _), (x1, s1, _) = vals[-2], vals[-1]
    radius = (s0 / s1) ** (1.0 / (x1 - x0)) if s1 else math.inf
    return {"radius": radius, "signs": [v[2] for v in vals]}


def _leading_sign(value: ZLaurent) -> int:
    total = ZERO
    for zexp, cls in value.terms.items():
        for _, vec in cls.parts:
            total += sum(vec)
    return (total > 0) - (total < 0)


def convergence_report(plus: Side, minus: Side, wc: WallCrossing, d_plus=None, d_minus=None,
                       ls: Sequence[int] = tuple(range(5, 40, 5))) -> dict:
    r = plus.r
    d_plus = la.fvec(d_plus or (0,) * r)
    d_minus = la.fvec(d_minus or (0,) * r)
    q = la.dot(minus.p[-1], wc.e)
    plus_closed = [closed_form_ratio(plus.data, wc.e, d_plus, l) for l in ls]
    plus_obs = observed_ratios(plus, d_plus, wc.e, ls)
    minus_obs = observed_ratios(minus, d_minus, tuple(-x for x in wc.e), ls)
    minus_closed = [1 / closed_form_ratio(minus.data, wc.e, d_minus, -l - 1) if
                    closed_form_ratio(minus.data, wc.e, d_minus, -l - 1) else math.inf for l in ls]
    displayed = displayed_singular_locus(wc, plus.data, q)
    operator = operator_singular_locus(minus, wc, q)
    radius = series_radius_estimate(minus, wc, d_minus, range(max(ls) - 6, max(ls) + 1))
    return {
        "ls": list(ls),
        "plus_closed_form_ratio": plus_closed,
        "plus_observed_ratio": plus_obs,
        "plus_tends_to_zero": _decreasing_to_zero([abs(float(x)) for x in plus_closed]) and
        _decreasing_to_zero(plus_obs),
        "minus_closed_form_ratio": [float(x) for x in minus_closed],
        "minus_observed_ratio": minus_obs,
        "minus_diverges": _increasing(minus_obs) and _increasing([abs(x) for x in minus_closed]),
        "singular_locus_displayed": displayed,
        "singular_locus_operator": operator,
        "series_radius": radius,
        "loci_agree": [complex(x) for x in displayed["roots"]] == [complex(x) for x in operator["roots"]],
    }


def _decreasing_to_zero(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:])) and xs[-1] < 0.5 * xs[0]


def _increasing(xs) -> bool:
    return all(b > a for a, b in zip(xs, xs[1:]))


# ---------------------------------------------------------------------------
# Watson's lemma on scalar models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WatsonModel:
    """phi(x) = x^lam * g(x) with g given by its Taylor coefficients."""
    lam: float
    g: Callable[[complex], complex]
    g_coeff: Callable[[int], float]      # g^{(n)}(0) / n!
    bound: float = 1.0                   # |phi(x)| < e^{bound x}

    def phi(self, x):
        return x ** self.lam * self.g(x) if self.lam else self.g(x)


def euler_model() -> WatsonModel:
    return WatsonModel(0.0, lambda x: 1 / (1 + x), lambda n: float((-1) ** n), 0.0)


def sqrt_model() -> WatsonModel:
    return WatsonModel(0.5, lambda x: 1.0, lambda n: 1.0 if n == 0 else 0.0, 0.0)


def watson_terms(model: WatsonModel, u: float, nmax: int) -> list:
    """Terms g_n Gamma(1 + lam + n) / u^{lam + n} of the expansion of u L(phi)."""
    out = []
    for n in range(nmax):
        g = model.g_coeff(n)
        out.append(g * gamma(1 + model.lam + n).real / u ** (model.lam + n) if g else 0.0)
    return out


def watson_validate(model: WatsonModel, us: Sequence[float], closed_form=None,
                    quad: QuadratureConfig = QuadratureConfig(), nmax: int = 120) -> list:
    rows = []
    for u in us:
        val, err = integrate_ray(lambda x: u * cmath.exp(-u * x) * model.phi(x), quad)
        terms = watson_terms(model, u, nmax)
        partial, best = 0.0, None
        errors = []
        for n, t in enumerate(terms):
            partial += t
            errors.append(abs(partial - val.real) / abs(val.real))
        nz = [i for i, t in enumerate(terms) if t]
        mags = [abs(terms[i]) for i in nz]
        if len(mags) > 1:
            imin = nz[min(range(len(mags)), key=mags.__getitem__)]
            n_opt = imin            # truncate before the smallest term
            opt_sum = sum(terms[:n_opt]) if n_opt > 0 else terms[0]
        else:
            n_opt = 1
            opt_sum = terms[0]
        row = {"u": u, "integral": val.real, "quad_error": err, "n_opt": n_opt, "optimal_sum": opt_sum,
               "rel_error_optimal": abs(opt_sum - val.real) / abs(val.real),
               "expected_error_scale": abs(terms[n_opt]) / abs(val.real) if n_opt < len(terms) else 0.0,
               "partial_errors": errors[: min(len(errors), 3 * max(n_opt, 1) + 5)]}
        if closed_form is not None:
            ref = closed_form(u)
            row["closed_form"] = ref
            row["rel_error_closed_form"] = abs(val.real - ref) / abs(ref)
        row["signature"] = _signature(row["partial_errors"])
        rows.append(row)
    return rows


def _signature(errs) -> bool:
    """Errors decrease to a minimum and then grow (asymptotic, not convergent)."""
    if len(errs) < 3:
        return False
    i = min(range(len(errs)), key=errs.__getitem__)
    return 0 < i < len(errs) - 1 and errs[-1] > errs[i] * 10 and errs[0] > errs[i]


from .evaluation import eval_I_plus  # noqa: E402,F401
