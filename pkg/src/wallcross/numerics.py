"""Numeric kernels: complex Gamma and polygamma, ray quadrature, E1, least squares."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import IllConditioned, PoleError, QuadratureFailure

# Lanczos approximation, g = 7, n = 9 (double precision coefficients)
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
EULER_GAMMA = 0.57721566490153286061


def _check_pole(s: complex):
    if s.imag == 0 and s.real <= 0 and float(s.real).is_integer():
        raise PoleError(f"Gamma has a pole at {s.real:g}")


def _lanczos_log(s: complex) -> complex:
    """log Gamma(s) for Re(s) >= 1/2."""
    s = s - 1
    x = _LANCZOS[0]
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS[i] / (s + i)
    t = s + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (s + 0.5) * cmath.log(t) - t + cmath.log(x)


def loggamma(s) -> complex:
    """A branch of log Gamma(s); exp(loggamma(s)) = Gamma(s)."""
    s = complex(s)
    _check_pole(s)
    if s.real < 0.5:
        return cmath.log(math.pi / cmath.sin(math.pi * s)) - _lanczos_log(1 - s)
    return _lanczos_log(s)


def gamma(s) -> complex:
    s = complex(s)
    _check_pole(s)
    if s.real < 0.5:
        return math.pi / (cmath.sin(math.pi * s) * gamma(1 - s))
    # recurse up a little so the Lanczos sum works where it is most accurate
    shift = 1.0 + 0j
    while s.real < 8:
        shift *= s
        s += 1
    return cmath.exp(_lanczos_log(s)) / shift


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2."""
    if n == 0:
        return Fraction(1)
    return -sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n)) / (n + 1)


def polygamma(n: int, s) -> complex:
    """psi^(n)(s) by upward recurrence and the asymptotic series."""
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and float(s.real).is_integer():
        raise PoleError(f"polygamma has a pole at {s.real:g}")
    acc = 0j
    sign = (-1) ** n
    fact = math.factorial(n)
    while abs(s) < 25 or s.real < 10:
        # psi^(n)(s) = psi^(n)(s+1) - (-1)^n n! / s^(n+1)
        acc -= sign * fact / s ** (n + 1)
        s += 1
    if n == 0:
        val = cmath.log(s) - 1 / (2 * s)
        for k in range(1, 12):
            val -= float(bernoulli(2 * k)) / (2 * k * s ** (2 * k))
    else:
        val = math.factorial(n - 1) / s ** n + fact / (2 * s ** (n + 1))
        for k in range(1, 12):
            val += float(bernoulli(2 * k)) * math.factorial(2 * k + n - 1) / (math.factorial(2 * k) * s ** (2 * k + n))
        val *= (-1) ** (n + 1)
    return val + acc


def nilpotent_gamma_expand(s, order: int) -> list:
    """Coefficients c_0..c_{order-1} with Gamma(s + eps) = sum c_n eps^n (mod eps^order)."""
    g = gamma(s)
    # log Gamma(s+eps) - log Gamma(s) = sum_{n>=1} psi^(n-1)(s) eps^n / n!
    L = [0j] + [polygamma(n - 1, s) / math.factorial(n) for n in range(1, order)]
    # exp of a power series without constant term
    E = [0j] * order
    E[0] = 1 + 0j
    for n in range(1, order):
        E[n] = sum(k * L[k] * E[n - k] for k in range(1, n + 1)) / n
    return [g * e for e in E]


def rgamma_expand(s, order: int) -> list:
    """Coefficients of 1/Gamma(s + eps) mod eps^order; finite at poles."""
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and float(s.real).is_integer():
        # 1/Gamma(s+eps) = (s+eps)(s+1+eps)...(eps) / Gamma(1+eps) with s = -m
        m = int(-s.real)
        poly = [1 + 0j]
        for i in range(m + 1):
            a = -m + i
            new = [0j] * (len(poly) + 1)
            for k, c in enumerate(poly):
                new[k] += a * c
                new[k + 1] += c
            poly = new
        inv = _series_inverse(nilpotent_gamma_expand(1, order), order)
        return _series_mul(poly, inv, order)
    return _series_inverse(nilpotent_gamma_expand(s, order), order)


def _series_mul(a, b, order):
    out = [0j] * order
    for i, x in enumerate(a[:order]):
        for j, y in enumerate(b[: order - i]):
            out[i + j] += x * y
    return out


def _series_inverse(a, order):
    out = [0j] * order
    out[0] = 1 / a[0]
    for n in range(1, order):
        out[n] = -sum(a[k] * out[n - k] for k in range(1, min(n, len(a) - 1) + 1)) / a[0]
    return out


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureConfig:
    angle: float = 0.0
    epsabs: float = 1e-13
    epsrel: float = 1e-12
    limit: int = 400
    tail: float = math.inf       # upper limit of the ray parameter


def integrate_ray(f, config: QuadratureConfig = QuadratureConfig()) -> tuple:
    """int_0^inf f(x) dx along x = t e^{i angle}; returns (value, error estimate)."""
    w = cmath.exp(1j * config.angle)

    def part(fn):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                return integrate.quad(fn, 0, config.tail, epsabs=config.epsabs, epsrel=config.epsrel,
                                      limit=config.limit)
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(str(exc)) from exc

    re, ere = part(lambda t: (f(t * w) * w).real)
    im, eim = part(lambda t: (f(t * w) * w).imag)
    return complex(re, im), math.hypot(ere, eim)


def expint_e1(u: float) -> float:
    """E_1(u) for u > 0: power series below 1, continued fraction above."""
    if u <= 0:
        raise ValueError("E1 needs u > 0")
    if u < 1:
        total, term, k = -EULER_GAMMA - math.log(u), 1.0, 1
        while True:
            term *= -u / k
            add = -term / k
            total += add
            if abs(add) < 1e-17 * abs(total):
                return total
            k += 1
    # modified Lentz for e^{-u} / (u + 1 - 1/(u + 3 - 4/(u + 5 - ...)))
    tiny = 1e-300
    b = u + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        a = -i * i
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-u)
    raise QuadratureFailure("continued fraction for E1 did not converge")


# ---------------------------------------------------------------------------
# dense linear algebra
# ---------------------------------------------------------------------------

def scaled_lstsq(A: np.ndarray, B: np.ndarray, rcond: float = 1e-13) -> tuple:
    """Least squares A X = B with column scaling; returns (X, singular values of scaled A)."""
    A = np.asarray(A, dtype=complex)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise IllConditioned("a column of the sample matrix vanishes")
    As = A / norms
    X, _, rank, sv = np.linalg.lstsq(As, B, rcond=rcond)
    if rank < A.shape[1]:
        raise IllConditioned(f"sample matrix has rank {rank} < {A.shape[1]}")
    return X / norms[:, None], sv


def numeric_rank(M: np.ndarray, rtol: float = 1e-6) -> int:
    sv = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))
