"""Floating-point evaluation of I-functions at a point.

Points are given in log-coordinates (log y_1, ..., log y_r) so that the
branch of y^n = exp(n . log y) and of the sigma-prefactor is fixed by the
caller.  Each Gamma-quotient factor is stored as exp(log-scale) times a
well-scaled matrix, so partial products neither overflow nor underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import linalg as la
from .errors import NoConvergence, SectorNotInFan
from .git_core import in_closed_cone
from .ifunction import Side, TwistData

TermMap = Callable[[tuple, int, np.ndarray], np.ndarray]


def _matrix(rows) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in rows], dtype=complex)


@dataclass
class BlockSum:
    """Per-block partial sums before the sigma prefactor is applied."""
    n_lo: tuple
    vectors: dict                # sector -> summed vector
    n_terms: int
    last_term: float             # size of the last included term
    tail_bound: float            # ratio-test majorant (plus) or smallest term (minus)
    peak: float


class NumericSide:
    """Numeric I-function of one side at a fixed z."""

    def __init__(self, side: Side, z: complex):
        if z == 0:
            raise ValueError("z must be nonzero")
        self.side = side
        self.z = complex(z)
        self.space = side.space
        self.U = []
        self.theta_p = []
        for R in self.space.rings:
            self.U.append([_matrix(R.mult_matrix(R.restrict_u(j))) if R.dim else np.zeros((0, 0))
                           for j in range(side.data.m)])
            self.theta_p.append([_matrix(R.mult_matrix(R.theta(p))) for p in side.p])
        self._units = [np.array([complex(x) for x in R.one()]) for R in self.space.rings]
        self._factor_cache = {}
        self._sector_cache = {}
        self._Pinv = la.inverse(side.P)

    # -- coefficients -------------------------------------------------------

    def theta_matrix(self, s: int, xi) -> np.ndarray:
        R = self.space.rings[s]
        return _matrix(R.mult_matrix(R.theta(xi)))

    def _factor(self, s: int, j: int, t: Fraction) -> tuple:
        """(log-scale, matrix) of the j-th Gamma quotient at D_j.k = t in sector s."""
        key = (s, j, t)
        hit = self._factor_cache.get(key)
        if hit is not None:
            return hit
        dim = self.space.rings[s].dim
        eye = np.eye(dim, dtype=complex)
        U = self.U[s][j]
        if -1 < t <= 0:
            out = (0j, eye)
        elif t > 0:
            prev = self._factor(s, j, t - 1) if t > 1 else (0j, eye)
            az = complex(t) * self.z
            out = (prev[0] - cmath.log(az), prev[1] @ np.linalg.inv(eye + U / az))
        else:
            prev = self._factor(s, j, t + 1)
            a = t + 1
            if a == 0:
                out = (prev[0], prev[1] @ U)
            else:
                az = complex(a) * self.z
                out = (prev[0] + cmath.log(az), prev[1] @ (eye + U / az))
        self._factor_cache[key] = out
        return out

    def sector(self, k) -> int:
        key = tuple(x - math.floor(x) for x in k)
        hit = self._sector_cache.get(key)
        if hit is None:
            try:
                hit = self.space.sector_of(tuple(-x for x in k))
            except SectorNotInFan:
                hit = -1
            self._sector_cache[key] = hit
        return hit

    def term(self, k, s: int) -> tuple:
        """(log-scale, vector) with I_k = exp(log-scale) * vector in sector s."""
        dim = self.space.rings[s].dim
        M = np.eye(dim, dtype=complex)
        log = 0j
        for j, Dj in enumerate(self.side.data.D):
            lg, F = self._factor(s, j, la.dot(Dj, k))
            log += lg
            M = M @ F
        return log, M @ self._units[s]

    def k_of(self, n) -> tuple:
        return la.matvec(self._Pinv, la.fvec(n))

    # -- summation ----------------------------------------------------------

    def block(self, n_lo, logy, mode: str, tol: float = 1e-15, nmax: int = 400,
              term_map: Optional[TermMap] = None) -> BlockSum:
        """Sum the terms with fixed n_lo over n_r = 0, 1, 2, ...

        mode "convergent": stop once the ratio-test majorant of the tail is
        below tol times the running sum.  mode "asymptotic": sum up to (not
        including) the smallest term.
        """
        side = self.side
        r = side.r
        logy = np.asarray(logy, dtype=complex)
        terms = []
        sizes = []
        peak = 0.0
        total_norm = 0.0
        small_run = 0
        for n_r in range(nmax + 1):
            n = tuple(Fraction(x) for x in n_lo) + (Fraction(n_r),)
            k = self.k_of(n)
            s = self.sector(k)
            if s < 0 or not in_closed_cone(side.dual_cone, k):
                terms.append(None)
                sizes.append(0.0)
                continue
            lg, vec = self.term(k, s)
            if term_map is not None:
                vec = term_map(k, s, vec)
            lg += complex(np.dot([float(x) for x in n], logy))
            if lg.real < -700 or not np.any(vec):
                terms.append((s, np.zeros_like(vec)))
                sizes.append(0.0)
            else:
                v = cmath.exp(lg) * vec
                terms.append((s, v))
                sizes.append(float(np.max(np.abs(v))))
            peak = max(peak, sizes[-1])
            if mode == "convergent":
                total_norm = max(total_norm, peak)
                if n_r > 2 and sizes[-1] <= sizes[-2] and sizes[-2] <= sizes[-3]:
                    rho = sizes[-1] / sizes[-2] if sizes[-2] else 0.0
                    bound = sizes[-1] * rho / (1 - rho) if rho < 1 else math.inf
                    if rho < 0.5 and bound <= tol * max(total_norm, 1e-300):
                        small_run += 1
                        if small_run >= 3:
                            return self._collect(n_lo, terms, len(terms), sizes, bound, peak)
                    else:
                        small_run = 0
                if peak == 0.0 and n_r > 30:
                    return self._collect(n_lo, terms, len(terms), sizes, 0.0, 0.0)
        if mode == "convergent":
            raise NoConvergence(f"block {tuple(n_lo)} not converged by n_r = {nmax}")
        # asymptotic: index of the smallest nonzero term after the first nonzero one
        nz = [i for i, x in enumerate(sizes) if x > 0]
        if not nz:
            return self._collect(n_lo, terms, 0, sizes, 0.0, 0.0)
        if nz[-1] < nmax - 20:
            # every later term vanishes exactly: the series terminates
            return self._collect(n_lo, terms, len(terms), sizes, 0.0, peak)
        imin = min(nz, key=lambda i: sizes[i])
        if imin == nz[-1] and len(nz) > 1 and sizes[nz[-1]] < sizes[nz[-2]]:
            raise NoConvergence(f"block {tuple(n_lo)}: terms still decreasing at n_r = {nmax}")
        return self._collect(n_lo, terms, imin, sizes, sizes[imin], peak)

    def _collect(self, n_lo, terms, upto, sizes, tail, peak) -> BlockSum:
        vectors = {}
        for t in terms[:upto]:
            if t is None:
                continue
            s, v = t
            vectors[s] = vectors[s] + v if s in vectors else v.copy()
        last = next((x for x in reversed(sizes[:upto]) if x), 0.0)
        return BlockSum(tuple(n_lo), vectors, upto, last, tail, peak)

    def sigma_apply(self, vectors: dict, logy) -> np.ndarray:
        """z * e^{sigma/z} applied sector by sector; returns the full CR vector."""
        out = np.zeros(self.space.dim, dtype=complex)
        offs = self.space.offsets
        for s, v in vectors.items():
            N = sum(complex(l) * T for l, T in zip(logy, self.theta_p[s])) / self.z
            acc = v.copy()
            cur = v.copy()
            for i in range(1, len(v) + 1):
                cur = N @ cur / i
                if not np.any(cur):
                    break
                acc = acc + cur
            out[offs[s]: offs[s] + len(v)] = self.z * acc
        return out

    def evaluate_blocks(self, logy, mode: str, n_lo_max: int = 8, tol: float = 1e-15, nmax: int = 400,
                        term_map: Optional[TermMap] = None) -> dict:
        """Block vectors (sigma applied) for every n_lo in the box [0, n_lo_max]^{r-1}.

        Blocks are dropped once they fall below tol relative to the largest.
        """
        import itertools
        r = self.side.r
        out = {}
        for n_lo in itertools.product(range(n_lo_max + 1), repeat=r - 1):
            b = self.block(n_lo, logy, mode, tol=tol, nmax=nmax, term_map=term_map)
            if b.vectors:
                out[tuple(n_lo)] = (self.sigma_apply(b.vectors, logy), b)
        return out


def eval_I(side: Side, logy, z: complex, mode: str = "convergent", n_lo_max: int = 8, tol: float = 1e-15,
           nmax: int = 400, term_map: Optional[TermMap] = None) -> np.ndarray:
    ns = NumericSide(side, z)
    blocks = ns.evaluate_blocks(logy, mode, n_lo_max, tol, nmax, term_map)
    total = np.zeros(side.space.dim, dtype=complex)
    for vec, _ in blocks.values():
        total += vec
    return total


def eval_I_plus(side: Side, logy, z: complex, tol: float = 1e-15, nmax: int = 400, n_lo_max: int = 8,
                term_map: Optional[TermMap] = None) -> np.ndarray:
    """Plus-side I-function at a point, summed until the tail majorant is below tol."""
    return eval_I(side, logy, z, "convergent", n_lo_max, tol, nmax, term_map)


# ---------------------------------------------------------------------------
# term maps for twisted functions and operator words
# ---------------------------------------------------------------------------

def twist_term_map(ns: NumericSide, twist: TwistData, euler: bool = True) -> TermMap:
    """Multiply I_k by e(E) prod_j prod_{a=1}^{E_j.k} (theta(E_j) + a z)."""
    def fn(k, s, vec):
        for E in twist.E:
            V = ns.theta_matrix(s, E)
            t = la.dot(E, k)
            for a in range(1, int(t) + 1):
                vec = V @ vec + a * ns.z * vec
            if euler:
                vec = V @ vec
        return vec
    return fn


def word_term_map(ns: NumericSide, twist: TwistData) -> TermMap:
    """The word prod_{a=0}^{E.k} (z dbar - a z) acting termwise on z e^{sigma/z} y^k I_k.

    z dbar_E multiplies a term by theta(E) + z (E.k).
    """
    def fn(k, s, vec):
        for E in twist.E:
            V = ns.theta_matrix(s, E)
            t = la.dot(E, k)
            for a in range(int(t) + 1):
                vec = V @ vec + (t - a) * ns.z * vec
        return vec
    return fn
