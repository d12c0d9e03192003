"""Independent brute-force oracles for the combinatorial layer.

Nothing here calls into wallcross beyond reading fixture data: anticones
use a floating-point LP from scipy, boxes use a denominator-bounded scan and
cohomology dimensions come from Groebner bases (sympy) and from counting
maximal cones.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import sympy
from scipy.optimize import linprog


def strictly_positive_span(vectors, w) -> bool:
    """w = sum a_i v_i with every a_i > 0 (maximize the smallest coefficient)."""
    w = np.array([float(x) for x in w])
    if not vectors:
        return not np.any(w)
    V = np.array([[float(x) for x in v] for v in vectors]).T
    n = V.shape[1]
    # variables a_1..a_n, t ; maximize t subject to V a = w, a_i >= t, t <= 1
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=np.hstack([V, np.zeros((V.shape[0], 1))]), b_eq=w,
                  bounds=[(None, None)] * n + [(None, 1.0)], method="highs")
    return res.status == 0 and -res.fun > 1e-9


def closed_span(vectors, w) -> bool:
    w = np.array([float(x) for x in w])
    V = np.array([[float(x) for x in v] for v in vectors]).T
    res = linprog(np.zeros(V.shape[1]), A_eq=V, b_eq=w, bounds=[(0, None)] * V.shape[1], method="highs")
    return res.status == 0


def anticones(D, omega) -> set:
    m = len(D)
    return {I for size in range(m + 1) for I in itertools.combinations(range(m), size)
            if strictly_positive_span([D[i] for i in I], omega)}


def minimal(family) -> set:
    return {I for I in family if not any(set(J) < set(I) for J in family)}


def in_chamber_closure(D, family, x) -> bool:
    """x lies in the closure of every anticone of the family."""
    return all(closed_span([D[i] for i in I], x) for I in minimal(family))


def grid(r: int, radius: int = 4):
    return itertools.product(range(-radius, radius + 1), repeat=r)


def boxes(D, family, max_den: int = 12) -> set:
    """f in [0,1)^r with denominators up to max_den whose I_f is an anticone."""
    r = len(D[0])
    pts = set()
    for q in range(1, max_den + 1):
        for v in itertools.product(range(q), repeat=r):
            pts.add(tuple(Fraction(a, q) for a in v))
    out = set()
    for f in pts:
        I_f = tuple(j for j, Dj in enumerate(D) if sum(Fraction(a) * b for a, b in zip(Dj, f)).denominator == 1)
        if I_f in family:
            out.add(f)
    return out


def sector_dim_groebner(D, family, I_f) -> int:
    """dim Q[p]/(prod_{j in S} D_j.p : S subset I_f, I_f - S contains no anticone)."""
    r = len(D[0])
    ps = sympy.symbols(f"p0:{r}")
    u = {j: sum(int(D[j][i]) * ps[i] for i in range(r)) for j in I_f}
    gens = []
    for size in range(1, len(I_f) + 1):
        for S in itertools.combinations(I_f, size):
            rest = set(I_f) - set(S)
            if not any(set(A) <= rest for A in family):
                gens.append(sympy.expand(sympy.prod([u[j] for j in S])))
    G = sympy.groebner(gens, *ps, order="grevlex")
    leads = [sympy.Poly(g, *ps).monoms(order="grevlex")[0] for g in G.exprs]
    count = 0
    bound = len(I_f) + 2
    for mono in itertools.product(range(bound + 1), repeat=r):
        if not any(all(a >= b for a, b in zip(mono, lm)) for lm in leads):
            count += 1
    return count


def sector_dim_cones(D, family, I_f) -> int:
    """Number of r-element anticones inside I_f (maximal cones of the sector's fan)."""
    r = len(D[0])
    return sum(1 for A in family if len(A) == r and set(A) <= set(I_f))
