"""Exact rational linear algebra and a small exact simplex for feasibility.

Everything here works on lists of :class:`fractions.Fraction`; matrices are
lists of rows.  Sizes are desk-scale (a handful of rows/columns), so clarity
wins over speed.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple
Matrix = list


def frac(x) -> Fraction:
    """Parse an int, Fraction or ``"a/b"`` string into a Fraction.

    Floats are rejected so that exact inputs never pick up rounding.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {x!r}")


def fvec(xs: Iterable) -> tuple:
    return tuple(frac(x) for x in xs)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a):
    return tuple(c * x for x in a)


def matvec(M, v):
    return tuple(dot(row, v) for row in M)


def transpose(M):
    return [list(col) for col in zip(*M)]


def rref(M):
    """Reduced row echelon form. Returns (rows, pivot columns)."""
    A = [[frac(x) for x in row] for row in M]
    if not A:
        return [], []
    nrows, ncols = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(nrows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return A[:r], pivots


def rank(M) -> int:
    return len(rref(M)[1]) if M else 0


def nullspace(M, ncols: int | None = None):
    """Basis of {x : M x = 0} as a list of Fraction tuples."""
    if ncols is None:
        ncols = len(M[0]) if M else 0
    if not M:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    R, piv = rref(M)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, pc in zip(R, piv):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(M, b):
    """One exact solution of M x = b, or None if inconsistent."""
    ncols = len(M[0])
    aug = [list(row) + [frac(bi)] for row, bi in zip(M, b)]
    R, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(R, piv):
        x[pc] = row[-1]
    return tuple(x)


def inverse(M):
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def det(M) -> Fraction:
    A = [[frac(x) for x in row] for row in M]
    n = len(A)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return d


def primitive(v) -> tuple:
    """Scale a rational vector to the primitive integer vector on its ray."""
    v = fvec(v)
    if all(x == 0 for x in v):
        raise ValueError("zero vector has no primitive generator")
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints)
    return tuple(Fraction(i // g) for i in ints)


def lcm_of_minors(columns: Sequence[Sequence], r: int) -> int:
    """lcm of |det| over all nonzero r x r minors formed from the columns."""
    out = 1
    for sub in itertools.combinations(columns, r):
        d = det([list(c) for c in zip(*sub)])
        if d != 0:
            out = math.lcm(out, abs(int(d)))
    return out


# ---------------------------------------------------------------------------
# exact simplex (phase one only: we only ever need feasibility)
# ---------------------------------------------------------------------------

def _phase_one(A, b) -> bool:
    """Feasibility of {x >= 0 : A x = b} by Bland-rule simplex on artificials."""
    m = len(A)
    if m == 0:
        return True
    n = len(A[0])
    rows = []
    for row, bi in zip(A, b):
        row = [frac(x) for x in row]
        bi = frac(bi)
        if bi < 0:
            row = [-x for x in row]
            bi = -bi
        rows.append(row + [Fraction(int(i == len(rows))) for i in range(m)] + [bi])
    basis = [n + i for i in range(m)]
    ncol = n + m
    while True:
        cost = [Fraction(0)] * (ncol + 1)
        for i, bv in enumerate(basis):
            if bv >= n:
                cost = [c + x for c, x in zip(cost, rows[i])]
        # entering variable: first original column with positive reduced cost
        # (Bland); artificials that left the basis never come back
        enter = next((j for j in range(n) if j not in basis and cost[j] > 0), None)
        if enter is None or cost[-1] == 0:
            return cost[-1] == 0
        ratios = [(rows[i][-1] / rows[i][enter], basis[i], i)
                  for i in range(m) if rows[i][enter] > 0]
        if not ratios:
            return cost[-1] == 0
        _, _, piv = min(ratios)
        pr = rows[piv]
        inv = 1 / pr[enter]
        rows[piv] = [x * inv for x in pr]
        for i in range(m):
            if i != piv and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[piv])]
        basis[piv] = enter


def feasible(A_eq, b_eq, lower: Sequence | None = None, free: Sequence[bool] | None = None) -> bool:
    """Exact feasibility of {x : A_eq x = b_eq, x_i >= lower_i (or free)}.

    Free variables are split into differences of non-negative ones and
    lower bounds are shifted away, then an exact phase-one simplex decides.
    """
    A_eq = [[frac(x) for x in row] for row in A_eq]
    n = len(A_eq[0]) if A_eq else len(lower or free or [])
    lower = [frac(l) for l in (lower or [0] * n)]
    free = list(free or [False] * n)
    b = [frac(x) for x in b_eq]
    # x = lower + x' for bounded vars
    b = [bi - sum(row[j] * lower[j] for j in range(n) if not free[j]) for row, bi in zip(A_eq, b)]
    cols = []
    for j in range(n):
        cols.append([row[j] for row in A_eq])
        if free[j]:
            cols.append([-row[j] for row in A_eq])
    A = [list(r) for r in zip(*cols)] if cols else [[] for _ in A_eq]
    return _phase_one(A, b)


def strict_feasible_inequalities(normals: Sequence[Sequence], dim: int) -> bool:
    """Is {x in Q^dim : n . x > 0 for all normals} nonempty?

    Homogeneous, so equivalent to n . x >= 1; slack variables turn it into
    an equality system for :func:`feasible`.
    """
    if not normals:
        return True
    k = len(normals)
    A = []
    for i, nrm in enumerate(normals):
        A.append([frac(x) for x in nrm] + [Fraction(-int(i == j)) for j in range(k)])
    lower = [0] * dim + [1] * k
    free = [True] * dim + [False] * k
    return feasible(A, [0] * k, lower, free)
