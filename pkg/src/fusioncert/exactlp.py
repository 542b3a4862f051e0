"""Dense tableau simplex with Bland's rule over any exact ordered field.

Works with `fractions.Fraction` and with `Scalar` (Q(sqrt 2)); no floating
point is involved anywhere, so optimal bases, duals and Farkas vectors are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class LPResult:
    status: str                 # "optimal", "infeasible" or "unbounded"
    x: list | None = None       # primal solution (standard-form variables)
    objective: object = None
    duals: list | None = None   # y with c - y A >= 0 at the optimum
    farkas: list | None = None  # y with y A <= 0 and y b > 0 when infeasible
    ray: list | None = None     # direction with A d = 0, d >= 0, c d < 0 when unbounded
    pivots: int = 0


def _zero_like(v):
    return v - v


class _Tableau:
    def __init__(self, rows, rhs, basis, zero, one):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.zero = zero
        self.one = one
        self.pivots = 0

    def pivot(self, r: int, col: int):
        row = self.rows[r]
        p = row[col]
        inv = self.one / p
        self.rows[r] = row = [v * inv for v in row]
        self.rhs[r] = self.rhs[r] * inv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[col]
            if f != 0:
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
                self.rhs[i] = self.rhs[i] - f * self.rhs[r]
        self.basis[r] = col
        self.pivots += 1

    def reduced(self, cost, allowed):
        """Reduced costs c_j - c_B B^-1 A_j for the allowed columns."""
        n = len(cost)
        red = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb != 0:
                row = self.rows[i]
                for j in range(n):
                    if row[j] != 0:
                        red[j] = red[j] - cb * row[j]
        return red

    def run(self, cost, allowed, budget=None):
        """Minimize cost over the current basis; Bland's rule for entering and leaving."""
        while True:
            red = self.reduced(cost, allowed)
            enter = next((j for j in range(len(cost)) if allowed[j] and red[j] < 0), None)
            if enter is None:
                return "optimal", red
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best[0] or (ratio == best[0] and self.basis[i] < self.basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return "unbounded", (red, enter)
            self.pivot(best[1], enter)
            if budget is not None and self.pivots > budget:
                from .errors import BudgetExceeded
                raise BudgetExceeded(f"simplex exceeded {budget} pivots")


def solve_standard(c: Sequence, A: Sequence[Sequence], b: Sequence, budget: int | None = None) -> LPResult:
    """min c.x subject to A x = b, x >= 0."""
    m = len(A)
    n = len(c)
    sample = next((v for v in list(c) + list(b) + [v for r in A for v in r] if not isinstance(v, int)), Fraction(0))
    zero = _zero_like(sample) if not isinstance(sample, int) else Fraction(0)
    one = zero + 1
    conv = lambda v: zero + v
    rows, rhs, signs = [], [], []
    for i in range(m):
        r = [conv(v) for v in A[i]]
        bi = conv(b[i])
        s = one
        if bi < 0:
            r = [-v for v in r]
            bi = -bi
            s = -one
        art = [zero] * m
        art[i] = one
        rows.append(r + art)
        rhs.append(bi)
        signs.append(s)
    tab = _Tableau(rows, rhs, [n + i for i in range(m)], zero, one)
    total = n + m
    # phase one
    cost1 = [zero] * n + [one] * m
    status, red = tab.run(cost1, [True] * total, budget)
    infeas = sum((tab.rhs[i] for i, bcol in enumerate(tab.basis) if bcol >= n), zero)
    if infeas > 0:
        y = [(one - red[n + i]) * signs[i] for i in range(m)]
        return LPResult("infeasible", farkas=y, pivots=tab.pivots)
    # drive zero-level artificials out of the basis where possible
    for i, bcol in enumerate(tab.basis):
        if bcol >= n:
            col = next((j for j in range(n) if tab.rows[i][j] != 0), None)
            if col is not None:
                tab.pivot(i, col)
    cost2 = [conv(v) for v in c] + [zero] * m
    allowed = [True] * n + [False] * m
    status, info = tab.run(cost2, allowed, budget)
    x = [zero] * n
    for i, bcol in enumerate(tab.basis):
        if bcol < n:
            x[bcol] = tab.rhs[i]
    if status == "unbounded":
        red, enter = info
        d = [zero] * n
        d[enter] = one
        for i, bcol in enumerate(tab.basis):
            if bcol < n:
                d[bcol] = -tab.rows[i][enter]
        return LPResult("unbounded", x=x, ray=d, pivots=tab.pivots)
    red = info
    y = [-red[n + i] * signs[i] for i in range(m)]
    obj = sum((conv(ci) * xi for ci, xi in zip(c, x)), zero)
    return LPResult("optimal", x=x, objective=obj, duals=y, pivots=tab.pivots)


def maximize_ub(c: Sequence, A: Sequence[Sequence], b: Sequence, budget: int | None = None) -> LPResult:
    """max c.x subject to A x <= b with x free. Returns the optimal value in `objective`."""
    m = len(A)
    n = len(c)
    rows = []
    for i in range(m):
        slack = [0] * m
        slack[i] = 1
        rows.append(list(A[i]) + [-v for v in A[i]] + slack)
    cost = [-v for v in c] + list(c) + [0] * m
    res = solve_standard(cost, rows, b, budget)
    if res.status == "optimal":
        xs = res.x
        res.x = [xs[j] - xs[n + j] for j in range(n)]
        res.objective = -res.objective
    return res


def feasible_convex(points: Sequence[Sequence], target: Sequence, budget: int | None = None) -> LPResult:
    """Convex weights w >= 0, sum w = 1, sum w_k points[k] = target, or a Farkas vector."""
    dim = len(target)
    A = [[p[i] for p in points] for i in range(dim)] + [[1] * len(points)]
    b = list(target) + [1]
    return solve_standard([0] * len(points), A, b, budget)
