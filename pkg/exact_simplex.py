"""
Exact rational simplex

Minimizes c.x subject to A x = b, x >= 0 with a dense Fraction tableau, two
phases and Bland's rule, so it always terminates. Meant for small instances
where a floating-point certificate could not be closed exactly.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List

from errors import LPFormulationError

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass
class ExactSolution:
    value: Fraction
    x: List[Fraction]
    y: List[Fraction]
    pivots: int


class _Tableau:

    def __init__(self, rows, b):
        m = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.signs = [1 if bi >= 0 else -1 for bi in b]
        self.rows = []
        for i, (row, bi) in enumerate(zip(rows, b)):
            s = self.signs[i]
            artificial = [Fraction(1) if k == i else ZERO for k in range(m)]
            self.rows.append([Fraction(s * v) for v in row] + artificial + [Fraction(s * bi)])
        self.basis = [self.n + i for i in range(m)]
        self.pivots = 0

    def pivot(self, i, j):
        pivot_row = self.rows[i]
        p = pivot_row[j]
        pivot_row[:] = [v / p for v in pivot_row]
        nonzero = [k for k, v in enumerate(pivot_row) if v]
        for r, row in enumerate(self.rows):
            if r == i:
                continue
            f = row[j]
            if f:
                for k in nonzero:
                    row[k] -= f * pivot_row[k]
        self.basis[i] = j
        self.pivots += 1

    def objective(self, cost):
        return sum((cost[self.basis[i]] * row[-1] for i, row in enumerate(self.rows)), ZERO)

    def optimize(self, cost, allowed, max_pivots):
        while True:
            if self.pivots > max_pivots:
                raise LPFormulationError(f"Exact simplex exceeded {max_pivots} pivots")
            weighted = [(cost[b], row) for b, row in zip(self.basis, self.rows) if cost[b]]
            in_basis = set(self.basis)
            entering = None
            for j in allowed:
                if j in in_basis:
                    continue
                reduced = cost[j] - sum((cb * row[j] for cb, row in weighted), ZERO)
                if reduced < 0:
                    entering = j
                    break
            if entering is None:
                return
            leaving = None
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leaving]):
                        best, leaving = ratio, i
            if leaving is None:
                raise LPFormulationError("Linear program is unbounded")
            self.pivot(leaving, entering)


def solve_standard_form(rows, b, c, max_pivots=200000):
    """Exact optimum of min c.x, A x = b, x >= 0 with primal x and equality duals y"""
    m, n = len(rows), len(c)
    tableau = _Tableau(rows, b)

    phase_one = [ZERO] * n + [Fraction(1)] * m
    tableau.optimize(phase_one, range(n + m), max_pivots)
    if tableau.objective(phase_one) > 0:
        raise LPFormulationError("Linear program is infeasible")

    # drive remaining artificials out; rows where that is impossible are redundant
    redundant = []
    for i in range(len(tableau.rows)):
        if tableau.basis[i] < n:
            continue
        column = next((j for j in range(n) if tableau.rows[i][j]), None)
        if column is None:
            redundant.append(i)
        else:
            tableau.pivot(i, column)
    for i in reversed(redundant):
        del tableau.rows[i]
        del tableau.basis[i]
    if redundant:
        logger.debug("Dropped %d redundant equality rows", len(redundant))

    cost = [Fraction(v) for v in c] + [ZERO] * m
    tableau.optimize(cost, range(n), max_pivots)

    x = [ZERO] * n
    for i, j in enumerate(tableau.basis):
        x[j] = tableau.rows[i][-1]
    y = []
    for i in range(m):
        total = sum((cost[bj] * row[n + i] for bj, row in zip(tableau.basis, tableau.rows)), ZERO)
        y.append(tableau.signs[i] * total)
    value = sum((Fraction(cj) * xj for cj, xj in zip(c, x)), ZERO)
    logger.debug("Exact simplex finished after %d pivots, value %s", tableau.pivots, value)
    return ExactSolution(value, x, y, tableau.pivots)
