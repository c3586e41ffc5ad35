"""
Tests for the exact rational simplex
"""

import os
import sys
import unittest
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import LPFormulationError
from exact_simplex import solve_standard_form


def _reduced_costs(rows, c, y):
    return [Fraction(c[j]) - sum(Fraction(rows[i][j]) * y[i] for i in range(len(rows))) for j in range(len(c))]


class TestExactSimplex(unittest.TestCase):

    def test_01_small_program(self):
        print("\n🧪 Testing exact simplex optimum and duals...")
        rows = [[1, 1, 1, 0], [1, 3, 0, 1]]
        b = [4, 6]
        c = [-1, -2, 0, 0]
        solution = solve_standard_form(rows, b, c)
        self.assertEqual(solution.value, Fraction(-5))
        self.assertEqual(solution.x, [Fraction(3), Fraction(1), Fraction(0), Fraction(0)])
        self.assertEqual(sum(bi * yi for bi, yi in zip(b, solution.y)), solution.value)
        self.assertTrue(all(r >= 0 for r in _reduced_costs(rows, c, solution.y)))

    def test_02_negative_right_hand_side(self):
        rows = [[-1, 1, 0], [1, 1, 1]]
        b = [-1, 3]
        c = [0, -1, 0]
        solution = solve_standard_form(rows, b, c)
        self.assertEqual(solution.value, Fraction(-1))
        self.assertEqual(solution.x[0] - solution.x[1], Fraction(1))
        self.assertEqual(sum(bi * yi for bi, yi in zip(b, solution.y)), solution.value)
        self.assertTrue(all(r >= 0 for r in _reduced_costs(rows, c, solution.y)))

    def test_03_redundant_rows(self):
        solution = solve_standard_form([[1, 1], [2, 2]], [1, 2], [1, 2])
        self.assertEqual(solution.value, Fraction(1))
        self.assertEqual(solution.x, [Fraction(1), Fraction(0)])

    def test_04_fractional_optimum(self):
        solution = solve_standard_form([[3, 2, 1]], [1], [-1, -1, 0])
        self.assertEqual(solution.value, Fraction(-1, 2))

    def test_05_infeasible(self):
        with self.assertRaises(LPFormulationError):
            solve_standard_form([[1, 1]], [-1], [1, 1])

    def test_06_unbounded(self):
        with self.assertRaises(LPFormulationError):
            solve_standard_form([[1, -1]], [0], [-1, 0])


if __name__ == '__main__':
    unittest.main()
