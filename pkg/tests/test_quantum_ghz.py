"""
Tests for GHZ behaviors and their values on the separation and quasi inequalities
"""

import os
import sys
import unittest

import numpy as np
import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from bell_builder import build_separation_bell
from errors import InputError, UnsupportedScenarioError
from prob_core import validate_no_signaling
from quantum_ghz import (QubitPlan, QuditPlan, StateVector, conjugate_plan, default_qubit_plan, figure3_sweep,
                         fourier_basis, ghz_qubit_behavior, ghz_qubit_closed_form_table, ghz_qudit_behavior,
                         ghz_state, canonical_qudit_plan, quantum_separation_value, qubit_basis,
                         qudit_statevector_behavior, separation_closed_form, statevector_behavior,
                         zg_value_direct, zg_value_reduced)
from separation_metrics import SeparationTerm, separation_value


class TestQubitGHZ(unittest.TestCase):

    def test_01_tripartite_violation(self):
        print("\n🧪 Testing the GHZ value of the tripartite inequality...")
        self.assertAlmostEqual(quantum_separation_value(3), -1.0, delta=1e-9)

    def test_02_more_parties(self):
        self.assertAlmostEqual(quantum_separation_value(4), -0.75, delta=1e-9)
        self.assertAlmostEqual(quantum_separation_value(5), -1.0, delta=1e-9)
        self.assertLess(quantum_separation_value(6), 0.0)

    def test_03_even_closed_form(self):
        plan = default_qubit_plan(4)
        terms = build_separation_bell(tuple("ABCD")).terms
        value = 0.0
        for signed in terms:
            settings = tuple(s for _, s in signed.term.factors)
            value += signed.sign * separation_closed_form(4, plan.total_angle(settings))
        self.assertAlmostEqual(value, -0.75, delta=1e-9)

    def test_04_closed_form_matches_state_vector(self):
        print("\n🧪 Testing closed form against the state-vector oracle...")
        rng = np.random.default_rng(17)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(2, 7))
            plan = QubitPlan(tuple(tuple(pair) for pair in rng.uniform(0, 2 * np.pi, size=(n, 2))))
            direct = ghz_qubit_behavior(n, plan).table
            worst = max(worst, float(np.abs(direct - ghz_qubit_closed_form_table(n, plan)).max()))
        self.assertLessEqual(worst, 1e-10)

    def test_05_behavior_is_no_signaling(self):
        behavior = ghz_qubit_behavior(4, default_qubit_plan(4))
        self.assertTrue(validate_no_signaling(behavior).passed)

    def test_06_plan_errors(self):
        with self.assertRaises(UnsupportedScenarioError):
            default_qubit_plan(1)
        with self.assertRaises(InputError):
            ghz_qubit_behavior(3, default_qubit_plan(4))
        with self.assertRaises(InputError):
            QubitPlan(((0.0, np.inf),))

    def test_07_separation_vanishes_at_half_turns(self):
        # total angle pi for setting 1: (1 + cos pi) / 2 = 0
        plan = QubitPlan(((0.0, 0.3), (np.pi / 2, 0.3), (np.pi / 2, 0.3)))
        behavior = ghz_qubit_behavior(3, plan)
        self.assertAlmostEqual(separation_value(behavior, SeparationTerm.parse("A1B1C1")), 0.0, delta=1e-12)


class TestStateVectors(unittest.TestCase):

    def test_01_ghz_norm(self):
        state = ghz_state(3, 4)
        self.assertEqual(state.d, 4)
        self.assertEqual(state.n_parties, 3)
        self.assertAlmostEqual(float(np.sum(np.abs(state.amplitudes) ** 2)), 1.0, places=12)
        with self.assertRaises(InputError):
            StateVector(np.ones((2, 2)))

    def test_02_bases_are_orthonormal(self):
        for basis in (qubit_basis(0.7), fourier_basis(5, 0.3), fourier_basis(5, 0.3, conjugate=True)):
            np.testing.assert_allclose(basis @ basis.conj().T, np.eye(basis.shape[0]), atol=1e-12)

    def test_03_rejects_bad_basis(self):
        bad = np.array([[1.0, 0.0], [1.0, 0.0]])
        bases = [[bad, bad]] * 2
        with self.assertRaises(InputError):
            statevector_behavior(ghz_state(2), bases)
        with self.assertRaises(InputError):
            statevector_behavior(ghz_state(3), [[qubit_basis(0), qubit_basis(0)]] * 2)


class TestQuditGHZ(unittest.TestCase):

    def test_01_qubit_value(self):
        print("\n🧪 Testing the d=2 quasi-distance value...")
        plan = canonical_qudit_plan(2)
        self.assertAlmostEqual(zg_value_reduced(2, plan), -0.25, delta=1e-9)
        self.assertAlmostEqual(zg_value_direct(2, plan), -0.25, delta=1e-9)

    def test_02_reduction_matches_direct_sum(self):
        for d in range(2, 11):
            plan = canonical_qudit_plan(d)
            self.assertAlmostEqual(zg_value_reduced(d, plan), zg_value_direct(d, plan), delta=1e-12, msg=f"d={d}")

    def test_03_closed_form_matches_state_vector(self):
        for d in (2, 3, 4):
            plan = canonical_qudit_plan(d)
            np.testing.assert_allclose(ghz_qudit_behavior(d, plan).table,
                                       qudit_statevector_behavior(d, plan).table, atol=1e-10)

    def test_04_swap_symmetry_under_conjugation(self):
        for d in (3, 5, 8):
            plan = canonical_qudit_plan(d)
            self.assertAlmostEqual(zg_value_reduced(d, conjugate_plan(plan), direction_swapped=True),
                                   zg_value_reduced(d, plan), delta=1e-12)

    def test_05_behavior_is_no_signaling(self):
        self.assertTrue(validate_no_signaling(ghz_qudit_behavior(5, canonical_qudit_plan(5))).passed)

    def test_06_plan_errors(self):
        with self.assertRaises(UnsupportedScenarioError):
            QuditPlan(1, (0, 0), (0, 0), (0, 0))
        with self.assertRaises(InputError):
            QuditPlan(3, (0,), (0, 0), (0, 0))


class TestFigure3Sweep(unittest.TestCase):

    def test_01_all_negative(self):
        print("\n🧪 Testing the quantum sweep over d...")
        frame = figure3_sweep(2, 50)
        self.assertEqual(list(frame.columns), ["d", "value"])
        self.assertEqual(len(frame), 49)
        self.assertTrue((frame["value"] < -1e-6).all())
        self.assertAlmostEqual(float(frame["value"].iloc[0]), -0.25, delta=1e-9)

    def test_02_workers_do_not_change_result(self):
        pd.testing.assert_frame_equal(figure3_sweep(2, 12, workers=3), figure3_sweep(2, 12))

    def test_03_range_errors(self):
        with self.assertRaises(InputError):
            figure3_sweep(1, 5)
        with self.assertRaises(InputError):
            figure3_sweep(6, 5)
        with self.assertRaises(InputError):
            figure3_sweep(2, 500)


if __name__ == '__main__':
    unittest.main()
