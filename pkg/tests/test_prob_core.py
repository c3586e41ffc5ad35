"""
Tests for behaviors, no-signaling validation and strategy enumeration
"""

import os
import shutil
import sys
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import BehaviorValidationError, EnumerationCapError, InputError, ScenarioMismatchError
from prob_core import (Behavior, DeterministicStrategy, Scenario, behavior_from_json, behavior_from_strategy,
                       behavior_to_json, check_enumeration_cap, enumerate_strategies, load_behavior,
                       mix_behaviors, permute_parties, save_behavior, strategy_block, uniform_behavior,
                       validate_no_signaling)


def _signaling_behavior():
    """Two parties; A announces B's setting, B always outputs 0"""
    scenario = Scenario(2)
    table = np.zeros(scenario.table_shape)
    for s_a in range(2):
        for s_b in range(2):
            table[s_a, s_b, s_b, 0] = 1.0
    return Behavior(scenario, table)


class TestScenario(unittest.TestCase):

    def test_01_shapes(self):
        scenario = Scenario(3)
        self.assertEqual(scenario.table_shape, (2,) * 6)
        self.assertEqual(scenario.table_size, 64)
        self.assertEqual(scenario.strategy_count, 64)
        self.assertEqual(scenario.labels, ("A", "B", "C"))
        self.assertEqual(Scenario(3, 3).strategy_count, 729)

    def test_02_invalid(self):
        print("\n🧪 Testing invalid scenarios...")
        with self.assertRaises(InputError):
            Scenario(1)
        with self.assertRaises(InputError):
            Scenario(2, labels=("A", "A"))
        with self.assertRaises(InputError):
            Scenario(2, n_outcomes=1)
        with self.assertRaises(InputError):
            Scenario(3).party_index("Z")

    def test_03_setting_tuples(self):
        tuples = list(Scenario(2).setting_tuples())
        self.assertEqual(tuples, [(1, 1), (1, 2), (2, 1), (2, 2)])


class TestBehavior(unittest.TestCase):

    def test_01_uniform_is_no_signaling(self):
        report = validate_no_signaling(uniform_behavior(Scenario(3, 3)))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.max_violation, 0.0, places=12)

    def test_02_validation_errors(self):
        scenario = Scenario(2)
        with self.assertRaises(BehaviorValidationError):
            Behavior(scenario, np.zeros((2, 2, 2)))
        with self.assertRaises(BehaviorValidationError):
            Behavior(scenario, np.zeros(scenario.table_shape))
        table = np.full(scenario.table_shape, 0.25)
        table[0, 0, 0, 0] = -0.25
        table[0, 0, 1, 1] = 0.75
        with self.assertRaises(BehaviorValidationError):
            Behavior(scenario, table)

    def test_03_signaling_detected(self):
        print("\n🧪 Testing signaling detection...")
        report = validate_no_signaling(_signaling_behavior())
        self.assertFalse(report.passed)
        self.assertEqual(report.per_party, (0.0, 1.0))
        self.assertEqual(report.max_violation, 1.0)

    def test_04_table_is_read_only(self):
        behavior = uniform_behavior(Scenario(2))
        with self.assertRaises(ValueError):
            behavior.table[0, 0, 0, 0] = 1.0

    def test_05_block_and_probability(self):
        strategy = DeterministicStrategy(((1, 0), (0, 1)))
        behavior = behavior_from_strategy(strategy, Scenario(2))
        self.assertTrue(behavior.is_deterministic())
        self.assertEqual(behavior.probability((1, 2), (1, 1)), 1.0)
        self.assertEqual(behavior.probability((2, 1), (0, 0)), 1.0)
        self.assertEqual(behavior.block((2, 2)).sum(), 1.0)

    def test_06_strategy_behaviors_are_no_signaling(self):
        for strategy in enumerate_strategies(Scenario(2, 3)):
            self.assertTrue(validate_no_signaling(behavior_from_strategy(strategy, Scenario(2, 3))).passed)

    def test_07_strategy_out_of_range(self):
        with self.assertRaises(InputError):
            behavior_from_strategy(DeterministicStrategy(((2, 0), (0, 0))), Scenario(2))
        with self.assertRaises(InputError):
            behavior_from_strategy(DeterministicStrategy(((0, 0),)), Scenario(2))

    def test_08_mix(self):
        first = behavior_from_strategy(DeterministicStrategy(((0, 0), (0, 0))), Scenario(2))
        second = behavior_from_strategy(DeterministicStrategy(((1, 1), (1, 1))), Scenario(2))
        mixed = mix_behaviors([first, second], [0.5, 0.5])
        self.assertEqual(mixed.probability((1, 1), (0, 0)), 0.5)
        self.assertTrue(validate_no_signaling(mixed).passed)
        with self.assertRaises(InputError):
            mix_behaviors([first, second], [0.7, 0.7])
        with self.assertRaises(ScenarioMismatchError):
            mix_behaviors([first, uniform_behavior(Scenario(2, 3))], [0.5, 0.5])

    def test_09_permute_parties(self):
        behavior = behavior_from_strategy(DeterministicStrategy(((1, 1), (0, 0))), Scenario(2))
        swapped = permute_parties(behavior, [1, 0])
        self.assertEqual(swapped.probability((1, 1), (0, 1)), 1.0)
        with self.assertRaises(InputError):
            permute_parties(behavior, [0, 0])

    def test_10_mixture_violation_bound(self):
        print("\n🧪 Testing the no-signaling violation of random mixtures...")
        rng = np.random.default_rng(31)
        scenario = Scenario(3)
        for _ in range(200):
            components = []
            for _ in range(3):
                table = rng.random(scenario.table_shape)
                table /= table.sum(axis=(3, 4, 5), keepdims=True)
                components.append(Behavior(scenario, table))
            weights = rng.dirichlet(np.ones(3))
            mixed = validate_no_signaling(mix_behaviors(components, weights))
            bound = sum(w * validate_no_signaling(c).max_violation for w, c in zip(weights, components))
            self.assertLessEqual(mixed.max_violation, bound + 1e-12)

    def test_11_relabeling_permutes_report(self):
        rng = np.random.default_rng(32)
        scenario = Scenario(3)
        table = rng.random(scenario.table_shape)
        table /= table.sum(axis=(3, 4, 5), keepdims=True)
        behavior = Behavior(scenario, table)
        original = validate_no_signaling(behavior).per_party
        for order in ([1, 2, 0], [2, 0, 1], [0, 2, 1]):
            permuted = validate_no_signaling(permute_parties(behavior, order))
            np.testing.assert_allclose(permuted.per_party, [original[k] for k in order], atol=1e-15)
            self.assertAlmostEqual(permuted.max_violation, max(original), places=15)


class TestStrategyEnumeration(unittest.TestCase):

    def test_01_order_and_count(self):
        print("\n🧪 Testing lexicographic strategy order...")
        strategies = list(enumerate_strategies(Scenario(2)))
        self.assertEqual(len(strategies), 16)
        self.assertEqual(len(set(strategies)), 16)
        self.assertEqual(strategies[0].outcomes, ((0, 0), (0, 0)))
        self.assertEqual(strategies[1].outcomes, ((0, 0), (0, 1)))
        self.assertEqual(strategies[-1].outcomes, ((1, 1), (1, 1)))

    def test_02_block_matches_enumeration(self):
        scenario = Scenario(3, 3)
        block = strategy_block(scenario, 100, 110)
        expected = list(enumerate_strategies(scenario, chunk_size=7))[100:110]
        self.assertEqual([DeterministicStrategy.from_array(row) for row in block], expected)

    def test_03_cap(self):
        with self.assertRaises(EnumerationCapError):
            check_enumeration_cap(Scenario(3), 10)
        self.assertEqual(check_enumeration_cap(Scenario(3), 64), 64)

    def test_04_cap_from_environment(self):
        with patch.dict(os.environ, {"SEPBELL_ENUMERATION_CAP": "10"}):
            with self.assertRaises(EnumerationCapError):
                list(enumerate_strategies(Scenario(3)))

    def test_05_cap_from_config(self):
        config = {"enumeration": {"cap": 20, "chunk_size": 4}}
        with self.assertRaises(EnumerationCapError):
            list(enumerate_strategies(Scenario(3), config=config))
        self.assertEqual(len(list(enumerate_strategies(Scenario(3), cap=64, config=config))), 64)
        self.assertEqual(len(list(enumerate_strategies(Scenario(2), config=config))), 16)


class TestBehaviorJson(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        if os.path.exists(self.test_dir):
            shutil.rmtree(self.test_dir)

    def test_01_save_and_load(self):
        print("\n🧪 Testing behavior JSON files...")
        rng = np.random.default_rng(3)
        scenario = Scenario(3, 3, labels=("A", "B", "D"))
        table = rng.random(scenario.table_shape)
        table /= table.sum(axis=(3, 4, 5), keepdims=True)
        behavior = Behavior(scenario, table)
        path = os.path.join(self.test_dir, "behavior.json")
        save_behavior(behavior, path)
        loaded = load_behavior(path)
        self.assertEqual(loaded.scenario, scenario)
        np.testing.assert_allclose(loaded.table, behavior.table, atol=1e-15)

    def test_02_keys(self):
        payload = behavior_to_json(uniform_behavior(Scenario(2)))
        self.assertEqual(sorted(payload["table"]), ["11", "12", "21", "22"])
        self.assertEqual(sorted(payload["table"]["11"]), ["00", "01", "10", "11"])
        self.assertNotIn("labels", payload["scenario"])

    def test_03_malformed(self):
        with self.assertRaises(InputError):
            behavior_from_json({"table": {}})
        with self.assertRaises(InputError):
            behavior_from_json({"scenario": {"parties": 2, "outcomes": 2}, "table": {"1x": {}}})
        with self.assertRaises(InputError):
            behavior_from_json({"scenario": {"parties": 2, "outcomes": 2}, "table": {"13": {}}})
        with self.assertRaises(InputError):
            load_behavior(os.path.join(self.test_dir, "missing.json"))


if __name__ == '__main__':
    unittest.main()
