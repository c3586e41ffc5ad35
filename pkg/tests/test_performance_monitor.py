"""
Tests for the run timing and memory report
"""

import os
import sys
import unittest
from unittest.mock import patch

import psutil

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from performance_monitor import PerformanceMonitor


class TestPerformanceMonitor(unittest.TestCase):

    def setUp(self):
        self.monitor = PerformanceMonitor()

    def test_01_track_records(self):
        print("\n🧪 Testing command tracking...")
        with self.monitor.track("bound ns"):
            sum(range(1000))
        self.assertEqual(len(self.monitor.records), 1)
        record = self.monitor.records[0]
        self.assertEqual(record['command'], "bound ns")
        self.assertGreaterEqual(record['seconds'], 0.0)
        self.assertGreater(record['memory_after_mb'], 0.0)
        self.assertEqual(len(self.monitor.memory_peaks), 2)

    def test_02_track_records_on_error(self):
        with self.assertRaises(ValueError):
            with self.monitor.track("verify chains"):
                raise ValueError("boom")
        self.assertEqual(self.monitor.records[0]['command'], "verify chains")

    def test_03_report(self):
        with self.monitor.track("figure3"):
            pass
        report = self.monitor.get_performance_report()
        self.assertIn("📊 PERFORMANCE REPORT", report)
        self.assertIn("💾 Current Memory:", report)
        self.assertIn("⏱️ figure3:", report)

    def test_04_memory_error(self):
        with patch.object(self.monitor.process, 'memory_info', side_effect=psutil.AccessDenied()):
            self.assertEqual(self.monitor.get_memory_usage(), 0.0)

    def test_05_peak_history_is_bounded(self):
        for _ in range(120):
            self.monitor.sample()
        self.assertEqual(len(self.monitor.memory_peaks), 100)


if __name__ == '__main__':
    unittest.main()
