"""
Run timing and memory report for command-line runs
Records wall time and resident memory around each command
"""

import gc
import logging
import time
from contextlib import contextmanager
from datetime import datetime

import psutil

logger = logging.getLogger(__name__)


class PerformanceMonitor:
    """Wall time and resident memory per tracked command"""

    MAX_MEMORY_MB = 2000

    def __init__(self):
        self.process = psutil.Process()
        self.started = time.time()
        self.records = []
        self.memory_peaks = []

    def get_memory_usage(self):
        """Current resident memory in MB"""
        try:
            return self.process.memory_info().rss / 1024 / 1024
        except psutil.Error:
            return 0.0

    def sample(self):
        memory_mb = self.get_memory_usage()
        self.memory_peaks.append({'timestamp': datetime.now(), 'memory_mb': memory_mb})
        if len(self.memory_peaks) > 100:
            self.memory_peaks = self.memory_peaks[-100:]
        return memory_mb

    @contextmanager
    def track(self, name):
        before = self.sample()
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            after = self.sample()
            self.records.append({'command': name, 'seconds': elapsed,
                                 'memory_before_mb': before, 'memory_after_mb': after})
            logger.debug("%s took %.3f s, memory %.1f -> %.1f MB", name, elapsed, before, after)
            if after > self.MAX_MEMORY_MB:
                logger.warning("High memory usage after %s: %.1f MB", name, after)
                gc.collect()

    def get_performance_report(self):
        """Short text report of every tracked command"""
        memory_mb = self.get_memory_usage()
        peaks = [p['memory_mb'] for p in self.memory_peaks] or [memory_mb]
        lines = [
            "",
            "📊 PERFORMANCE REPORT",
            "=" * 50,
            f"🕐 Total Time: {time.time() - self.started:.3f} s",
            f"💾 Current Memory: {memory_mb:.1f} MB",
            f"📈 Average Memory: {sum(peaks) / len(peaks):.1f} MB",
            f"🔝 Peak Memory: {max(peaks):.1f} MB",
        ]
        for record in self.records:
            lines.append(f"⏱️ {record['command']}: {record['seconds']:.3f} s "
                         f"({record['memory_before_mb']:.1f} -> {record['memory_after_mb']:.1f} MB)")
        return "\n".join(lines) + "\n"
