#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from setuptools import setup
import os
import sys

# Add the current directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

setup(
    name="separation-bell",
    version="1.0.0",
    description="Separation Bell inequalities, monogamy relations and their local, no-signaling and GHZ bounds",
    author="Separation Bell Team",
    py_modules=[
        "bell_builder",
        "bounds_oracles",
        "chain_verifier",
        "errors",
        "exact_simplex",
        "monogamy_cli",
        "performance_monitor",
        "prob_core",
        "quantum_ghz",
        "run_config",
        "separation_metrics",
    ],
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.9.0",
        "pandas>=1.3.0",
        "psutil>=5.0.0",
        "openpyxl>=3.0.0"
    ],
    python_requires=">=3.8",
    include_package_data=True,
    package_data={
        "": ["*.json", "*.md", "*.txt"]
    },
    entry_points={
        "console_scripts": [
            "separation-bell=monogamy_cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Physics",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="bell inequality monogamy no-signaling linear programming ghz",
)
