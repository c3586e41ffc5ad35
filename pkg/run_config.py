"""
Configuration layer for the Separation Bell toolkit
Defaults live in DEFAULT_CONFIG; config.json next to this module (or any path
given explicitly) is merged on top, then environment overrides are applied.
"""

import copy
import json
import logging
import os
from dataclasses import dataclass
from typing import Optional

from errors import ConfigurationError, InputError

logger = logging.getLogger(__name__)

CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config.json")

ENV_ENUMERATION_CAP = "SEPBELL_ENUMERATION_CAP"
ENV_LOGS_DIR = "SEPBELL_LOGS_DIR"

# Default configuration
DEFAULT_CONFIG = {
    "tolerances": {
        "analytic": 1e-12,
        "numeric": 1e-9,
        "lp": 1e-7,
        "dual_residual": 1e-8,
    },
    "enumeration": {
        "cap": 10 ** 8,
        "binary_party_cap": 8,
        "chunk_size": 65536,
        "workers": 1,
    },
    "lp": {
        "max_variables": 20000,
        "method": "highs",
    },
    "exact": {
        "max_variables": 512,
        "max_denominator": 10 ** 6,
    },
    "quantum": {
        "d_max": 200,
        "figure3_workers": 1,
    },
    "output": {
        "logs_dir": "logs",
        "float_digits": 15,
    },
}


def _merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _apply_environment(config):
    raw_cap = os.environ.get(ENV_ENUMERATION_CAP)
    if raw_cap:
        try:
            cap = int(raw_cap)
        except ValueError:
            raise ConfigurationError(f"{ENV_ENUMERATION_CAP} must be an integer, got {raw_cap!r}")
        if cap <= 0:
            raise ConfigurationError(f"{ENV_ENUMERATION_CAP} must be positive, got {cap}")
        config["enumeration"]["cap"] = cap
    logs_dir = os.environ.get(ENV_LOGS_DIR)
    if logs_dir:
        config["output"]["logs_dir"] = logs_dir
    return config


def load_config(path=None):
    """Load configuration from file, falling back to the defaults"""
    config_path = path or CONFIG_PATH
    if not os.path.exists(config_path):
        if path is not None:
            raise ConfigurationError(f"Config file not found: {config_path}")
        return _apply_environment(copy.deepcopy(DEFAULT_CONFIG))
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            loaded = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot read config {config_path}: {e}")
    if not isinstance(loaded, dict):
        raise ConfigurationError(f"Config {config_path} must contain a JSON object")
    logger.debug("Loaded configuration from %s", config_path)
    return _apply_environment(_merge(DEFAULT_CONFIG, loaded))


def save_config(config, path=None):
    """Save configuration to file"""
    config_path = path or CONFIG_PATH
    try:
        with open(config_path, 'w', encoding='utf-8') as f:
            json.dump(config, f, indent=2)
    except OSError as e:
        raise ConfigurationError(f"Cannot write config {config_path}: {e}")


def enumeration_cap():
    """Strategy-count cap, honouring the environment override"""
    return _apply_environment(copy.deepcopy(DEFAULT_CONFIG))["enumeration"]["cap"]


@dataclass(frozen=True)
class RunConfig:
    """One command-line invocation, resolved against the loaded configuration"""

    command: str
    source: Optional[str] = None
    tolerance: float = DEFAULT_CONFIG["tolerances"]["lp"]
    exact: bool = False
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if not self.command:
            raise InputError("RunConfig needs exactly one command")
        if not self.tolerance > 0:
            raise InputError(f"Tolerance must be positive, got {self.tolerance}")
        if self.workers < 1:
            raise InputError(f"Workers must be at least 1, got {self.workers}")
