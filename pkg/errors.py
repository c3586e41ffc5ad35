"""
Numbered error types for the Separation Bell toolkit
Every error carries a stable error number and a category that is written to the
error logs and to the machine-readable JSON reported by the command line.
"""

import json
import logging
import os
from datetime import datetime

logger = logging.getLogger(__name__)

LOGS_DIR = "logs"


class SeparationBellError(Exception):
    """Base class for every error raised by the toolkit"""

    error_number = 1
    category = "SEPARATION_BELL_ERROR"

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        payload = {
            'error': self.category,
            'error_number': self.error_number,
            'message': self.message,
        }
        if self.details:
            payload['details'] = {key: _jsonable(value) for key, value in self.details.items()}
        return payload

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


# Error Numbers 10-19: input and validation
class InputError(SeparationBellError):
    error_number = 10
    category = "INPUT_ERROR"


class BehaviorValidationError(SeparationBellError):
    error_number = 11
    category = "VALIDATION_ERROR"


class UnsupportedScenarioError(SeparationBellError):
    error_number = 12
    category = "UNSUPPORTED_SCENARIO"


class ScenarioMismatchError(SeparationBellError):
    error_number = 13
    category = "SCENARIO_MISMATCH"


class StructuralProofError(SeparationBellError):
    error_number = 14
    category = "PROOF_STRUCTURE_ERROR"


class ConfigurationError(SeparationBellError):
    error_number = 15
    category = "CONFIG_ERROR"


class ProofSyntaxError(SeparationBellError):
    error_number = 16
    category = "PARSING_ERROR"


# Error Numbers 20-29: size caps
class EnumerationCapError(SeparationBellError):
    error_number = 20
    category = "ENUMERATION_CAP"


class LPSizeError(SeparationBellError):
    error_number = 21
    category = "LP_SIZE_CAP"


# Error Numbers 30-39: solver
class LPFormulationError(SeparationBellError):
    error_number = 30
    category = "LP_FORMULATION_ERROR"


class CertificateError(SeparationBellError):
    error_number = 31
    category = "CERTIFICATE_ERROR"


def _jsonable(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return str(value)


def log_path_for(error, logs_dir=None):
    """Return the log file an error of this category is appended to"""
    directory = os.path.abspath(logs_dir or LOGS_DIR)
    return os.path.join(directory, f"{error.category.lower()}s.log")


def log_error(error, logs_dir=None, context=None):
    """Append a numbered error line to logs/<category>s.log

    Returns the path written, or None when the log could not be written.
    A failing log write never replaces the original error.
    """
    timestamp = datetime.now().strftime('%Y-%m-%d %H:%M:%S')
    path = log_path_for(error, logs_dir)
    line = f"[{timestamp}] ERROR#{error.error_number}: {error.category}: {error.message}"
    if context:
        line += f" | Context='{context}'"
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, 'a', encoding='utf-8') as f:
            f.write(line + "\n")
    except OSError as exc:
        logger.warning("Failed to log error #%s: %s", error.error_number, exc)
        return None
    return path
