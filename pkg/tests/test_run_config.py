"""
Tests for configuration loading and numbered error logging
"""

import json
import os
import shutil
import sys
import tempfile
import unittest
from unittest.mock import patch

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import (BehaviorValidationError, CertificateError, ConfigurationError, EnumerationCapError, InputError,
                    LPFormulationError, LPSizeError, ProofSyntaxError, ScenarioMismatchError,
                    SeparationBellError, StructuralProofError, UnsupportedScenarioError, log_error, log_path_for)
from run_config import (DEFAULT_CONFIG, ENV_ENUMERATION_CAP, ENV_LOGS_DIR, RunConfig, enumeration_cap,
                        load_config, save_config)


class TestLoadConfig(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.env = patch.dict(os.environ, {}, clear=False)
        self.env.start()
        os.environ.pop(ENV_ENUMERATION_CAP, None)
        os.environ.pop(ENV_LOGS_DIR, None)

    def tearDown(self):
        self.env.stop()
        if os.path.exists(self.test_dir):
            shutil.rmtree(self.test_dir)

    def _write(self, name, content):
        path = os.path.join(self.test_dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(content)
        return path

    def test_01_defaults(self):
        print("\n🧪 Testing default configuration...")
        config = load_config()
        self.assertEqual(config["enumeration"]["cap"], 10 ** 8)
        self.assertEqual(config["tolerances"]["lp"], 1e-7)
        self.assertEqual(config["output"]["logs_dir"], "logs")

    def test_02_nested_merge(self):
        path = self._write("config.json", json.dumps({"tolerances": {"lp": 1e-5}, "quantum": {"d_max": 20}}))
        config = load_config(path)
        self.assertEqual(config["tolerances"]["lp"], 1e-5)
        self.assertEqual(config["tolerances"]["numeric"], DEFAULT_CONFIG["tolerances"]["numeric"])
        self.assertEqual(config["quantum"]["d_max"], 20)
        self.assertEqual(DEFAULT_CONFIG["tolerances"]["lp"], 1e-7)

    def test_03_bad_files(self):
        with self.assertRaises(ConfigurationError):
            load_config(os.path.join(self.test_dir, "missing.json"))
        with self.assertRaises(ConfigurationError):
            load_config(self._write("broken.json", "{not json"))
        with self.assertRaises(ConfigurationError):
            load_config(self._write("list.json", "[1, 2]"))

    def test_04_environment_overrides(self):
        print("\n🧪 Testing environment overrides...")
        os.environ[ENV_ENUMERATION_CAP] = "5000"
        os.environ[ENV_LOGS_DIR] = self.test_dir
        config = load_config()
        self.assertEqual(config["enumeration"]["cap"], 5000)
        self.assertEqual(config["output"]["logs_dir"], self.test_dir)
        self.assertEqual(enumeration_cap(), 5000)

    def test_05_invalid_environment_cap(self):
        for raw in ("lots", "0", "-3"):
            os.environ[ENV_ENUMERATION_CAP] = raw
            with self.assertRaises(ConfigurationError, msg=raw):
                load_config()

    def test_06_save_and_reload(self):
        path = os.path.join(self.test_dir, "saved.json")
        config = load_config()
        config["lp"]["max_variables"] = 1234
        save_config(config, path)
        self.assertEqual(load_config(path)["lp"]["max_variables"], 1234)


class TestRunConfig(unittest.TestCase):

    def test_01_valid(self):
        run = RunConfig("bound ns", source="primary_ABC_ABD", exact=True)
        self.assertEqual(run.tolerance, 1e-7)
        self.assertEqual(run.workers, 1)
        self.assertIsNone(run.output)

    def test_02_invalid(self):
        with self.assertRaises(InputError):
            RunConfig("")
        with self.assertRaises(InputError):
            RunConfig("bound lr", tolerance=0.0)
        with self.assertRaises(InputError):
            RunConfig("bound lr", workers=0)


class TestErrors(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        if os.path.exists(self.test_dir):
            shutil.rmtree(self.test_dir)

    def test_01_error_numbers(self):
        print("\n🧪 Testing error numbers...")
        expected = {
            InputError: 10, BehaviorValidationError: 11, UnsupportedScenarioError: 12,
            ScenarioMismatchError: 13, StructuralProofError: 14, ConfigurationError: 15,
            ProofSyntaxError: 16, EnumerationCapError: 20, LPSizeError: 21,
            LPFormulationError: 30, CertificateError: 31,
        }
        for error_type, number in expected.items():
            self.assertEqual(error_type.error_number, number)
            self.assertTrue(issubclass(error_type, SeparationBellError))
        self.assertEqual(len({t.category for t in expected}), len(expected))

    def test_02_json_payload(self):
        error = ProofSyntaxError("Line 3: unknown keyword 'FOO'", line=3)
        payload = json.loads(error.to_json())
        self.assertEqual(payload, {
            "error": "PARSING_ERROR",
            "error_number": 16,
            "message": "Line 3: unknown keyword 'FOO'",
            "details": {"line": 3},
        })
        self.assertNotIn("details", InputError("bad").to_dict())

    def test_03_log_line(self):
        error = CertificateError("residual too large")
        path = log_error(error, self.test_dir, context="bound ns --n 3")
        self.assertEqual(path, log_path_for(error, self.test_dir))
        self.assertTrue(path.endswith("certificate_errors.log"))
        with open(path, 'r', encoding='utf-8') as f:
            line = f.read().strip()
        self.assertRegex(line, r"^\[\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}\] ERROR#31: CERTIFICATE_ERROR: "
                               r"residual too large \| Context='bound ns --n 3'$")

    def test_04_log_appends(self):
        log_error(InputError("first"), self.test_dir)
        path = log_error(InputError("second"), self.test_dir)
        with open(path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[1].endswith("ERROR#10: INPUT_ERROR: second"))

    def test_05_log_failure_returns_none(self):
        with patch('builtins.open', side_effect=OSError("disk full")):
            self.assertIsNone(log_error(InputError("lost"), self.test_dir))


if __name__ == '__main__':
    unittest.main()
