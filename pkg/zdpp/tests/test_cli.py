# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""Tests for cli module."""

import csv
import io
import json

import pytest

from ..cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, build_config, build_parser, main
from ..correlation import asympt_const_A
from ..errors import ConfigError
from ..params import ZParams


def read_csv(text: str):
    return list(csv.DictReader(io.StringIO(text)))


class TestParser:
    """Test argument parsing and config assembly."""

    def test_flags_after_subcommand(self):
        """Test global flags are accepted after the subcommand."""
        args = build_parser().parse_args(["info", "--audit", "run.json", "--verbose"])
        assert str(args.audit) == "run.json"
        assert args.verbose

    def test_method_checked_per_kind(self):
        """Test a method foreign to the kind is a config error."""
        args = build_parser().parse_args(["eval", "rho1", "--x", "0.1", "--method", "kummer"])
        with pytest.raises(ConfigError):
            build_config(args)

    def test_tol_overrides_suite_tolerances(self):
        """Test --tol sets every tolerance the suite reads."""
        args = build_parser().parse_args(["verify", "lifting", "--tol", "0.5"])
        cfg = build_config(args)
        assert cfg.settings.tolerances.lifting == 0.5
        assert cfg.settings.tolerances.lifting_pd == 0.5
        assert cfg.settings.tolerances.moments == 1e-5

    def test_complex_z(self):
        """Test 're,im' parses to a complex z with conjugate z'."""
        args = build_parser().parse_args(["info", "--z", "0.3,0.4"])
        cfg = build_config(args)
        assert cfg.z_complex == 0.3 + 0.4j
        assert cfg.zprime_complex == 0.3 - 0.4j

    def test_negative_values_attached_with_equals(self):
        """Test values starting with '-' parse in the --flag=value form."""
        cfg = build_config(build_parser().parse_args(["info", "--z=-0.5,2"]))
        assert cfg.z_complex == -0.5 + 2j
        assert cfg.zprime_complex == -0.5 - 2j
        argv = ["eval", "fb", "--a", "0.2,0.3", "--b", "0.5,0.65", "--c", "1.7", "--y=-0.3,-0.4"]
        assert build_parser().parse_args(argv).y == [-0.3, -0.4]

    def test_negative_value_detached_rejected(self):
        """Test a detached value starting with '-' is read as an option."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["info", "--z", "-0.5,2"])

    def test_help_shows_equals_form(self, capsys):
        """Test the help for --z and --y shows the attached form."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["eval", "--help"])
        text = capsys.readouterr().out
        assert "--z=-0.5,2" in text
        assert "--y=-0.3,-0.4" in text

    def test_bad_grid(self):
        """Test a malformed grid is a config error."""
        args = build_parser().parse_args(["eval", "kernel_k", "--grid", "0.1:0.9"])
        with pytest.raises(ConfigError):
            build_config(args)


class TestEval:
    """Test the eval command."""

    def test_rho1_row(self, capsys):
        """Test one rho_1 row with its method tag."""
        code = main(["eval", "rho1", "--z", "0.3,0.4", "--x", "0.1", "--workers", "1"])
        assert code == EXIT_OK
        rows = read_csv(capsys.readouterr().out)
        assert len(rows) == 1
        assert list(rows[0]) == ["x", "value", "abs_err", "method"]
        assert float(rows[0]["x"]) == 0.1
        assert float(rows[0]["value"]) > 0

    def test_kernel_grid_symmetric(self, capsys):
        """Test kernel_k on a square grid is symmetric."""
        argv = ["eval", "kernel_k", "--z", "1.2", "--zp", "1.8", "--grid", "0.1:0.9:3"]
        code = main(argv + ["--workers", "1"])
        assert code == EXIT_OK
        rows = read_csv(capsys.readouterr().out)
        assert len(rows) == 9
        values = {(float(r["x"]), float(r["y"])): float(r["value"]) for r in rows}
        for (x, y), v in values.items():
            assert v == pytest.approx(values[(y, x)], rel=1e-12)
        assert {r["method"] for r in rows} == {"ClosedForm"}

    def test_asympt_k_at_one(self, capsys):
        """Test k on a log grid through 1 hits A(0) at the midpoint."""
        code = main(
            ["eval", "asympt_k", "--z", "0.3,0.4", "--grid-log", "0.25:4:3", "--workers", "1"]
        )
        assert code == EXIT_OK
        rows = read_csv(capsys.readouterr().out)
        expected = asympt_const_A(ZParams.create(0.3 + 0.4j))
        assert float(rows[1]["value"]) == pytest.approx(expected, rel=1e-12)

    def test_json_output(self, capsys):
        """Test --format json writes an array of objects."""
        code = main(["eval", "asympt_k", "--z", "0.3,0.4", "--x", "2.0", "--format", "json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["x"] == 2.0
        assert payload[0]["method"] == "ClosedForm"

    def test_output_file(self, tmp_path):
        """Test --output writes the table to a file."""
        target = tmp_path / "k.csv"
        code = main(
            ["eval", "asympt_k", "--x", "0.5,2.0", "--output", str(target), "--workers", "1"]
        )
        assert code == EXIT_OK
        rows = read_csv(target.read_text())
        assert [float(r["x"]) for r in rows] == [0.5, 2.0]

    def test_missing_points(self, capsys):
        """Test eval without points exits with the config code."""
        assert main(["eval", "rho1", "--z", "0.3,0.4"]) == EXIT_CONFIG

    def test_bad_method(self):
        """Test an unknown method exits with the config code."""
        assert main(["eval", "rho1", "--x", "0.1", "--method", "kummer"]) == EXIT_CONFIG

    def test_inadmissible_parameters(self):
        """Test integer z exits with the config code."""
        assert main(["eval", "rho1", "--z", "1.0", "--x", "0.1"]) == EXIT_CONFIG

    def test_audit_file(self, tmp_path, capsys):
        """Test --audit writes the run's events."""
        target = tmp_path / "audit.json"
        code = main(["eval", "asympt_k", "--x", "2.0", "--audit", str(target)])
        assert code == EXIT_OK
        report = json.loads(target.read_text())
        assert report["summary"]["event_types"]["route_start"] == 1
        assert report["summary"]["event_types"]["route_complete"] == 1
        assert report["summary"]["event_types"]["audit"] == 1


class TestVerifyAndInfo:
    """Test the verify and info commands."""

    def test_characters_pass(self, capsys):
        """Test a passing suite exits 0 and lists its checks."""
        assert main(["verify", "characters", "--nmax", "3"]) == EXIT_OK
        rows = read_csv(capsys.readouterr().out)
        assert rows[0]["check"] == "characters"
        assert all(r["pass"] == "true" for r in rows)

    def test_failed_check_exit_code(self, capsys):
        """Test a failing check exits 1."""
        code = main(["verify", "normalization", "--n", "4", "--tol=-1"])
        assert code == EXIT_CHECK_FAILED

    def test_info(self, capsys):
        """Test info prints the classification."""
        assert main(["info", "--z", "1.2", "--zp", "1.8"]) == EXIT_OK
        assert "complementary" in capsys.readouterr().out
