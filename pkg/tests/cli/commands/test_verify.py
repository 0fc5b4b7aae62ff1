# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
from pathlib import Path

import pytest
from click.testing import CliRunner
from pytest_mock import MockerFixture

from ring_snake.cli.commands.verify import parse_sweep, verify
from ring_snake.errors import ConfigError
from ring_snake.verification import LawReport, VerificationReport


def make_report(passed: bool) -> VerificationReport:
    law = LawReport(
        law="FoldLeft[a=1]",
        frame="RawCubicQuintic",
        provenance="Derived",
        expected_A=3.0,
        expected_p=2.0 / 3.0,
        fitted_A=3.0,
        fitted_p=2.0 / 3.0 if passed else 0.5,
        max_rel_err=0.01,
        passed=passed,
    )
    return VerificationReport(
        N=6,
        m=1,
        nonlinearity="cubic-quintic",
        d_sweep=[1e-4, 1e-3, 1e-2],
        exponent_tol=0.02,
        laws=[law],
        passed=passed,
    )


def test_verify_passes(mocker: MockerFixture, tmp_path: Path) -> None:
    """Test that a passing report exits with 0 and is written as JSON."""
    mock_run = mocker.patch(
        "ring_snake.cli.commands.verify.run_verification", return_value=make_report(True)
    )

    runner = CliRunner()
    result = runner.invoke(
        verify, ["--N", "6", "--d-sweep", "1e-4,1e-3,1e-2", "--out", str(tmp_path)]
    )

    assert result.exit_code == 0, result.output
    assert "All fitted laws pass" in result.output
    doc = json.loads((tmp_path / "verification.json").read_text())
    assert doc["laws"][0]["law"] == "FoldLeft[a=1]"
    assert mock_run.call_args.args[1] == [1e-4, 1e-3, 1e-2]
    assert mock_run.call_args.kwargs["alltoall"] is False


def test_verify_failure_exit_code(mocker: MockerFixture, tmp_path: Path) -> None:
    """Test that a failing law exits with 3 after writing the report."""
    mocker.patch(
        "ring_snake.cli.commands.verify.run_verification", return_value=make_report(False)
    )

    runner = CliRunner()
    result = runner.invoke(verify, ["--N", "6", "--out", str(tmp_path)])

    assert result.exit_code == 3
    assert "Verification failed" in result.output
    assert (tmp_path / "verification.json").exists()


def test_verify_default_sweep_and_alltoall(mocker: MockerFixture, tmp_path: Path) -> None:
    """Test the default sweep and the all-to-all flags."""
    mock_run = mocker.patch(
        "ring_snake.cli.commands.verify.run_verification", return_value=make_report(True)
    )

    runner = CliRunner()
    result = runner.invoke(
        verify, ["--N", "6", "--m", "3", "--alltoall", "--k", "2", "--out", str(tmp_path)]
    )

    assert result.exit_code == 0, result.output
    assert mock_run.call_args.args[1] == [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
    assert mock_run.call_args.kwargs["alltoall"] is True
    assert mock_run.call_args.kwargs["k_values"] == [2]


def test_verify_short_sweep(tmp_path: Path) -> None:
    """Test that a sweep of two values exits with 1."""
    runner = CliRunner()
    result = runner.invoke(verify, ["--N", "6", "--d-sweep", "1e-3,1e-2", "--out", str(tmp_path)])

    assert result.exit_code == 1
    assert "at least 3" in result.output


def test_parse_sweep() -> None:
    """Test comma-separated parsing and invalid numbers."""
    assert parse_sweep("1e-4, 1e-3,") == [1e-4, 1e-3]
    assert parse_sweep(None) is None
    with pytest.raises(ConfigError):
        parse_sweep("1e-4,small")
