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

import logging

import pytest

from ring_snake.cli.utils.logging import (
    EXIT_CONFIG,
    EXIT_INTERRUPTED,
    EXIT_NUMERICAL,
    handle_cli_error,
    setup_logging,
)
from ring_snake.errors import InvalidLabelError, NoConvergenceError, OutputError


@pytest.mark.parametrize(
    "error, code",
    [
        (InvalidLabelError("bad label"), EXIT_CONFIG),
        (NoConvergenceError("no convergence"), EXIT_NUMERICAL),
        (OutputError("disk full"), EXIT_CONFIG),
        (KeyboardInterrupt(), EXIT_INTERRUPTED),
    ],
)
def test_handle_cli_error_exit_codes(error: BaseException, code: int) -> None:
    """Test the exit code for each error family."""

    @handle_cli_error
    def command() -> None:
        raise error

    with pytest.raises(SystemExit) as exc_info:
        command()
    assert exc_info.value.code == code


def test_handle_cli_error_passes_results_through() -> None:
    """Test that a successful command returns normally."""

    @handle_cli_error
    def command(x: int) -> int:
        return x + 1

    assert command(1) == 2


@pytest.mark.parametrize("debug, level", [(True, logging.DEBUG), (False, logging.WARNING)])
def test_setup_logging(debug: bool, level: int) -> None:
    """Test the root log level for --debug."""
    setup_logging(debug)
    assert logging.getLogger().level == level
