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
import sys
from collections.abc import Callable
from functools import wraps
from typing import Any, TypeVar, cast

from rich.console import Console

from ...errors import ConfigError, NumericalError

console = Console()

F = TypeVar("F", bound=Callable[..., Any])

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY_FAILED = 3
EXIT_INTERRUPTED = 130


def setup_logging(debug: bool = False) -> None:
    """Send library log records to stderr, at DEBUG when ``debug`` is set."""
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(levelname)s %(message)s",
        force=True,
    )


def handle_cli_error(f: F) -> F:
    """Decorator that turns library errors into exit codes.

    Configuration problems exit with 1, numerical failures with 2 and
    Ctrl+C with 130. Anything else is reported and exits with 1.
    """

    @wraps(f)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return f(*args, **kwargs)
        except KeyboardInterrupt:
            console.print("\nOperation cancelled by user", style="yellow")
            sys.exit(EXIT_INTERRUPTED)
        except NumericalError as e:
            console.print(f"Error: {e!s}", style="bold red")
            sys.exit(EXIT_NUMERICAL)
        except ConfigError as e:
            console.print(f"Error: {e!s}", style="bold red")
            sys.exit(EXIT_CONFIG)
        except Exception as e:
            console.print(f"Error: {e!s}", style="bold red")
            sys.exit(EXIT_CONFIG)

    return cast(F, wrapper)
