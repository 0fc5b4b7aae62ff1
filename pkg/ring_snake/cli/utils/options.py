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


"""Options shared by every command and the RunConfig they resolve to."""

from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click
from pydantic import ValidationError

from ...config import (
    ContinuationConfig,
    ModelConfig,
    NewtonConfig,
    RunConfig,
    apply_overrides,
    load_config_file,
)
from ...errors import ConfigError
from ...model import NonlinearityKind, RingModel
from .logging import console

F = TypeVar("F", bound=Callable[..., Any])

_MODEL_OPTIONS = [
    click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="JSON or YAML model/run config. Flags override its values.",
    ),
    click.option("--N", "N", type=int, help="Number of nodes (default 20)."),
    click.option("--m", "m", type=int, help="Interaction range (default 1)."),
    click.option("--d", "d", type=float, help="Coupling strength (default 0.005)."),
    click.option(
        "--nonlinearity",
        help="cubic-quintic, normal-cubic, normal-fold or poly:<c3,c5,...>.",
    ),
    click.option(
        "--out",
        type=click.Path(file_okay=False, path_type=Path),
        help="Output directory.",
    ),
    click.option("--debug", is_flag=True, help="Log continuation steps at DEBUG level."),
]

_CONTINUATION_OPTIONS = [
    click.option("--ds", "ds_init", type=float, help="Initial arclength step."),
    click.option("--ds-max", type=float, help="Largest arclength step."),
    click.option("--max-steps", type=int, help="Step cap per direction."),
    click.option(
        "--mu-window", type=(float, float), help="Allowed mu range, e.g. -0.05 1.05."
    ),
    click.option(
        "--stop-on-exceptional",
        type=click.Choice(["on", "off"]),
        help="Stop at the exceptional set near mu = 0 and mu = 1.",
    ),
    click.option("--newton-tol", type=float, help="Corrector residual tolerance."),
    click.option("--newton-iters", type=int, help="Corrector iteration cap."),
]


def _apply(options: list[Callable[[F], F]], f: F) -> F:
    for option in reversed(options):
        f = option(f)
    return f


def model_options(f: F) -> F:
    """Add --config, --N, --m, --d, --nonlinearity, --out and --debug."""
    return _apply(_MODEL_OPTIONS, f)


def continuation_options(f: F) -> F:
    return _apply(_CONTINUATION_OPTIONS, f)


def _load_run_config(path: Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    data = load_config_file(path)
    # A bare model file has no "model" section.
    if "model" not in data:
        data = {"model": data}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid model config {path}: {e}") from e


def _override(config: Any, /, **values: Any) -> dict[str, Any]:
    return {
        **config.model_dump(),
        **{key: value for key, value in values.items() if value is not None},
    }


def build_run_config(
    config_path: Path | None = None,
    N: int | None = None,
    m: int | None = None,
    d: float | None = None,
    nonlinearity: str | None = None,
    out: Path | None = None,
    ds_init: float | None = None,
    ds_max: float | None = None,
    max_steps: int | None = None,
    mu_window: tuple[float, float] | None = None,
    stop_on_exceptional: str | None = None,
    newton_tol: float | None = None,
    newton_iters: int | None = None,
    **command_values: Any,
) -> RunConfig:
    """Merge defaults, the config file and command-line flags, in that order."""
    run = _load_run_config(config_path)
    model: ModelConfig = apply_overrides(
        run.model, N=N, m=m, d=d, nonlinearity=nonlinearity
    )
    stop = None if stop_on_exceptional is None else stop_on_exceptional == "on"
    try:
        continuation = ContinuationConfig.model_validate(
            _override(
                run.continuation,
                ds_init=ds_init,
                ds_max=ds_max,
                max_steps=max_steps,
                mu_window=mu_window,
                stop_on_exceptional=stop,
            )
        )
        newton = NewtonConfig.model_validate(
            _override(run.newton, tol_residual=newton_tol, max_iters=newton_iters)
        )
        return RunConfig.model_validate(
            _override(
                run,
                model=model,
                continuation=continuation,
                newton=newton,
                out=out,
                **command_values,
            )
        )
    except ValidationError as e:
        raise ConfigError(f"Invalid run settings: {e}") from e


def build_model(run: RunConfig) -> RingModel:
    """Build the ring and warn when a custom polynomial is not bistable."""
    model = run.model.build()
    if model.nonlinearity.kind is NonlinearityKind.CUSTOM_ODD_POLYNOMIAL:
        report = model.nonlinearity.check_hypothesis()
        if not report.ok:
            for message in report.messages:
                console.print(f"Warning: {message}", style="yellow")
    return model
