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


"""Pydantic run configuration and config-file loading."""

import logging
import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError

from .continuation import ContinuationOptions
from .errors import ConfigError
from .model import Nonlinearity, NonlinearityKind, RingModel
from .solver import Damping, NewtonOptions

ENV_THREADS = "RING_SNAKE_THREADS"

# Long-form kind names accepted in config files.
_KIND_ALIASES = {
    "CubicQuintic": NonlinearityKind.CUBIC_QUINTIC,
    "NormalFormCubic": NonlinearityKind.NORMAL_FORM_CUBIC,
    "NormalFormFold": NonlinearityKind.NORMAL_FORM_FOLD,
    "CustomOddPolynomial": NonlinearityKind.CUSTOM_ODD_POLYNOMIAL,
}


class NonlinearityConfig(BaseModel):
    """The on-site law f(u, mu)."""

    kind: str = Field("cubic-quintic", description="Nonlinearity kind")
    coefficients: list[float] | None = Field(
        None, description="Coefficients of u^3, u^5, ...; required for 'poly'"
    )

    def build(self) -> Nonlinearity:
        if self.kind.startswith("poly:"):
            return Nonlinearity.parse(self.kind)
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        try:
            return Nonlinearity.from_kind(kind, self.coefficients)
        except ValueError as e:
            raise ConfigError(f"Invalid nonlinearity '{self.kind}': {e}") from e


class ModelConfig(BaseModel):
    """Ring size, interaction range, coupling strength and nonlinearity."""

    N: int = Field(20, description="Number of nodes")
    m: int = Field(1, description="Interaction range")
    d: float = Field(0.005, description="Coupling strength")
    nonlinearity: NonlinearityConfig = Field(
        default_factory=NonlinearityConfig, description="On-site law"
    )

    def build(self) -> RingModel:
        return RingModel(self.N, self.m, self.d, self.nonlinearity.build())


class NewtonConfig(BaseModel):
    tol_residual: float = Field(1e-10, description="Residual max-norm tolerance")
    tol_step: float = Field(1e-12, description="Step max-norm tolerance")
    max_iters: int = Field(25, description="Corrector iteration cap")
    damping: Damping = Field(Damping.NONE, description="Step damping")

    def build(self) -> NewtonOptions:
        return NewtonOptions(
            tol_residual=self.tol_residual,
            tol_step=self.tol_step,
            max_iters=self.max_iters,
            damping=self.damping,
        )


class ContinuationConfig(BaseModel):
    ds_init: float = Field(1e-3, description="Initial arclength step")
    ds_min: float = Field(1e-8, description="Smallest step before giving up")
    ds_max: float = Field(1e-2, description="Largest step")
    max_steps: int = Field(50000, description="Step cap per direction")
    mu_window: tuple[float, float] = Field((-0.05, 1.05), description="Allowed mu range")
    stop_on_exceptional: bool = Field(
        True, description="Stop at the exceptional set near mu = 0 and mu = 1"
    )
    delta_star: float = Field(0.02, description="Half-width of the exceptional guard")

    def build(self, newton: NewtonConfig | None = None) -> ContinuationOptions:
        return ContinuationOptions(
            ds_init=self.ds_init,
            ds_min=self.ds_min,
            ds_max=self.ds_max,
            max_steps=self.max_steps,
            mu_window=self.mu_window,
            stop_on_exceptional=self.stop_on_exceptional,
            delta_star=self.delta_star,
            corrector=(newton or NewtonConfig()).build(),
        )


class RunConfig(BaseModel):
    """Everything one CLI invocation needs."""

    model: ModelConfig = Field(default_factory=ModelConfig, description="Ring model")
    newton: NewtonConfig = Field(default_factory=NewtonConfig, description="Corrector")
    continuation: ContinuationConfig = Field(
        default_factory=ContinuationConfig, description="Step control"
    )
    out: Path = Field(Path("ring_snake_out"), description="Output directory")
    symmetry: str | None = Field(None, description="full, kappa or twoblock:k")
    mode: str | None = Field(None, description="Diagram mode; inferred when unset")
    k: int | None = Field(None, description="Block size for all-to-all runs")
    seed: str = Field("U:1", description="Seed pattern label")
    mu: float = Field(0.5, description="Seed parameter value")
    d_sweep: list[float] = Field(default_factory=list, description="Coupling values")
    alltoall: bool = Field(False, description="Verify all-to-all laws")

    def continuation_options(self) -> ContinuationOptions:
        return self.continuation.build(self.newton)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML mapping.

    Raises:
        ConfigError: If the file is missing, unparsable or not a mapping.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Invalid model config {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Invalid model config {path}: expected a mapping")
    return data


def load_model_config(path: str | Path) -> ModelConfig:
    data = load_config_file(path)
    try:
        return ModelConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid model config {path}: {e}") from e


def apply_overrides(config: ModelConfig, **overrides: Any) -> ModelConfig:
    """Return ``config`` with every non-None override applied.

    ``nonlinearity`` may be given as a CLI string such as ``poly:1,-1``.
    """
    update = {key: value for key, value in overrides.items() if value is not None}
    text = update.pop("nonlinearity", None)
    if text is not None:
        update["nonlinearity"] = NonlinearityConfig(kind=text)
    try:
        return ModelConfig.model_validate({**config.model_dump(), **update})
    except ValidationError as e:
        raise ConfigError(f"Invalid model settings: {e}") from e


def resolve_threads() -> int:
    """Worker count from RING_SNAKE_THREADS, defaulting to the CPU count."""
    raw = os.environ.get(ENV_THREADS)
    if raw is None:
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError:
        threads = 0
    if threads < 1:
        logging.warning(f"Ignoring {ENV_THREADS}={raw!r}; using 1 worker")
        return 1
    return threads
