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

"""Tests for run configuration and config-file loading."""

import json
from pathlib import Path

import pytest

from ring_snake.config import (
    ENV_THREADS,
    ContinuationConfig,
    ModelConfig,
    NonlinearityConfig,
    RunConfig,
    apply_overrides,
    load_config_file,
    load_model_config,
    resolve_threads,
)
from ring_snake.errors import ConfigError
from ring_snake.model import NonlinearityKind


class TestNonlinearityConfig:
    @pytest.mark.parametrize(
        "kind, expected",
        [
            ("cubic-quintic", NonlinearityKind.CUBIC_QUINTIC),
            ("NormalFormCubic", NonlinearityKind.NORMAL_FORM_CUBIC),
            ("poly:2,-1", NonlinearityKind.CUSTOM_ODD_POLYNOMIAL),
        ],
    )
    def test_build(self, kind: str, expected: NonlinearityKind) -> None:
        """Test short names, long aliases and the poly form."""
        assert NonlinearityConfig(kind=kind).build().kind is expected

    def test_poly_with_coefficients(self) -> None:
        """Test that 'poly' takes its coefficients from the list."""
        nl = NonlinearityConfig(kind="poly", coefficients=[1.0, -1.0]).build()
        assert nl.coefficients == (1.0, -1.0)

    @pytest.mark.parametrize("kind", ["quartic", "poly"])
    def test_invalid(self, kind: str) -> None:
        """Test that unknown kinds and poly without coefficients raise ConfigError."""
        with pytest.raises(ConfigError):
            NonlinearityConfig(kind=kind).build()


class TestModelConfig:
    def test_defaults(self) -> None:
        """Test the default ring."""
        model = ModelConfig().build()
        assert (model.N, model.m, model.d) == (20, 1, 0.005)
        assert model.nonlinearity.kind is NonlinearityKind.CUBIC_QUINTIC

    def test_invalid_ring(self) -> None:
        """Test that an impossible interaction range raises ConfigError."""
        with pytest.raises(ConfigError):
            ModelConfig(N=6, m=4).build()

    def test_overrides_skip_none(self) -> None:
        """Test that only non-None overrides are applied."""
        config = apply_overrides(ModelConfig(N=6), m=2, d=None, nonlinearity="normal-cubic")
        assert (config.N, config.m, config.d) == (6, 2, 0.005)
        assert config.nonlinearity.kind == "normal-cubic"

    def test_invalid_override(self) -> None:
        """Test that a badly typed override raises ConfigError."""
        with pytest.raises(ConfigError):
            apply_overrides(ModelConfig(), N="many")


class TestConfigFiles:
    def test_yaml(self, tmp_path: Path) -> None:
        """Test loading a YAML model file."""
        path = tmp_path / "model.yaml"
        path.write_text("N: 8\nm: 3\nd: 0.002\nnonlinearity:\n  kind: CubicQuintic\n")
        model = load_model_config(path).build()
        assert (model.N, model.m, model.d) == (8, 3, 0.002)

    def test_json(self, tmp_path: Path) -> None:
        """Test loading a JSON model file."""
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"N": 6, "m": 2, "d": 0.001}))
        assert load_model_config(path).m == 2

    def test_empty_file(self, tmp_path: Path) -> None:
        """Test that an empty file is an empty mapping."""
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config_file(path) == {}

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that a missing file raises ConfigError."""
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "absent.yaml")

    def test_not_a_mapping(self, tmp_path: Path) -> None:
        """Test that a top-level list raises ConfigError."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_config_file(path)

    def test_invalid_field(self, tmp_path: Path) -> None:
        """Test that a mistyped field raises ConfigError."""
        path = tmp_path / "bad.yaml"
        path.write_text("N: six\n")
        with pytest.raises(ConfigError):
            load_model_config(path)


class TestRunConfig:
    def test_continuation_options(self) -> None:
        """Test that the corrector settings reach the continuation options."""
        opts = RunConfig(
            continuation=ContinuationConfig(ds_init=2e-3, mu_window=(0.0, 1.0))
        ).continuation_options()
        assert opts.ds_init == 2e-3
        assert opts.mu_window == (0.0, 1.0)
        assert opts.corrector.max_iters == 25

    def test_invalid_step_sizes(self) -> None:
        """Test that inconsistent step sizes surface as ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig(continuation=ContinuationConfig(ds_init=1.0)).continuation_options()


class TestResolveThreads:
    def test_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that a positive integer is used as is."""
        monkeypatch.setenv(ENV_THREADS, "3")
        assert resolve_threads() == 3

    @pytest.mark.parametrize("raw", ["0", "-2", "many"])
    def test_invalid_values_fall_back_to_one(self, raw: str, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that unusable values fall back to a single worker."""
        monkeypatch.setenv(ENV_THREADS, raw)
        assert resolve_threads() == 1

    def test_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that the default uses at least one worker."""
        monkeypatch.delenv(ENV_THREADS, raising=False)
        assert resolve_threads() >= 1
