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

from pathlib import Path

import pytest
from pytest_mock import MockerFixture

from ring_snake.cli.utils.options import build_model, build_run_config
from ring_snake.errors import ConfigError


class TestBuildRunConfig:
    def test_defaults(self) -> None:
        """Test the configuration without a file or flags."""
        run = build_run_config()
        assert (run.model.N, run.model.m, run.model.d) == (20, 1, 0.005)
        assert run.out == Path("ring_snake_out")
        assert run.seed == "U:1"

    def test_flags_override_file(self, tmp_path: Path) -> None:
        """Test that flags beat the file and the file beats the defaults."""
        path = tmp_path / "run.yaml"
        path.write_text(
            "model:\n  N: 8\n  m: 2\ncontinuation:\n  ds_init: 0.002\nseed: V:2\n"
        )
        run = build_run_config(path, N=10, ds_max=0.05, seed=None, stop_on_exceptional="off")
        assert (run.model.N, run.model.m) == (10, 2)
        assert run.continuation.ds_init == 0.002
        assert run.continuation.ds_max == 0.05
        assert not run.continuation.stop_on_exceptional
        assert run.seed == "V:2"

    def test_bare_model_file(self, tmp_path: Path) -> None:
        """Test that a file holding only the model is accepted."""
        path = tmp_path / "model.json"
        path.write_text('{"N": 6, "m": 3, "d": 0.001}')
        run = build_run_config(path)
        assert (run.model.N, run.model.m, run.model.d) == (6, 3, 0.001)

    def test_newton_flags(self) -> None:
        """Test that corrector flags reach the continuation options."""
        run = build_run_config(newton_tol=1e-9, newton_iters=12)
        opts = run.continuation_options()
        assert opts.corrector.tol_residual == 1e-9
        assert opts.corrector.max_iters == 12

    def test_command_values_keep_model(self, tmp_path: Path) -> None:
        """Test that command settings merge without clobbering the model section."""
        run = build_run_config(N=6, m=3, out=tmp_path, k=2, mode="AllToAll")
        assert (run.model.N, run.model.m) == (6, 3)
        assert run.out == tmp_path
        assert (run.k, run.mode) == (2, "AllToAll")
        assert run.newton.max_iters == 25

    def test_invalid_file_content(self, tmp_path: Path) -> None:
        """Test that a mistyped run setting raises ConfigError."""
        path = tmp_path / "run.yaml"
        path.write_text("model:\n  N: 6\nk: many\n")
        with pytest.raises(ConfigError):
            build_run_config(path)


def test_build_model_warns_on_non_bistable_polynomial(mocker: MockerFixture) -> None:
    """Test that a custom polynomial failing the checks prints warnings."""
    mock_console = mocker.patch("ring_snake.cli.utils.options.console")
    model = build_model(build_run_config(N=6, nonlinearity="poly:1"))
    assert model.nonlinearity.coefficients == (1.0,)
    assert mock_console.print.call_count >= 1
