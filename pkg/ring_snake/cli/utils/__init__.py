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


from .logging import console, handle_cli_error, setup_logging
from .options import (
    build_model,
    build_run_config,
    continuation_options,
    model_options,
)
from .output import (
    summary_lines,
    summary_table,
    write_atomic,
    write_diagram_outputs,
)

__all__ = [
    "build_model",
    "build_run_config",
    "console",
    "continuation_options",
    "handle_cli_error",
    "model_options",
    "setup_logging",
    "summary_lines",
    "summary_table",
    "write_atomic",
    "write_diagram_outputs",
]
