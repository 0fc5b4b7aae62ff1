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

import click

from ...diagram import DiagramMode, build_diagram
from ...errors import ConfigError
from ..utils import (
    build_model,
    build_run_config,
    console,
    continuation_options,
    handle_cli_error,
    model_options,
    setup_logging,
    summary_lines,
    summary_table,
    write_atomic,
    write_diagram_outputs,
)

# CLI spellings of the diagram modes.
MODE_NAMES = {
    "sparse": DiagramMode.SPARSE_SNAKE,
    "special62": DiagramMode.SPECIAL_62,
    "special83": DiagramMode.SPECIAL_83,
    "alltoall": DiagramMode.ALL_TO_ALL,
    "genericm": DiagramMode.GENERIC_M,
}


def parse_mode(text: str | None) -> DiagramMode | None:
    if text is None:
        return None
    key = text.strip().lower()
    if key in MODE_NAMES:
        return MODE_NAMES[key]
    try:
        return DiagramMode(text)
    except ValueError as e:
        raise ConfigError(f"Unknown diagram mode '{text}'. Use one of {', '.join(MODE_NAMES)}") from e


@click.command()
@model_options
@continuation_options
@click.option(
    "--mode",
    type=click.Choice(list(MODE_NAMES), case_sensitive=False),
    help="Diagram mode. Inferred from (N, m) when omitted.",
)
@click.option("--k", "k", type=int, help="Block size for all-to-all diagrams (default 1).")
@click.option("--json/--no-json", "json_out", default=True, help="Write diagram.json.")
@click.option("--csv/--no-csv", "csv_out", default=True, help="Write diagram.csv.")
@click.option("--svg/--no-svg", "svg_out", default=True, help="Write diagram.svg.")
@handle_cli_error
def diagram(
    config_path: Path | None,
    debug: bool,
    mode: str | None,
    k: int | None,
    json_out: bool,
    csv_out: bool,
    svg_out: bool,
    **flags: object,
) -> None:
    """Build the full bifurcation diagram and summarize it."""
    setup_logging(debug)
    run = build_run_config(config_path, mode=mode, k=k, **flags)
    model = build_model(run)
    diagram_mode = parse_mode(run.mode)

    with console.status(f"Building diagram for N={model.N}, m={model.m}, d={model.d:g}..."):
        result = build_diagram(model, diagram_mode, run.k, run.continuation_options())

    console.print(summary_table(result))
    written = write_diagram_outputs(result, run.out, "diagram", json_out, csv_out, svg_out)
    text = "\n".join(summary_lines(result)) + "\n"
    written.append(write_atomic(run.out / "summary.txt", text.encode("utf-8")))
    for path in written:
        console.print(f"Wrote {path}", style="green")
