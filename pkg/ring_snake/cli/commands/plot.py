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

from ...diagram import RenderStyle, load_diagram, render_svg
from ...errors import ConfigError
from ..utils import console, handle_cli_error, setup_logging, write_atomic


@click.command()
@click.argument(
    "diagram_file", type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@click.option("--x", "x_axis", default="mu", show_default=True, help="mu, l2norm or u:<node>.")
@click.option("--y", "y_axis", default="l2norm", show_default=True, help="mu, l2norm or u:<node>.")
@click.option("--title", help="Figure title.")
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    help="SVG path. Defaults to the input path with an .svg suffix.",
)
@click.option("--debug", is_flag=True, help="Enable debug logging.")
@handle_cli_error
def plot(
    diagram_file: Path,
    x_axis: str,
    y_axis: str,
    title: str | None,
    output: Path | None,
    debug: bool,
) -> None:
    """Render a saved diagram JSON file as SVG."""
    setup_logging(debug)
    try:
        data = diagram_file.read_bytes()
    except OSError as e:
        raise ConfigError(f"Could not read {diagram_file}: {e}") from e
    diagram = load_diagram(data)
    svg = render_svg(diagram, x=x_axis, y=y_axis, style=RenderStyle(title=title))
    path = write_atomic(output or diagram_file.with_suffix(".svg"), svg)
    console.print(f"Wrote {path}", style="green")
