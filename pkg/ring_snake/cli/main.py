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


import importlib.metadata

import click
from rich.console import Console

from .commands.branch import branch
from .commands.diagram import diagram
from .commands.plot import plot
from .commands.verify import verify

console = Console()


def _version(package: str) -> str:
    try:
        return importlib.metadata.version(package)
    except importlib.metadata.PackageNotFoundError:
        return "development version"


def print_version(ctx: click.Context, param: click.Parameter, value: bool) -> None:
    """Print ring-snake and numerical stack versions, then exit."""
    if not value or ctx.resilient_parsing:
        return
    console.print(f"ring-snake version: {_version('ring-snake')}")
    for package in ("numpy", "scipy"):
        console.print(f"  {package} {_version(package)}", style="dim")
    ctx.exit()


@click.group(help="Continuation of localized states on bistable lattice rings")
@click.option(
    "--version",
    "-v",
    is_flag=True,
    callback=print_version,
    expose_value=False,
    is_eager=True,
    help="Show the version and exit.",
)
def cli() -> None:
    pass


cli.add_command(branch)
cli.add_command(diagram)
cli.add_command(verify)
cli.add_command(plot)


if __name__ == "__main__":
    cli()
