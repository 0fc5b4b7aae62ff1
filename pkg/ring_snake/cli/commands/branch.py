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

from ...continuation import trace_branch
from ...diagram import single_branch_diagram
from ...model import RingModel
from ...patterns import PatternFamily, PatternLabel, make_pattern, parse_label, validate_label
from ...reduction import ReducedSystem, SymmetryReduction
from ..utils import (
    build_model,
    build_run_config,
    console,
    continuation_options,
    handle_cli_error,
    model_options,
    setup_logging,
    summary_table,
    write_diagram_outputs,
)

_TWO_BLOCK_FAMILIES = {
    PatternFamily.A_PLUS,
    PatternFamily.A_MINUS,
    PatternFamily.B,
    PatternFamily.C_PLUS,
    PatternFamily.C_MINUS,
    PatternFamily.D,
}


def default_symmetry(label: PatternLabel, model: RingModel) -> str:
    """Two-block labels on all-to-all rings use their own block; everything else kappa."""
    if model.is_all_to_all and label.family in _TWO_BLOCK_FAMILIES:
        return f"twoblock:{label.k}"
    return "kappa"


@click.command()
@model_options
@continuation_options
@click.option("--seed", help="Seed pattern label, e.g. U:1, hom- or C+:2 (default U:1).")
@click.option("--mu", type=float, help="Seed parameter value (default 0.5).")
@click.option("--symmetry", help="full, kappa or twoblock:k. Inferred from the seed.")
@click.option("--json/--no-json", "json_out", default=True, help="Write branch.json.")
@click.option("--csv/--no-csv", "csv_out", default=True, help="Write branch.csv.")
@click.option("--svg/--no-svg", "svg_out", default=False, help="Write branch.svg.")
@handle_cli_error
def branch(
    config_path: Path | None,
    debug: bool,
    seed: str | None,
    mu: float | None,
    symmetry: str | None,
    json_out: bool,
    csv_out: bool,
    svg_out: bool,
    **flags: object,
) -> None:
    """Trace one branch from a seed pattern at a given mu."""
    setup_logging(debug)
    run = build_run_config(config_path, seed=seed, mu=mu, symmetry=symmetry, **flags)
    model = build_model(run)
    label = parse_label(run.seed)
    validate_label(label, model)
    reduction = SymmetryReduction.parse(run.symmetry or default_symmetry(label, model), model.N)
    system = ReducedSystem(model, reduction)
    x0 = system.reduce_state(make_pattern(label, model, run.mu))

    with console.status(f"Tracing {label} from mu={run.mu:g} in {reduction}..."):
        traced = trace_branch(system, x0, run.mu, run.continuation_options())

    diagram = single_branch_diagram(model, traced)
    console.print(summary_table(diagram))
    for path in write_diagram_outputs(diagram, run.out, "branch", json_out, csv_out, svg_out):
        console.print(f"Wrote {path}", style="green")
