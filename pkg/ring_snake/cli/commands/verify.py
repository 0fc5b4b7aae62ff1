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


import sys
from pathlib import Path

import click
from rich.table import Table

from ...config import resolve_threads
from ...errors import ConfigError
from ...verification import DEFAULT_D_SWEEP, VerificationReport, run_verification
from ..utils import (
    build_model,
    build_run_config,
    console,
    continuation_options,
    handle_cli_error,
    model_options,
    setup_logging,
    write_atomic,
)
from ..utils.logging import EXIT_VERIFY_FAILED


def parse_sweep(text: str | None) -> list[float] | None:
    """Parse ``1e-4,3e-4,1e-3`` into floats."""
    if text is None:
        return None
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid --d-sweep '{text}': {e}") from e


def report_table(report: VerificationReport) -> Table:
    table = Table(
        title=f"Asymptotic laws for N={report.N}, m={report.m}",
        show_header=True,
        header_style="bold magenta",
    )
    table.add_column("Law", style="bold")
    table.add_column("Frame")
    table.add_column("Expected A, p", style="cyan")
    table.add_column("Fitted A, p", style="cyan")
    table.add_column("Max rel. err")
    table.add_column("Result")
    for law in report.laws:
        if law.passed is None:
            fitted, error, result = "-", "-", "[yellow]skipped[/]"
        else:
            fitted = f"{law.fitted_A:.4g}, {law.fitted_p:.4f}"
            error = f"{law.max_rel_err:.2%}"
            result = "[green]pass[/]" if law.passed else "[red]FAIL[/]"
        table.add_row(
            law.law,
            law.frame,
            f"{law.expected_A:.4g}, {law.expected_p:.4f}",
            fitted,
            error,
            result,
        )
    return table


@click.command()
@model_options
@continuation_options
@click.option("--d-sweep", help="Comma-separated coupling values, at least 3.")
@click.option("--alltoall", is_flag=True, help="Verify the all-to-all laws.")
@click.option("--k", "k", type=int, help="Only this block size in all-to-all runs.")
@click.option(
    "--exponent-tol",
    type=float,
    default=0.02,
    show_default=True,
    help="Allowed distance of a fitted exponent from its law.",
)
@handle_cli_error
def verify(
    config_path: Path | None,
    debug: bool,
    d_sweep: str | None,
    alltoall: bool,
    k: int | None,
    exponent_tol: float,
    **flags: object,
) -> None:
    """Fit detected folds and branch points against their asymptotic laws."""
    setup_logging(debug)
    run = build_run_config(
        config_path, d_sweep=parse_sweep(d_sweep), alltoall=alltoall or None, k=k, **flags
    )
    model = build_model(run)
    sweep = run.d_sweep or list(DEFAULT_D_SWEEP)
    threads = resolve_threads()

    with console.status(f"Sweeping {len(sweep)} values of d on {threads} worker(s)..."):
        report = run_verification(
            model,
            sweep,
            alltoall=run.alltoall,
            k_values=[run.k] if run.k is not None else None,
            opts=run.continuation_options(),
            exponent_tol=exponent_tol,
            threads=threads,
        )

    console.print(report_table(report))
    path = write_atomic(
        run.out / "verification.json", report.model_dump_json(indent=2).encode("utf-8")
    )
    console.print(f"Wrote {path}", style="green")
    if report.failed_d:
        console.print(f"Continuation failed at d = {report.failed_d}", style="yellow")
    if not report.passed:
        console.print("Verification failed", style="bold red")
        sys.exit(EXIT_VERIFY_FAILED)
    console.print("All fitted laws pass", style="bold green")
