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


import logging
import os
import tempfile
from pathlib import Path

from rich.table import Table

from ...diagram import Diagram, export_csv, export_json, render_svg
from ...errors import OutputError


def write_atomic(path: str | Path, data: bytes) -> Path:
    """Write ``data`` to a temp file next to ``path`` and rename it into place.

    Raises:
        OutputError: If the directory cannot be created or the write fails.
    """
    path = Path(path)
    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as tmp:
            tmp_name = tmp.name
            tmp.write(data)
        os.replace(tmp_name, path)
    except OSError as e:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(f"Could not write {path}: {e}") from e
    logging.debug(f"Wrote {len(data)} bytes to {path}")
    return path


def write_diagram_outputs(
    diagram: Diagram,
    out: Path,
    stem: str,
    json_out: bool = True,
    csv_out: bool = True,
    svg_out: bool = True,
) -> list[Path]:
    """Write the enabled JSON, CSV and SVG renderings of ``diagram``."""
    written = []
    if json_out:
        written.append(write_atomic(out / f"{stem}.json", export_json(diagram)))
    if csv_out:
        written.append(write_atomic(out / f"{stem}.csv", export_csv(diagram)))
    if svg_out:
        written.append(write_atomic(out / f"{stem}.svg", render_svg(diagram)))
    return written


def summary_lines(diagram: Diagram) -> list[str]:
    s = diagram.summary
    model = diagram.model
    lines = [
        f"N={model.N} m={model.m} d={model.d:g} nonlinearity={model.nonlinearity.kind.value}",
        f"mode: {diagram.mode.value}" + (f" k={diagram.k}" if diagram.k is not None else ""),
        f"branches: {len(diagram.branches)}",
        f"fold_count: {s.fold_count} (left {s.left_fold_count}, right {s.right_fold_count})",
        f"branch_point_count: {s.branch_point_count}",
        f"closed: {str(s.closed).lower()}",
        f"gamma_match: {s.gamma_match.value}",
        f"label_sequence: {' '.join(str(label) for label in s.label_sequence)}",
    ]
    lines.extend(f"note: {note}" for note in s.notes)
    return lines


def summary_table(diagram: Diagram) -> Table:
    table = Table(title="Diagram summary", show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", style="cyan")
    for line in summary_lines(diagram):
        key, _, value = line.partition(": ")
        if value:
            table.add_row(key, value)
        else:
            table.add_row("model", line)
    return table
