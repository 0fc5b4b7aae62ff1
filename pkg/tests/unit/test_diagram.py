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

"""Tests for diagram assembly, summaries, export and rendering."""

import json
from dataclasses import replace

import numpy as np
import pytest
from pytest_mock import MockerFixture

from ring_snake.continuation import Branch, BranchEvent, EventKind
from ring_snake.diagram import (
    CSV_COLUMNS,
    SPLIT_MODE,
    Diagram,
    DiagramMode,
    ExportFormat,
    build_diagram,
    check_mode,
    export,
    export_csv,
    export_json,
    infer_mode,
    load_diagram,
    match_gamma,
    render_svg,
    seed_mu,
    single_branch_diagram,
    summarize,
)
from ring_snake.errors import ConfigError, OutputError
from ring_snake.model import CUBIC_QUINTIC, RingModel
from ring_snake.patterns import GammaKind, gamma_sequence, parse_label
from ring_snake.reduction import ReducedSystem, ReductionKind, SymmetryReduction
from tests.utils.fakes import make_branch, make_diagram


def labels(text: str) -> list:
    return [parse_label(t) for t in text.split()]


class TestModes:
    @pytest.mark.parametrize(
        "N, m, mode",
        [
            (6, 1, DiagramMode.SPARSE_SNAKE),
            (9, 2, DiagramMode.SPARSE_SNAKE),
            (6, 2, DiagramMode.SPECIAL_62),
            (8, 3, DiagramMode.SPECIAL_83),
            (6, 3, DiagramMode.ALL_TO_ALL),
            (20, 4, DiagramMode.GENERIC_M),
        ],
    )
    def test_infer_mode(self, N: int, m: int, mode: DiagramMode) -> None:
        """Test the mode picked for each coupling range."""
        assert infer_mode(N, m) is mode

    @pytest.mark.parametrize(
        "mode, model",
        [
            (DiagramMode.ALL_TO_ALL, RingModel(6, 1, 0.01)),
            (DiagramMode.SPARSE_SNAKE, RingModel(6, 3, 0.01)),
            (DiagramMode.SPECIAL_62, RingModel(8, 1, 0.01)),
        ],
    )
    def test_check_mode_rejects(self, mode: DiagramMode, model: RingModel) -> None:
        """Test that a mode on the wrong ring raises ConfigError."""
        with pytest.raises(ConfigError):
            check_mode(mode, model)

    def test_seed_mu(self) -> None:
        """Test that cubic-quintic seeds in the middle of [0, 1]."""
        assert seed_mu(CUBIC_QUINTIC) == 0.5


class TestMatchGamma:
    def test_exact_and_reversed(self) -> None:
        """Test that either traversal direction matches."""
        expected = gamma_sequence(GammaKind.SPARSE, 6)
        assert match_gamma(expected, GammaKind.SPARSE, 6)
        assert match_gamma(expected[::-1], GammaKind.SPARSE, 6)

    def test_foreign_labels_and_repeats_are_ignored(self) -> None:
        """Test that labels outside the set and repeats do not break a match."""
        observed = labels("V:1 U:1 U:1 hom- V:2 U:2 V:3 V:3 U:3 V:4")
        assert match_gamma(observed, GammaKind.SPARSE, 6)

    def test_missing_label(self) -> None:
        """Test that a skipped label is a mismatch."""
        assert not match_gamma(labels("V:1 U:1 U:2 V:3 U:3 V:4"), GammaKind.SPARSE, 6)

    def test_cyclic_rotation(self) -> None:
        """Test that closed curves match from any starting label."""
        observed = labels("B:1 D:1 C+:1 C-:1 A-:1 A+:1 B:1")
        assert match_gamma(observed, GammaKind.ALL_TO_ALL, 6, 1, cyclic=True)
        assert not match_gamma(observed, GammaKind.ALL_TO_ALL, 6, 1, cyclic=False)

    def test_none_never_matches(self) -> None:
        """Test that GenericM has nothing to match."""
        assert not match_gamma(labels("V:1"), GammaKind.NONE, 6)


class TestSummarize:
    def test_counts_and_mismatch_note(self) -> None:
        """Test the counts of the hand-built branch and its mismatch note."""
        summary = make_diagram().summary
        assert summary.fold_count == 1
        assert summary.right_fold_count == 1
        assert summary.left_fold_count == 0
        assert not summary.closed
        assert summary.label_sequence == labels("U:1 V:2 V:1")
        assert summary.gamma_match is GammaKind.NONE
        assert summary.notes[0].startswith("GammaMismatch: expected Sparse")

    def test_matching_snake(self) -> None:
        """Test that a branch visiting the sparse sequence is recognised."""
        sequence = gamma_sequence(GammaKind.SPARSE, 6)
        branch = replace(make_branch(), labels=sequence[:5])
        other = replace(make_branch(), labels=sequence[4:] + [None] * 2)
        diagram = Diagram(RingModel(6, 1, 0.005), DiagramMode.SPARSE_SNAKE, [branch, other])
        summary = summarize(diagram)
        assert summary.gamma_match is GammaKind.SPARSE
        assert summary.notes == []

    def test_branch_points_are_deduplicated(self) -> None:
        """Test that the same branch point seen from two branches counts once."""
        first, second = make_branch(), make_branch()
        first.events.append(BranchEvent(EventKind.BRANCH_POINT, 0.003, 1, 1.0))
        second.events.append(BranchEvent(EventKind.BRANCH_POINT, 0.003 + 1e-9, 1, 1.0))
        diagram = Diagram(RingModel(6, 1, 0.005), DiagramMode.SPARSE_SNAKE, [first, second])
        assert summarize(diagram).branch_point_count == 1

    def test_generic_m_notes(self) -> None:
        """Test the notes of an almost all-to-all GenericM ring."""
        diagram = Diagram(RingModel(20, 9, 0.001), DiagramMode.GENERIC_M, [make_branch(20)])
        summary = summarize(diagram)
        assert summary.gamma_match is GammaKind.NONE
        assert len(summary.notes) == 2

    def test_half_block_note(self) -> None:
        """Test the note for k = N/2 on all-to-all rings."""
        diagram = Diagram(RingModel(6, 3, 0.001), DiagramMode.ALL_TO_ALL, [make_branch()], k=3)
        assert any("k = N/2" in note for note in summarize(diagram).notes)

    def test_single_branch_diagram(self) -> None:
        """Test that a wrapped branch gets counts but no gamma check."""
        diagram = single_branch_diagram(RingModel(6, 1, 0.005), make_branch())
        assert diagram.mode is DiagramMode.SPARSE_SNAKE
        assert diagram.summary.fold_count == 1
        assert diagram.summary.notes == []


class TestBuildDiagram:
    def test_snake_seeds_at_u1(self, mocker: MockerFixture) -> None:
        """Test that snake modes trace once from the reduced U:1 pattern at mu = 0.5."""
        mock_trace = mocker.patch("ring_snake.diagram.trace_branch", return_value=make_branch())
        diagram = build_diagram(RingModel(6, 1, 0.005))
        _, x0, mu0, _ = mock_trace.call_args.args
        assert mu0 == 0.5
        assert x0.shape == (4,)
        assert x0[0] > 1.0 and np.all(x0[1:] == 0.0)
        assert diagram.mode is DiagramMode.SPARSE_SNAKE
        assert diagram.summary.fold_count == 1

    def test_block_size_range(self) -> None:
        """Test that k outside 1..N/2 is rejected before tracing."""
        with pytest.raises(ConfigError, match="1..3"):
            build_diagram(RingModel(6, 3, 0.001), k=4)

    def test_mode_mismatch(self) -> None:
        """Test that an explicit mode must fit the ring."""
        with pytest.raises(ConfigError):
            build_diagram(RingModel(6, 1, 0.005), DiagramMode.SPECIAL_83)

    def test_split_mode_is_an_eigenvector(self) -> None:
        """Test that node 3 against nodes 2 and 4 has eigenvalue f_u(v) - 8d on the (8, 3) ring."""
        model = RingModel(8, 3, 0.01)
        system = ReducedSystem(model, SymmetryReduction(ReductionKind.KAPPA, 8))
        _, u_minus, u_plus = model.nonlinearity.roots(0.5)
        x = np.array([u_plus, 0.8 * u_minus, 0.8 * u_minus, 0.8 * u_minus, 0.1])
        expected = float(model.nonlinearity.f_u(0.8 * u_minus, 0.5)) - 8 * model.d
        np.testing.assert_allclose(
            system.jacobian(x, 0.5) @ SPLIT_MODE, expected * SPLIT_MODE, atol=1e-12
        )


class TestExport:
    def test_json_document(self) -> None:
        """Test the top-level layout of the JSON export."""
        doc = json.loads(export_json(make_diagram()))
        assert doc["mode"] == "SparseSnake"
        assert doc["model"]["nonlinearity"]["kind"] == "cubic-quintic"
        assert len(doc["branches"][0]["points"]) == 5
        assert doc["branches"][0]["events"][1]["label"] == "V:1"
        assert doc["summary"]["fold_count"] == 1

    def test_load_restores_diagram(self) -> None:
        """Test that loading an export restores model, labels, events and summary."""
        original = make_diagram()
        loaded = load_diagram(export_json(original))
        assert loaded.model == original.model
        assert loaded.branches[0].labels == original.branches[0].labels
        assert loaded.branches[0].events == original.branches[0].events
        assert loaded.summary == original.summary
        np.testing.assert_array_equal(loaded.branches[0].mus, original.branches[0].mus)

    def test_non_finite_values(self) -> None:
        """Test that NaN in a branch raises OutputError."""
        diagram = make_diagram()
        diagram.branches[0].points[0].mu = float("nan")
        with pytest.raises(OutputError):
            export_json(diagram)

    def test_csv(self) -> None:
        """Test the CSV header and one row per point."""
        lines = export_csv(make_diagram()).decode().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 6
        assert lines[1] == "0,0,0.1,1.0,0,"
        assert lines[2].endswith(",U:1")
        assert export(make_diagram(), ExportFormat.CSV) == export_csv(make_diagram())

    @pytest.mark.parametrize("data", ["not json", "{}", '{"model": {"N": 6}}'])
    def test_load_invalid(self, data: str) -> None:
        """Test that malformed documents raise ConfigError."""
        with pytest.raises(ConfigError):
            load_diagram(data)


class TestRenderSvg:
    def test_deterministic_svg(self) -> None:
        """Test that equal diagrams render to identical SVG bytes."""
        first = render_svg(make_diagram())
        assert b"<svg" in first
        assert first == render_svg(make_diagram())

    def test_node_axis(self) -> None:
        """Test that a node coordinate can be plotted against mu."""
        assert b"<svg" in render_svg(make_diagram(), y="u:1")

    @pytest.mark.parametrize("axis", ["norm", "u:7", "u:x"])
    def test_unknown_axis(self, axis: str) -> None:
        """Test that unknown axes and nodes outside the ring raise ConfigError."""
        with pytest.raises(ConfigError):
            render_svg(make_diagram(), y=axis)

    def test_empty_branch_is_skipped(self) -> None:
        """Test that a diagram with an empty branch still renders."""
        diagram = make_diagram()
        diagram.branches.append(Branch())
        assert b"<svg" in render_svg(diagram)
