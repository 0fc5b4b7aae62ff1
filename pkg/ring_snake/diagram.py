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


"""Multi-branch bifurcation diagrams: assembly, classification and export."""

import enum
import io
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from scipy.optimize import brentq

from .continuation import (
    Branch,
    BranchEvent,
    ContinuationOptions,
    EventKind,
    point_on_step,
    switch_branch,
    tangent,
    trace_branch,
    trace_from,
)
from .errors import ConfigError, NoSignChangeError, NumericalError, OutputError
from .model import FloatArray, Nonlinearity, NonlinearityKind, RingModel, StatePoint
from .patterns import (
    GammaKind,
    PatternFamily,
    PatternLabel,
    gamma_sequence,
    make_pattern,
    parse_label,
)
from .reduction import ReducedSystem, ReductionKind, SymmetryReduction

BRANCH_POINT_DEDUP = 1e-6
ZERO_STATE_TOL = 1e-6
SPLIT_EPS = 1e-4
# node 3 against nodes 2 and 4 in kappa-reduced coordinates
SPLIT_MODE = np.array([0.0, 1.0, -2.0, 1.0, 0.0])


class DiagramMode(str, enum.Enum):
    SPARSE_SNAKE = "SparseSnake"
    SPECIAL_62 = "Special62"
    SPECIAL_83 = "Special83"
    ALL_TO_ALL = "AllToAll"
    GENERIC_M = "GenericM"


_EXPECTED_GAMMA = {
    DiagramMode.SPARSE_SNAKE: GammaKind.SPARSE,
    DiagramMode.SPECIAL_62: GammaKind.G62,
    DiagramMode.SPECIAL_83: GammaKind.G83,
    DiagramMode.ALL_TO_ALL: GammaKind.ALL_TO_ALL,
    DiagramMode.GENERIC_M: GammaKind.NONE,
}


def infer_mode(N: int, m: int) -> DiagramMode:
    """Pick the diagram mode for a ring from its coupling range."""
    if m == N // 2:
        return DiagramMode.ALL_TO_ALL
    if (N, m) == (6, 2):
        return DiagramMode.SPECIAL_62
    if (N, m) == (8, 3):
        return DiagramMode.SPECIAL_83
    if m <= 2:
        return DiagramMode.SPARSE_SNAKE
    return DiagramMode.GENERIC_M


def check_mode(mode: DiagramMode, model: RingModel) -> None:
    N, m = model.N, model.m
    if mode is DiagramMode.ALL_TO_ALL:
        if not model.is_all_to_all:
            raise ConfigError(f"AllToAll mode needs m = {N // 2}, got m = {m}")
        return
    if model.is_all_to_all:
        raise ConfigError(f"{mode.value} mode cannot run on an all-to-all ring (m = {m})")
    required = {DiagramMode.SPECIAL_62: (6, 2), DiagramMode.SPECIAL_83: (8, 3)}.get(mode)
    if required is not None and (N, m) != required:
        raise ConfigError(f"{mode.value} mode needs (N, m) = {required}, got ({N}, {m})")


@dataclass
class DiagramSummary:
    fold_count: int = 0
    branch_point_count: int = 0
    closed: bool = False
    label_sequence: list[PatternLabel] = field(default_factory=list)
    gamma_match: GammaKind = GammaKind.NONE
    left_fold_count: int = 0
    right_fold_count: int = 0
    notes: list[str] = field(default_factory=list)


@dataclass
class Diagram:
    model: RingModel
    mode: DiagramMode
    branches: list[Branch] = field(default_factory=list)
    summary: DiagramSummary = field(default_factory=DiagramSummary)
    k: int | None = None


def _dedupe(labels: list[PatternLabel]) -> list[PatternLabel]:
    out: list[PatternLabel] = []
    for label in labels:
        if not out or out[-1] != label:
            out.append(label)
    return out


def match_gamma(
    observed: list[PatternLabel], kind: GammaKind, N: int, k: int = 1, cyclic: bool = False
) -> bool:
    """Whether ``observed`` visits the labels of ``kind`` in order.

    Labels outside the expected set are ignored. Either traversal direction
    matches; closed curves match up to rotation.
    """
    expected = gamma_sequence(kind, N, k)
    if not expected:
        return False
    allowed = set(expected)
    seq = _dedupe([label for label in observed if label in allowed])
    if not cyclic:
        return seq in (expected, expected[::-1])
    if len(seq) > 1 and seq[0] == seq[-1]:
        seq = seq[:-1]
    n = len(expected)
    if len(seq) != n:
        return False
    for candidate in (expected, expected[::-1]):
        doubled = candidate + candidate
        if any(doubled[i : i + n] == seq for i in range(n)):
            return True
    return False


def seed_mu(nl: Nonlinearity) -> float:
    """Middle of the bistable range: 0.5 for cubic-quintic."""
    return 0.5 * nl.saddle_node_mu


def _count_events(diagram: Diagram) -> DiagramSummary:
    split = seed_mu(diagram.model.nonlinearity)
    folds = [e for b in diagram.branches for e in b.events_of(EventKind.FOLD)]
    branch_mus: list[float] = []
    for b in diagram.branches:
        for e in b.events_of(EventKind.BRANCH_POINT):
            if all(abs(e.mu - mu) > BRANCH_POINT_DEDUP for mu in branch_mus):
                branch_mus.append(e.mu)
    labels = _dedupe([label for b in diagram.branches for label in b.label_sequence()])
    return DiagramSummary(
        fold_count=len(folds),
        branch_point_count=len(branch_mus),
        closed=any(b.closed for b in diagram.branches),
        label_sequence=labels,
        left_fold_count=sum(1 for e in folds if e.mu < split),
        right_fold_count=sum(1 for e in folds if e.mu >= split),
    )


def summarize(diagram: Diagram) -> DiagramSummary:
    """Recompute the summary from the diagram's branches."""
    model, mode = diagram.model, diagram.mode
    summary = _count_events(diagram)

    kind = _EXPECTED_GAMMA[mode]
    if kind is GammaKind.NONE:
        summary.notes.append("GenericM diagrams carry no connected-set expectation")
        N, m = model.N, model.m
        if N % 2 == 0 and N > 8 and m == N // 2 - 1:
            summary.notes.append("Almost all-to-all coupling is decided case by case")
        return summary

    observed = [
        label for b in diagram.branches if not b.is_homogeneous for label in b.label_sequence()
    ]
    cyclic = mode is DiagramMode.ALL_TO_ALL
    if match_gamma(observed, kind, model.N, diagram.k or 1, cyclic=cyclic):
        summary.gamma_match = kind
    else:
        note = f"GammaMismatch: expected {kind.value}, observed {' '.join(map(str, observed))}"
        summary.notes.append(note)
        logging.warning(note)
    if cyclic and diagram.k is not None and 2 * diagram.k == model.N:
        summary.notes.append("k = N/2: the left-corner fold sits on the branch point")
    return summary


def single_branch_diagram(model: RingModel, branch: Branch) -> Diagram:
    """Wrap one traced branch so it can be exported and drawn like a diagram."""
    diagram = Diagram(model, infer_mode(model.N, model.m), [branch])
    diagram.summary = _count_events(diagram)
    return diagram


def _snake_diagram(model: RingModel, mode: DiagramMode, opts: ContinuationOptions) -> Diagram:
    system = ReducedSystem(model, SymmetryReduction(ReductionKind.KAPPA, model.N))
    mu0 = seed_mu(model.nonlinearity)
    seed = make_pattern(PatternLabel(PatternFamily.UBAR, 1), model, mu0)
    branch = trace_branch(system, system.reduce_state(seed), mu0, opts)
    if mode is DiagramMode.SPECIAL_83:
        return Diagram(model, mode, _connected_set_83(system, branch, opts))
    return Diagram(model, mode, [branch])


def _split_mode_value(system: ReducedSystem, y: FloatArray) -> float:
    """Eigenvalue f_u(v) - 8d of node 3 moving against nodes 2 and 4.

    Exact wherever nodes 2, 3 and 4 are equal.
    """
    jacobian = system.jacobian(y[:-1], y[-1])
    return float(SPLIT_MODE @ jacobian @ SPLIT_MODE / (SPLIT_MODE @ SPLIT_MODE))


def _split_crossings(system: ReducedSystem, branch: Branch) -> list[int]:
    values = [_split_mode_value(system, branch.state(i)) for i in range(len(branch))]
    return [i for i in range(len(values) - 1) if values[i] * values[i + 1] < 0]


def _locate_split(
    system: ReducedSystem, branch: Branch, index: int, opts: ContinuationOptions
) -> FloatArray:
    y0, t0 = branch.state(index), branch.tangents[index]
    sigma_end = float(t0 @ (branch.state(index + 1) - y0))

    def value(sigma: float) -> float:
        return _split_mode_value(system, point_on_step(system, y0, t0, sigma, opts.corrector))

    sigma = float(brentq(value, 0.0, sigma_end, xtol=1e-14))
    return point_on_step(system, y0, t0, sigma, opts.corrector)


def _connected_set_83(
    system: ReducedSystem, symmetric: Branch, opts: ContinuationOptions
) -> list[Branch]:
    """Splice the (8, 3) connected set out of the branch with nodes 2 = 3 = 4.

    The set leaves that branch where the split mode first loses stability
    and rejoins it where the mode regains it. The middle piece keeps nodes
    2 and 4 equal and passes W24-, W24+ and W3-.

    Returns:
        The branch from the V:1 end to the first crossing, the split branch
        and the branch from the second crossing to the V:5 end. The
        symmetric branch alone if either crossing is missing.
    """
    crossings = _split_crossings(system, symmetric)
    if len(crossings) != 2:
        logging.warning(
            f"Expected two split-mode crossings on the symmetric branch, found {len(crossings)}"
        )
        return [symmetric]
    first, second = sorted(crossings, key=lambda i: symmetric.points[i].mu)
    try:
        y_bp = _locate_split(system, symmetric, first, opts)
        normal = np.append(SPLIT_MODE / np.linalg.norm(SPLIT_MODE), 0.0)
        eps = SPLIT_EPS * max(float(np.linalg.norm(y_bp)), 1.0)
        y_seed = point_on_step(system, y_bp, normal, eps, opts.corrector)
        split = trace_from(
            system, y_seed, tangent(system, y_seed, normal), opts, bidirectional=False
        )
    except (NumericalError, ValueError) as e:
        logging.warning(f"Could not follow the split branch at mu={symmetric.points[first].mu:.6g}: {e}")
        return [symmetric]

    offsets = [float(SPLIT_MODE @ split.state(i)[:-1]) for i in range(len(split))]
    back = next((i for i in range(1, len(split)) if offsets[i] <= 0 < offsets[i - 1]), None)
    if back is None:
        logging.warning("The split branch never returned to nodes 2 = 3 = 4")
        return [symmetric, split]
    logging.info(
        f"Split branch leaves at mu={y_bp[-1]:.6g} and rejoins near mu={split.points[back].mu:.6g}"
    )
    split = split.truncate(back - 1)
    last = len(symmetric) - 1
    if first < second:
        return [symmetric.segment(0, first), split, symmetric.segment(second + 1, last)]
    return [symmetric.segment(last, first + 1), split, symmetric.segment(second, 0)]


def _homogeneous_fold_index(branch: Branch, mu0: float) -> int | None:
    for event in branch.events_of(EventKind.FOLD):
        if event.mu > mu0:
            return event.point_index
    return None


def _alltoall_diagram(model: RingModel, k: int, opts: ContinuationOptions) -> Diagram:
    system = ReducedSystem(model, SymmetryReduction(ReductionKind.TWO_BLOCK, model.N, k))
    mu0 = seed_mu(model.nonlinearity)
    u_minus = model.nonlinearity.roots(mu0)[1]
    hom_opts = replace(
        opts,
        stop_on_exceptional=True,
        stop_labels_low=(),
        stop_labels_high=(PatternLabel(PatternFamily.HOMOGENEOUS_PLUS),),
        positive_cone=True,
        detect_closure=False,
        mu_window=(max(opts.mu_window[0], 0.0), opts.mu_window[1]),
    )
    homogeneous = trace_branch(system, np.array([u_minus, u_minus]), mu0, hom_opts)
    fold_index = _homogeneous_fold_index(homogeneous, mu0)
    if fold_index is not None:
        homogeneous = homogeneous.truncate(fold_index - 1)
    # hom- meets the zero state at mu = 0; branch points there belong to neither curve
    homogeneous.events = [
        e
        for e in homogeneous.events
        if e.kind is not EventKind.BRANCH_POINT
        or (e.mu > 0 and homogeneous.points[e.point_index].l2norm > ZERO_STATE_TOL)
    ]
    branch_points = sorted(homogeneous.events_of(EventKind.BRANCH_POINT), key=lambda e: e.mu)
    if not branch_points:
        raise NoSignChangeError(
            f"No branch point on the homogeneous branch for N={model.N}, d={model.d:g}"
        )

    loop_opts = replace(
        opts,
        stop_on_exceptional=False,
        stop_labels_low=(),
        stop_labels_high=(),
        positive_cone=False,
        detect_closure=True,
    )
    y_seed, t_seed = switch_branch(system, homogeneous, branch_points[0], 1, loop_opts)
    loop = trace_from(system, y_seed, t_seed, loop_opts, bidirectional=False)
    if not loop.closed:
        logging.warning(f"All-to-all branch for k={k} did not close")
    return Diagram(model, DiagramMode.ALL_TO_ALL, [homogeneous, loop], k=k)


def build_diagram(
    model: RingModel,
    mode: DiagramMode | None = None,
    k: int | None = None,
    opts: ContinuationOptions | None = None,
) -> Diagram:
    """Trace every branch of the diagram for ``mode`` and summarize it.

    Snake modes seed the kappa-reduced system at U:1 in the middle of the
    bistable range (mu = 0.5 for cubic-quintic) and trace both ways to the
    exceptional set. Special83 then leaves that branch along the mode that
    moves node 3 against nodes 2 and 4, and keeps the three pieces of the
    connected set. AllToAll traces the homogeneous branch in the two-block
    system, switches at its left branch point and follows the new branch
    until it closes.

    Raises:
        ConfigError: If ``mode`` does not fit (N, m) or ``k`` is out of range.
    """
    mode = mode or infer_mode(model.N, model.m)
    check_mode(mode, model)
    opts = opts or ContinuationOptions()
    logging.info(f"Building {mode.value} diagram for N={model.N}, m={model.m}, d={model.d:g}")
    if mode is DiagramMode.ALL_TO_ALL:
        k = 1 if k is None else k
        if not 1 <= k <= model.N // 2:
            raise ConfigError(f"Block size k must lie in 1..{model.N // 2}, got {k}")
        diagram = _alltoall_diagram(model, k, opts)
    else:
        diagram = _snake_diagram(model, mode, opts)
    diagram.summary = summarize(diagram)
    return diagram


def _model_dict(model: RingModel) -> dict[str, Any]:
    return {
        "N": model.N,
        "m": model.m,
        "d": model.d,
        "nonlinearity": {
            "kind": model.nonlinearity.kind.value,
            "coefficients": list(model.nonlinearity.coefficients),
        },
    }


def _branch_dict(index: int, branch: Branch) -> dict[str, Any]:
    return {
        "id": index,
        "homogeneous": branch.is_homogeneous,
        "points": [
            {
                "mu": p.mu,
                "u": [float(v) for v in p.u],
                "l2norm": p.l2norm,
                "stability": branch.stability[i],
                "label": None if branch.labels[i] is None else str(branch.labels[i]),
            }
            for i, p in enumerate(branch.points)
        ],
        "events": [
            {
                "kind": e.kind.value,
                "mu": e.mu,
                "point_index": e.point_index,
                "tangent_mu": e.tangent_mu,
                "label": None if e.label is None else str(e.label),
            }
            for e in branch.events
        ],
    }


def to_dict(diagram: Diagram) -> dict[str, Any]:
    s = diagram.summary
    return {
        "model": _model_dict(diagram.model),
        "mode": diagram.mode.value,
        "k": diagram.k,
        "branches": [_branch_dict(i, b) for i, b in enumerate(diagram.branches)],
        "summary": {
            "fold_count": s.fold_count,
            "branch_point_count": s.branch_point_count,
            "closed": s.closed,
            "label_sequence": [str(label) for label in s.label_sequence],
            "gamma_match": s.gamma_match.value,
            "left_fold_count": s.left_fold_count,
            "right_fold_count": s.right_fold_count,
            "notes": s.notes,
        },
    }


def export_json(diagram: Diagram) -> bytes:
    """Serialize to JSON; floats use the shortest repr that round-trips exactly."""
    try:
        return json.dumps(to_dict(diagram), indent=2, allow_nan=False).encode("utf-8")
    except ValueError as e:
        raise OutputError(f"Diagram contains non-finite values: {e}") from e


CSV_COLUMNS = ["branch_id", "point_index", "mu", "l2norm", "stability", "label"]


def export_csv(diagram: Diagram) -> bytes:
    rows = [
        {
            "branch_id": b_id,
            "point_index": i,
            "mu": p.mu,
            "l2norm": p.l2norm,
            "stability": branch.stability[i],
            "label": "" if branch.labels[i] is None else str(branch.labels[i]),
        }
        for b_id, branch in enumerate(diagram.branches)
        for i, p in enumerate(branch.points)
    ]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    return frame.to_csv(index=False, lineterminator="\n").encode("utf-8")


class ExportFormat(str, enum.Enum):
    JSON = "json"
    CSV = "csv"


def export(diagram: Diagram, fmt: ExportFormat = ExportFormat.JSON) -> bytes:
    if fmt is ExportFormat.CSV:
        return export_csv(diagram)
    return export_json(diagram)


def _load_label(text: str | None) -> PatternLabel | None:
    return None if text is None else parse_label(text)


def load_diagram(data: bytes | str) -> Diagram:
    """Rebuild a diagram from ``export_json`` output.

    Tangents are not stored, so loaded branches have none.

    Raises:
        ConfigError: If the document is not a valid diagram export.
    """
    try:
        doc = json.loads(data)
        ring = doc["model"]
        nl = ring["nonlinearity"]
        model = RingModel(
            N=int(ring["N"]),
            m=int(ring["m"]),
            d=float(ring["d"]),
            nonlinearity=Nonlinearity(
                NonlinearityKind(nl["kind"]), tuple(float(c) for c in nl["coefficients"])
            ),
        )
        branches = []
        for entry in doc["branches"]:
            points = [
                StatePoint(np.array(p["u"], dtype=float), float(p["mu"]), model.d)
                for p in entry["points"]
            ]
            branches.append(
                Branch(
                    points=points,
                    events=[
                        BranchEvent(
                            EventKind(e["kind"]),
                            float(e["mu"]),
                            int(e["point_index"]),
                            float(e.get("tangent_mu", 0.0)),
                            _load_label(e.get("label")),
                        )
                        for e in entry["events"]
                    ],
                    labels=[_load_label(p.get("label")) for p in entry["points"]],
                    stability=[int(p["stability"]) for p in entry["points"]],
                )
            )
        s = doc["summary"]
        summary = DiagramSummary(
            fold_count=int(s["fold_count"]),
            branch_point_count=int(s["branch_point_count"]),
            closed=bool(s["closed"]),
            label_sequence=[parse_label(text) for text in s["label_sequence"]],
            gamma_match=GammaKind(s["gamma_match"]),
            left_fold_count=int(s.get("left_fold_count", 0)),
            right_fold_count=int(s.get("right_fold_count", 0)),
            notes=list(s.get("notes", [])),
        )
        return Diagram(model, DiagramMode(doc["mode"]), branches, summary, doc.get("k"))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid diagram file: {e}") from e


@dataclass(frozen=True)
class RenderStyle:
    width: float = 7.0
    height: float = 5.0
    line_width: float = 1.2
    marker_size: float = 5.0
    title: str | None = None


def _axis_values(branch: Branch, axis: str) -> np.ndarray:
    if axis == "mu":
        return branch.mus
    if axis == "l2norm":
        return np.array([p.l2norm for p in branch.points])
    if axis.startswith("u:") and axis[2:].isdigit():
        node = int(axis[2:])
        if branch.points and not 1 <= node <= branch.points[0].u.size:
            raise ConfigError(f"Node {node} is outside the ring")
        return np.array([p.u[node - 1] for p in branch.points])
    raise ConfigError(f"Unknown axis '{axis}'. Use mu, l2norm or u:<node>")


_MARKERS = {
    EventKind.FOLD: ("o", "fold"),
    EventKind.BRANCH_POINT: ("x", "branch point"),
    EventKind.LABEL_STOP: ("s", "exceptional stop"),
}


def render_svg(
    diagram: Diagram, x: str = "mu", y: str = "l2norm", style: RenderStyle | None = None
) -> bytes:
    """Draw one polyline per branch with fold, branch-point and stop markers.

    The homogeneous branch is dotted. Output is deterministic for equal input.
    """
    style = style or RenderStyle()
    fig = Figure(figsize=(style.width, style.height))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot()
    seen: set[EventKind] = set()
    for branch in diagram.branches:
        if not branch.points:
            continue
        xs, ys = _axis_values(branch, x), _axis_values(branch, y)
        linestyle = ":" if branch.is_homogeneous else "-"
        ax.plot(xs, ys, linestyle=linestyle, color="black", linewidth=style.line_width)
        for event in branch.events:
            if event.kind not in _MARKERS:
                continue
            marker, name = _MARKERS[event.kind]
            ax.plot(
                xs[event.point_index],
                ys[event.point_index],
                marker=marker,
                linestyle="none",
                color="tab:red" if event.kind is EventKind.BRANCH_POINT else "tab:blue",
                markerfacecolor="none" if event.kind is EventKind.LABEL_STOP else None,
                markersize=style.marker_size,
                label=None if event.kind in seen else name,
            )
            seen.add(event.kind)
    ax.set_xlabel(r"$\mu$" if x == "mu" else x)
    ax.set_ylabel(r"$\|U\|_2$" if y == "l2norm" else y)
    m = diagram.model
    ax.set_title(style.title or f"N={m.N}, m={m.m}, d={m.d:g}")
    if seen:
        ax.legend(loc="best", frameon=False)
    buffer = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": "ring-snake"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()
