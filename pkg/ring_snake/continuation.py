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


"""Pseudo-arclength continuation in mu with fold and branch-point detection.

A branch is a list of points (x, mu) in reduced coordinates. Each step
predicts along the unit tangent and corrects with a bordered Newton solve
on the hyperplane orthogonal to that tangent. Between two accepted points
the sign of the tangent's mu-component flags folds and the sign of the
reduced Jacobian determinant flags branch points. Both are then located on
the step by Brent's method.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np
from scipy.linalg import null_space, svd
from scipy.optimize import brentq

from .errors import (
    ConfigError,
    DimensionMismatchError,
    FallbackToOriginalBranchError,
    NoSignChangeError,
    NullVectorNotFoundError,
    NumericalError,
    SeedNotConvergedError,
    SingularJacobianError,
    StepCollapseError,
)
from .model import FloatArray, RingModel, StatePoint
from .patterns import PatternFamily, PatternLabel, classify
from .reduction import ReducedSystem
from .solver import (
    NewtonOptions,
    NewtonResult,
    bordered_matrix,
    bordered_solve,
    newton_solve,
)

STABILITY_TOL = 1e-10
POSITIVE_CONE_TOL = 1e-8
SIGMA_XTOL = 1e-14
FOLD_GAP = 1e-4
NULL_RTOL = 1e-6
FALLBACK_ALIGNMENT = 0.999


class ContinuationSystem(Protocol):
    """Anything with a residual G(x, mu), its Jacobian and its mu-derivative."""

    @property
    def dim(self) -> int: ...

    def residual(self, x: FloatArray, mu: float) -> FloatArray: ...

    def jacobian(self, x: FloatArray, mu: float) -> FloatArray: ...

    def param_derivative(self, x: FloatArray, mu: float) -> FloatArray: ...


class EventKind(str, enum.Enum):
    FOLD = "Fold"
    BRANCH_POINT = "BranchPoint"
    WINDOW_EXIT = "WindowExit"
    LABEL_STOP = "LabelStop"
    CLOSURE = "Closure"


def _corrector_defaults() -> NewtonOptions:
    return NewtonOptions(max_iters=25)


@dataclass(frozen=True)
class ContinuationOptions:
    """Step control and stopping rules for ``trace_branch``.

    ``stop_labels_low``/``stop_labels_high`` default to the exceptional set
    of the model (see ``default_stop_labels``). The low list is checked
    when mu < 2 * delta_star and the high list within 2 * delta_star of the
    saddle-node mu of the nonlinearity (1 for cubic-quintic).
    """

    ds_init: float = 1e-3
    ds_min: float = 1e-8
    ds_max: float = 1e-2
    max_steps: int = 50000
    mu_window: tuple[float, float] = (-0.05, 1.05)
    stop_on_exceptional: bool = True
    stop_labels_low: tuple[PatternLabel, ...] | None = None
    stop_labels_high: tuple[PatternLabel, ...] | None = None
    delta_star: float = 0.02
    event_tol: float = 1e-9
    homogeneous_radius: float = 0.05
    max_turn_degrees: float = 30.0
    grow_factor: float = 1.3
    easy_steps: int = 4
    easy_iterations: int = 3
    corrector: NewtonOptions = field(default_factory=_corrector_defaults)
    detect_closure: bool = True
    closure_tol: float = 1e-6
    positive_cone: bool = False
    classify_tol: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.ds_min <= self.ds_init <= self.ds_max:
            raise ConfigError(
                "Step sizes must satisfy 0 < ds_min <= ds_init <= ds_max, got "
                f"{self.ds_min}, {self.ds_init}, {self.ds_max}"
            )
        lo, hi = self.mu_window
        if not lo < hi:
            raise ConfigError(f"mu_window must be increasing, got {self.mu_window}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be positive, got {self.max_steps}")
        if not 0 < self.max_turn_degrees < 90:
            raise ConfigError("max_turn_degrees must lie in (0, 90)")


def default_stop_labels(
    model: RingModel,
) -> tuple[tuple[PatternLabel, ...], tuple[PatternLabel, ...]]:
    """Labels that end a trace near mu = 0 and near mu = 1.

    All-to-all rings have no exceptional set, so nothing stops them.
    """
    if model.is_all_to_all:
        return (), ()
    V, U = PatternFamily.VBAR, PatternFamily.UBAR
    low = (
        PatternLabel(V, 1),
        PatternLabel(PatternFamily.ZERO),
        PatternLabel(PatternFamily.HOMOGENEOUS_MINUS),
    )
    high = (
        PatternLabel(V, model.half),
        PatternLabel(U, model.half),
        PatternLabel(PatternFamily.HOMOGENEOUS_PLUS),
    )
    return low, high


@dataclass
class BranchEvent:
    kind: EventKind
    mu: float
    point_index: int
    tangent_mu: float
    label: PatternLabel | None = None


@dataclass
class Branch:
    """One traced solution curve.

    ``labels`` and ``stability`` run parallel to ``points``; a label is None
    where no pattern lies within the classification tolerance.
    """

    points: list[StatePoint] = field(default_factory=list)
    tangents: list[FloatArray] = field(default_factory=list)
    events: list[BranchEvent] = field(default_factory=list)
    labels: list[PatternLabel | None] = field(default_factory=list)
    stability: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def mus(self) -> FloatArray:
        return np.array([p.mu for p in self.points])

    @property
    def closed(self) -> bool:
        return any(e.kind is EventKind.CLOSURE for e in self.events)

    @property
    def is_homogeneous(self) -> bool:
        return bool(self.points) and all(np.ptp(p.u) < 1e-8 for p in self.points)

    def events_of(self, kind: EventKind) -> list[BranchEvent]:
        return [e for e in self.events if e.kind is kind]

    def state(self, index: int) -> FloatArray:
        point = self.points[index]
        x = point.u if point.x is None else point.x
        return np.append(x, point.mu)

    def labelled_points(self) -> list[tuple[int, PatternLabel]]:
        return [(i, label) for i, label in enumerate(self.labels) if label is not None]

    def label_sequence(self) -> list[PatternLabel]:
        """Labels in traversal order with consecutive repeats and gaps removed."""
        sequence: list[PatternLabel] = []
        for label in self.labels:
            if label is not None and (not sequence or sequence[-1] != label):
                sequence.append(label)
        return sequence

    def truncate(self, last: int) -> "Branch":
        """Keep points 0..last and the events that refer to them."""
        keep = last + 1
        return Branch(
            points=self.points[:keep],
            tangents=self.tangents[:keep],
            events=[e for e in self.events if e.point_index <= last],
            labels=self.labels[:keep],
            stability=self.stability[:keep],
        )

    def segment(self, first: int, last: int) -> "Branch":
        """Points first..last inclusive, walked backwards when first > last."""
        step = 1 if first <= last else -1
        order = list(range(first, last + step, step))
        position = {index: n for n, index in enumerate(order)}
        events = [
            replace(e, point_index=position[e.point_index], tangent_mu=step * e.tangent_mu)
            for e in self.events
            if e.point_index in position
        ]
        return Branch(
            points=[self.points[i] for i in order],
            tangents=[step * self.tangents[i] for i in order],
            events=sorted(events, key=lambda e: e.point_index),
            labels=[self.labels[i] for i in order],
            stability=[self.stability[i] for i in order],
        )


def _model_of(system: ContinuationSystem) -> RingModel | None:
    return system.model if isinstance(system, ReducedSystem) else None


def _full_state(system: ContinuationSystem, x: FloatArray) -> FloatArray:
    if isinstance(system, ReducedSystem):
        return system.full_state(x)
    return np.array(x, dtype=float)


def extended_jacobian(system: ContinuationSystem, y: FloatArray) -> FloatArray:
    """The n x (n+1) matrix [G_x | G_mu] at y = (x, mu)."""
    n = system.dim
    return np.column_stack(
        [system.jacobian(y[:n], y[n]), system.param_derivative(y[:n], y[n])]
    )


def tangent(
    system: ContinuationSystem, y: FloatArray, previous: FloatArray | None = None
) -> FloatArray:
    """Unit null vector of [G_x | G_mu] at y.

    Without ``previous`` the vector points toward increasing mu; otherwise it
    has positive inner product with ``previous``.

    Raises:
        SingularJacobianError: If the extended Jacobian is rank deficient.
    """
    y = np.asarray(y, dtype=float)
    n = system.dim
    if previous is None:
        basis = null_space(extended_jacobian(system, y))
        if basis.shape[1] != 1:
            raise SingularJacobianError(
                f"Extended Jacobian has a {basis.shape[1]}-dimensional null space "
                f"at mu={y[n]:.6g}"
            )
        t = basis[:, 0]
        return -t if t[n] < 0 else t
    previous = np.asarray(previous, dtype=float)
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    z = bordered_solve(
        system.jacobian(y[:n], y[n]),
        system.param_derivative(y[:n], y[n]),
        previous[:n],
        previous[n],
        rhs,
    )
    return z / np.linalg.norm(z)


def _correct(
    system: ContinuationSystem, y_pred: FloatArray, normal: FloatArray, opts: NewtonOptions
) -> NewtonResult:
    """Newton on G = 0 restricted to the hyperplane through y_pred with this normal."""
    n = system.dim

    def fun(y: FloatArray) -> FloatArray:
        return np.append(system.residual(y[:n], y[n]), normal @ (y - y_pred))

    def jac(y: FloatArray) -> FloatArray:
        return bordered_matrix(
            system.jacobian(y[:n], y[n]),
            system.param_derivative(y[:n], y[n]),
            normal[:n],
            normal[n],
        )

    return newton_solve(fun, jac, y_pred, opts)


def point_on_step(
    system: ContinuationSystem,
    y0: FloatArray,
    t0: FloatArray,
    sigma: float,
    opts: NewtonOptions,
) -> FloatArray:
    """Corrected point at arclength sigma along the step starting at (y0, t0)."""
    return _correct(system, y0 + sigma * t0, t0, opts).x


def _determinant(system: ContinuationSystem, y: FloatArray) -> float:
    n = system.dim
    return float(np.linalg.det(system.jacobian(y[:n], y[n])))


def _point_near(
    system: ContinuationSystem,
    y0: FloatArray,
    t0: FloatArray,
    sigma: float,
    opts: NewtonOptions,
) -> FloatArray:
    """Corrected point at sigma, stepping back slightly if the corrector is singular there."""
    for offset in (0.0, 1e-12, 1e-10, 1e-8):
        try:
            return point_on_step(system, y0, t0, sigma - offset, opts)
        except SingularJacobianError:
            continue
    raise SingularJacobianError(f"Corrector singular near sigma={sigma:.3e}")


def locate_fold(
    system: ContinuationSystem,
    y0: FloatArray,
    t0: FloatArray,
    lo: float,
    hi: float,
    opts: ContinuationOptions | None = None,
) -> tuple[float, FloatArray, FloatArray]:
    """Locate the zero of the tangent's mu-component on the step [lo, hi].

    Returns:
        (sigma, y, t): the arclength offset, the fold point and its tangent.

    Raises:
        NoSignChangeError: If the mu-component has the same sign at both ends.
    """
    opts = opts or ContinuationOptions()

    def tangent_mu(sigma: float) -> float:
        y = point_on_step(system, y0, t0, sigma, opts.corrector)
        return float(tangent(system, y, t0)[-1])

    f_lo, f_hi = tangent_mu(lo), tangent_mu(hi)
    if f_lo * f_hi > 0:
        raise NoSignChangeError(
            f"Tangent mu-component keeps its sign on [{lo:.3e}, {hi:.3e}]"
        )
    sigma = float(brentq(tangent_mu, lo, hi, xtol=SIGMA_XTOL))
    y = point_on_step(system, y0, t0, sigma, opts.corrector)
    t = tangent(system, y, t0)
    if abs(t[-1]) > math.sqrt(opts.event_tol):
        logging.warning(f"Fold near mu={y[-1]:.9f} located with tangent_mu={t[-1]:.2e}")
    return sigma, y, t


def locate_branch_point(
    system: ContinuationSystem,
    y0: FloatArray,
    t0: FloatArray,
    lo: float,
    hi: float,
    opts: ContinuationOptions | None = None,
) -> tuple[float, FloatArray, FloatArray]:
    """Locate a sign change of det(G_x) on the step [lo, hi].

    Raises:
        NoSignChangeError: If the determinant has the same sign at both ends.
    """
    opts = opts or ContinuationOptions()

    def det(sigma: float) -> float:
        try:
            y = point_on_step(system, y0, t0, sigma, opts.corrector)
        except SingularJacobianError:
            # the corrector itself is singular only on the branch point
            return 0.0
        return _determinant(system, y)

    d_lo, d_hi = det(lo), det(hi)
    if d_lo * d_hi > 0:
        raise NoSignChangeError(
            f"Jacobian determinant keeps its sign on [{lo:.3e}, {hi:.3e}]"
        )
    sigma = float(brentq(det, lo, hi, xtol=SIGMA_XTOL))
    y = _point_near(system, y0, t0, sigma, opts.corrector)
    return sigma, y, _branch_point_tangent(system, y, t0, opts.corrector)


def _branch_point_tangent(
    system: ContinuationSystem,
    y: FloatArray,
    previous: FloatArray,
    corrector: NewtonOptions,
    delta: float = 1e-5,
) -> FloatArray:
    """Tangent of the traced branch at the branch point y.

    ``previous`` is projected onto the two weakest right singular directions
    of [G_x | G_mu], which span the kernel at y. Points at +-delta along
    that guess are corrected back onto the branch and their tangents are
    averaged. The guess itself is returned if either correction fails.
    """
    _, _, vt = svd(extended_jacobian(system, y))
    basis = vt[-2:].T
    guess = basis @ (basis.T @ previous)
    norm = float(np.linalg.norm(guess))
    if norm < 1e-12:
        return previous.copy()
    guess /= norm
    try:
        t_lo, t_hi = (
            tangent(system, _correct(system, y + s * guess, guess, corrector).x, guess)
            for s in (-delta, delta)
        )
    except NumericalError:
        return guess
    t = t_lo + t_hi
    return t / float(np.linalg.norm(t))


def _detect_events(
    system: ContinuationSystem,
    y0: FloatArray,
    t0: FloatArray,
    sigma_end: float,
    t_end: FloatArray,
    det0: float,
    det_end: float,
    opts: ContinuationOptions,
) -> list[tuple[float, EventKind, FloatArray, FloatArray]]:
    """Folds and branch points strictly inside one accepted step.

    A determinant sign change is only a branch point away from a fold, so
    the neighbourhood of a located fold is cut out of the search.
    """
    found: list[tuple[float, EventKind, FloatArray, FloatArray]] = []
    segments = [(0.0, sigma_end, det0, det_end)]
    try:
        if t0[-1] * t_end[-1] < 0:
            sigma_f, y_f, t_f = locate_fold(system, y0, t0, 0.0, sigma_end, opts)
            found.append((sigma_f, EventKind.FOLD, y_f, t_f))
            gap = FOLD_GAP * sigma_end
            left, right = sigma_f - gap, sigma_f + gap
            segments = []
            if left > 0:
                y_l = point_on_step(system, y0, t0, left, opts.corrector)
                segments.append((0.0, left, det0, _determinant(system, y_l)))
            if right < sigma_end:
                y_r = point_on_step(system, y0, t0, right, opts.corrector)
                segments.append((right, sigma_end, _determinant(system, y_r), det_end))
        for lo, hi, d_lo, d_hi in segments:
            if d_lo * d_hi < 0:
                sigma_b, y_b, t_b = locate_branch_point(system, y0, t0, lo, hi, opts)
                found.append((sigma_b, EventKind.BRANCH_POINT, y_b, t_b))
    except (NumericalError, ValueError) as e:
        logging.warning(f"Event location failed near mu={y0[-1]:.6g}: {e}")
    return sorted(found, key=lambda item: item[0])


def _stop_label_hit(
    label: PatternLabel | None,
    mu: float,
    low: tuple[PatternLabel, ...],
    high: tuple[PatternLabel, ...],
    delta_star: float,
    upper: float = 1.0,
) -> bool:
    if label is None:
        return False
    return (label in low and mu < 2 * delta_star) or (
        label in high and mu > upper - 2 * delta_star
    )


@dataclass
class _Leg:
    ys: list[FloatArray]
    ts: list[FloatArray]
    labels: list[PatternLabel | None]
    events: list[BranchEvent]

    @property
    def closed(self) -> bool:
        return any(e.kind is EventKind.CLOSURE for e in self.events)


class _Tracer:
    """Runs one direction of a trace and owns its per-step state."""

    def __init__(self, system: ContinuationSystem, opts: ContinuationOptions) -> None:
        self.system = system
        self.opts = opts
        self.model = _model_of(system)
        if self.model is not None:
            low, high = default_stop_labels(self.model)
        else:
            low, high = (), ()
        self.low = low if opts.stop_labels_low is None else opts.stop_labels_low
        self.high = high if opts.stop_labels_high is None else opts.stop_labels_high
        self.upper = self.model.nonlinearity.saddle_node_mu if self.model else 1.0
        self.cos_max = math.cos(math.radians(opts.max_turn_degrees))

    def label(self, y: FloatArray, separated: bool = True) -> PatternLabel | None:
        if self.model is None:
            return None
        u = _full_state(self.system, y[:-1])
        return classify(u, self.model, float(y[-1]), self.opts.classify_tol, separated)

    def capped(self, y: FloatArray, ds: float) -> float:
        spread = float(np.ptp(_full_state(self.system, y[:-1])))
        if 1e-10 < spread < self.opts.homogeneous_radius:
            return min(ds, self.opts.ds_init / 10)
        return ds

    def outside(self, y: FloatArray) -> bool:
        lo, hi = self.opts.mu_window
        if not lo <= y[-1] <= hi:
            return True
        if self.opts.positive_cone:
            return bool(np.min(_full_state(self.system, y[:-1])) < -POSITIVE_CONE_TOL)
        return False

    def run(self, y0: FloatArray, t0: FloatArray, closure: bool) -> _Leg:
        opts = self.opts
        leg = _Leg([y0], [t0], [self.label(y0)], [])
        det_prev = _determinant(self.system, y0)
        ds, easy = opts.ds_init, 0
        armed = False
        arm_radius = 10 * opts.ds_max

        for _ in range(opts.max_steps):
            y, t = leg.ys[-1], leg.ts[-1]
            h = self.capped(y, ds)
            try:
                result = _correct(self.system, y + h * t, t, opts.corrector)
                y_new = result.x
                t_new = tangent(self.system, y_new, t)
                accepted = float(t_new @ t) >= self.cos_max
                reason = "turn angle too large"
            except NumericalError as e:
                accepted, reason = False, str(e)
            if accepted and self.outside(y_new) and h > opts.ds_init / 10:
                accepted, reason = False, "approaching the window boundary"
            if not accepted:
                ds = h / 2
                easy = 0
                logging.debug(f"Step rejected at mu={y[-1]:.6g} ({reason}); ds -> {ds:.3e}")
                if ds < opts.ds_min:
                    raise StepCollapseError(
                        f"Step size fell below ds_min={opts.ds_min:g} at mu={y[-1]:.9g}: "
                        f"{reason}"
                    )
                continue

            easy = easy + 1 if result.iterations <= opts.easy_iterations else 0
            if easy >= opts.easy_steps:
                ds = min(h * opts.grow_factor, opts.ds_max)
                easy = 0
                logging.debug(f"Step grown to ds={ds:.3e} at mu={y_new[-1]:.6g}")

            if self.outside(y_new):
                self.append(leg, y_new, t_new)
                self.mark(leg, EventKind.WINDOW_EXIT)
                logging.info(f"Left the continuation window at mu={y_new[-1]:.6g}")
                break

            y_end, t_end, closing = y_new, t_new, False
            distance = float(np.linalg.norm(y_new - leg.ys[0]))
            armed = armed or distance > arm_radius
            if closure and armed and distance < arm_radius:
                y_closed = self.closure_point(leg, y, y_new)
                if y_closed is not None:
                    t_closed = tangent(self.system, y_closed, t)
                    y_end, t_end, closing = y_closed, t_closed, True

            sigma_end = float(t @ (y_end - y))
            det_end = _determinant(self.system, y_end)
            for _, kind, y_e, t_e in _detect_events(
                self.system, y, t, sigma_end, t_end, det_prev, det_end, opts
            ):
                self.append(leg, y_e, t_e)
                self.mark(leg, kind)
                logging.info(f"{kind.value} at mu={y_e[-1]:.9f}")
            det_prev = det_end

            self.append(leg, y_end, t_end)
            if closing:
                self.mark(leg, EventKind.CLOSURE)
                logging.info(f"Branch closed at mu={y_end[-1]:.6g}")
                break
            # stop checks skip the root-separation cap
            label = self.label(y_end, separated=False) if opts.stop_on_exceptional else None
            if _stop_label_hit(
                label, float(y_end[-1]), self.low, self.high, opts.delta_star, self.upper
            ):
                self.mark(leg, EventKind.LABEL_STOP, label)
                logging.info(f"Stopped at {label} near mu={y_end[-1]:.6g}")
                break
        else:
            logging.info(f"Reached max_steps={opts.max_steps} at mu={leg.ys[-1][-1]:.6g}")
        return leg

    def append(self, leg: _Leg, y: FloatArray, t: FloatArray) -> None:
        leg.ys.append(y)
        leg.ts.append(t)
        leg.labels.append(self.label(y))

    def mark(
        self, leg: _Leg, kind: EventKind, label: PatternLabel | None = None
    ) -> None:
        y, t = leg.ys[-1], leg.ts[-1]
        leg.events.append(
            BranchEvent(kind, float(y[-1]), len(leg.ys) - 1, float(t[-1]), label)
        )

    def closure_point(
        self, leg: _Leg, y: FloatArray, y_new: FloatArray
    ) -> FloatArray | None:
        """Return the start point re-corrected if the step crosses it, else None."""
        y_start, t_start = leg.ys[0], leg.ts[0]
        g0 = float(t_start @ (y - y_start))
        g1 = float(t_start @ (y_new - y_start))
        if not g0 < 0 <= g1:
            return None
        y_mid = y + g0 / (g0 - g1) * (y_new - y)
        try:
            y_closed = _correct(self.system, y_mid, t_start, self.opts.corrector).x
        except NumericalError:
            return None
        if np.linalg.norm(y_closed - y_start) < self.opts.closure_tol:
            return y_closed
        return None


def stability_index(model: RingModel, point: StatePoint) -> int:
    """Number of eigenvalues of the full Jacobian above 1e-10."""
    eigenvalues = np.linalg.eigvalsh(model.jacobian(point.u, point.mu))
    return int(np.count_nonzero(eigenvalues > STABILITY_TOL))


def _make_point(system: ContinuationSystem, y: FloatArray) -> StatePoint:
    x = np.array(y[:-1], dtype=float)
    model = _model_of(system)
    d = model.d if model is not None else 0.0
    return StatePoint(_full_state(system, x), float(y[-1]), d, x)


def _stability(system: ContinuationSystem, point: StatePoint) -> int:
    model = _model_of(system)
    if model is not None:
        return stability_index(model, point)
    eigenvalues = np.linalg.eigvals(system.jacobian(point.x, point.mu))
    return int(np.count_nonzero(eigenvalues.real > STABILITY_TOL))


def _assemble(system: ContinuationSystem, forward: _Leg, backward: _Leg | None) -> Branch:
    ys, ts, labels = forward.ys, forward.ts, forward.labels
    events = list(forward.events)
    if backward is not None:
        offset = len(backward.ys) - 1
        ys = backward.ys[:0:-1] + ys
        ts = [-t for t in backward.ts[:0:-1]] + ts
        labels = backward.labels[:0:-1] + labels
        events = [
            replace(e, point_index=offset - e.point_index, tangent_mu=-e.tangent_mu)
            for e in backward.events
        ] + [replace(e, point_index=e.point_index + offset) for e in events]
    points = [_make_point(system, y) for y in ys]
    return Branch(
        points=points,
        tangents=[np.asarray(t) for t in ts],
        events=sorted(events, key=lambda e: e.point_index),
        labels=list(labels),
        stability=[_stability(system, p) for p in points],
    )


def trace_from(
    system: ContinuationSystem,
    y0: FloatArray,
    t0: FloatArray,
    opts: ContinuationOptions | None = None,
    bidirectional: bool = True,
) -> Branch:
    """Trace from a converged point y0 = (x0, mu0) with unit tangent t0.

    The forward half follows t0. Unless it closes on itself, the backward
    half follows -t0 and is spliced in front, reversed.
    """
    opts = opts or ContinuationOptions()
    tracer = _Tracer(system, opts)
    y0 = np.asarray(y0, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    forward = tracer.run(y0, t0, opts.detect_closure)
    if not bidirectional or forward.closed:
        return _assemble(system, forward, None)
    backward = tracer.run(y0, -t0, False)
    return _assemble(system, forward, backward)


def trace_branch(
    system: ContinuationSystem,
    x0: FloatArray,
    mu0: float,
    opts: ContinuationOptions | None = None,
    direction: FloatArray | None = None,
    bidirectional: bool = True,
) -> Branch:
    """Correct the seed at fixed mu and trace the branch through it.

    Args:
        system: The (reduced) steady-state problem.
        x0: Seed in the system's coordinates.
        mu0: Parameter value of the seed.
        opts: Step control and stopping rules.
        direction: Optional tangent hint; the first step has positive inner
            product with it. Defaults to increasing mu.
        bidirectional: Also trace the other direction and splice both halves.

    Raises:
        SeedNotConvergedError: If the seed does not converge at fixed mu.
        StepCollapseError: If the step size drops below ds_min.
    """
    opts = opts or ContinuationOptions()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.dim,):
        raise DimensionMismatchError(
            f"Seed has shape {x0.shape}, system expects ({system.dim},)"
        )
    try:
        seed = newton_solve(
            lambda x: system.residual(x, mu0),
            lambda x: system.jacobian(x, mu0),
            x0,
            NewtonOptions(tol_residual=opts.corrector.tol_residual),
        )
    except NumericalError as e:
        raise SeedNotConvergedError(f"Seed at mu={mu0} did not converge: {e}") from e
    logging.debug(f"Seed converged in {seed.iterations} iterations")
    y0 = np.append(seed.x, mu0)
    t0 = tangent(system, y0, direction)
    return trace_from(system, y0, t0, opts, bidirectional)


def _orient(system: ContinuationSystem, t: FloatArray) -> FloatArray:
    """Sign t so that node 1 moves above node N, or its largest entry is positive."""
    full = _full_state(system, t[:-1])
    gap = full[0] - full[-1]
    if abs(gap) > 1e-12:
        return t if gap > 0 else -t
    return t if t[np.argmax(np.abs(t))] > 0 else -t


def branch_null_basis(system: ContinuationSystem, y: FloatArray) -> FloatArray:
    """Two orthonormal null vectors of [G_x | G_mu] at a branch point.

    Raises:
        NullVectorNotFoundError: If the extended Jacobian has full rank.
    """
    _, s, vt = svd(extended_jacobian(system, y))
    if s[-1] > NULL_RTOL * max(s[0], 1.0):
        raise NullVectorNotFoundError(
            f"No two-dimensional null space at mu={y[-1]:.9g} "
            f"(smallest singular value {s[-1]:.2e})"
        )
    return vt[-2:].T


def switch_branch(
    system: ContinuationSystem,
    branch: Branch,
    event: BranchEvent,
    direction: int = 1,
    opts: ContinuationOptions | None = None,
    eps_scale: float = 1e-4,
    retries: int = 3,
) -> tuple[FloatArray, FloatArray]:
    """Seed point and tangent on the branch crossing ``branch`` at ``event``.

    The seed is corrected on the hyperplane t2 . (y - y_bp) = eps, where t2
    is the null direction orthogonal to the current tangent and
    eps = eps_scale * |y_bp|. A seed that falls back onto the original
    branch is retried with eps divided by ten.

    Raises:
        ConfigError: If ``event`` is not a branch point or ``direction`` is not +-1.
        NullVectorNotFoundError: If no transverse null direction exists.
        FallbackToOriginalBranchError: If every attempt returns to ``branch``.
    """
    if event.kind is not EventKind.BRANCH_POINT:
        raise ConfigError(f"Cannot switch branches at a {event.kind.value} event")
    if direction not in (1, -1):
        raise ConfigError(f"direction must be +1 or -1, got {direction}")
    opts = opts or ContinuationOptions()
    y_bp = branch.state(event.point_index)
    t1 = branch.tangents[event.point_index]
    basis = branch_null_basis(system, y_bp)
    c = basis.T @ t1
    t2 = basis @ np.array([-c[1], c[0]])
    norm = float(np.linalg.norm(t2))
    if norm < 1e-12:
        raise NullVectorNotFoundError(f"Null space at mu={event.mu:.9g} is not transverse")
    t2 = direction * _orient(system, t2 / norm)

    eps = eps_scale * (float(np.linalg.norm(y_bp)) or 1.0)
    last_error: NumericalError | None = None
    for _ in range(retries + 1):
        try:
            y = _correct(system, y_bp + eps * t2, t2, opts.corrector).x
            t = tangent(system, y, t2)
            if abs(float(t @ t1)) > FALLBACK_ALIGNMENT:
                raise FallbackToOriginalBranchError(
                    f"Seed with eps={eps:.2e} returned to the original branch"
                )
            logging.info(f"Switched branches at mu={event.mu:.9f} with eps={eps:.2e}")
            return y, t
        except NumericalError as e:
            last_error = e
            logging.warning(f"Branch switch at mu={event.mu:.9f} failed: {e}")
            eps /= 10
    raise FallbackToOriginalBranchError(
        f"Could not leave the branch at mu={event.mu:.9f} after {retries + 1} attempts"
    ) from last_error
