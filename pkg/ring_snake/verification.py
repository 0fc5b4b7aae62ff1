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


"""Sweep d, detect events, and fit them against the asymptotic laws."""

import logging
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from .asymptotics import (
    AsymptoticLaw,
    Frame,
    LawEvent,
    Provenance,
    fit_power_law,
    law_catalogue,
)
from .continuation import ContinuationOptions, EventKind
from .diagram import DiagramMode, build_diagram, seed_mu
from .errors import ConfigError, InsufficientSamplesError, NoThreeRootsError, NumericalError
from .model import Nonlinearity, NonlinearityKind, RingModel, StatePoint

DEFAULT_D_SWEEP = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)

_LEFT_EVENTS = {
    LawEvent.FOLD_LEFT,
    LawEvent.BRANCH_POINT_LEFT,
    LawEvent.FOLD_LEFT_CORNER,
}
# (event, interface count or None, block size or None)
LawKey = tuple[LawEvent, int | None, int | None]


@dataclass(frozen=True)
class Observation:
    key: LawKey
    d: float
    mu: float
    shift: float = 0.0


class LawReport(BaseModel):
    """Fit of one law against the detected events of a sweep."""

    law: str = Field(..., description="Law name with its parameters")
    frame: str = Field(..., description="Frame of the reference law")
    provenance: str = Field(..., description="Published or Derived")
    params: dict[str, int] = Field(default_factory=dict, description="N, m, k, a, c")
    d_samples: list[float] = Field(default_factory=list, description="Swept d values")
    predicted: list[float] = Field(default_factory=list, description="Law values")
    detected: list[float] = Field(default_factory=list, description="Detected mu")
    mu_shift: list[float] = Field(
        default_factory=list, description="Diagonal coupling added to mu before fitting"
    )
    expected_A: float = Field(..., description="Reference coefficient")
    expected_p: float = Field(..., description="Reference exponent")
    published_A: list[float] = Field(
        default_factory=list, description="Stated coefficients, when they differ"
    )
    fitted_A: float | None = Field(None, description="Fitted coefficient")
    fitted_p: float | None = Field(None, description="Fitted exponent")
    max_rel_err: float | None = Field(None, description="Worst law-vs-detected error")
    passed: bool | None = Field(None, description="None when too few samples")
    note: str | None = Field(None, description="Why the law was not fitted")


class VerificationReport(BaseModel):
    N: int
    m: int
    nonlinearity: str
    d_sweep: list[float]
    exponent_tol: float
    laws: list[LawReport] = Field(default_factory=list)
    failed_d: list[float] = Field(default_factory=list)
    passed: bool = False


def law_frame(nl: Nonlinearity, left: bool) -> Frame | None:
    """Frame whose laws describe events of ``nl`` on one side, or None.

    normal-cubic is the normal form near mu = 0 only and normal-fold near
    (1, 1) only.
    """
    if nl.kind is NonlinearityKind.NORMAL_FORM_CUBIC:
        return Frame.NORMAL_FORM if left else None
    if nl.kind is NonlinearityKind.NORMAL_FORM_FOLD:
        return None if left else Frame.NORMAL_FORM
    return Frame.RAW


def _fold_mode(model: RingModel, point: StatePoint) -> tuple[np.ndarray, int]:
    eigenvalues, vectors = np.linalg.eigh(model.jacobian(point.u, point.mu))
    null = vectors[:, int(np.argmin(np.abs(eigenvalues)))]
    return null, int(np.argmax(np.abs(null)))


def fold_shift(model: RingModel, point: StatePoint) -> float:
    """Coupling weight that the Laplacian diagonal adds to mu at a fold.

    Nodes that move with the critical node (null-vector entry above half its
    peak) hold the same value, so their share of the diagonal cancels. The
    rest is the weight D in the effective parameter mu + D*d.
    """
    null, node = _fold_mode(model, point)
    weights = model.coupling_matrix[node].copy()
    weights[node] = 0.0
    still = np.abs(null) < 0.5 * np.abs(null[node])
    return float(weights[still].sum())


def classify_fold(model: RingModel, point: StatePoint, split: float) -> tuple[LawEvent, int]:
    """Match a fold to its law through the node that carries its null vector.

    Left of ``split`` the count is the coupling weight from neighbours above
    the u_minus/u_plus midpoint; right of it, from neighbours below u_minus/2.
    A zero count means every node is near the same root: a corner fold.
    """
    _, node = _fold_mode(model, point)
    weights = model.coupling_matrix[node].copy()
    weights[node] = 0.0
    _, u_minus, u_plus = model.nonlinearity.roots(min(max(point.mu, 0.0), 1.0))
    if point.mu < split:
        a = int(round(weights[point.u > 0.5 * (u_minus + u_plus)].sum()))
        return (LawEvent.FOLD_LEFT, a) if a > 0 else (LawEvent.FOLD_LEFT_CORNER, 0)
    c = int(round(weights[point.u < 0.5 * u_minus].sum()))
    return (LawEvent.FOLD_RIGHT, c) if c > 0 else (LawEvent.FOLD_RIGHT_CORNER, 0)


def observe(
    model: RingModel,
    mode: DiagramMode | None,
    k: int | None,
    opts: ContinuationOptions | None = None,
) -> list[Observation]:
    """Build one diagram and turn its folds and branch points into observations."""
    diagram = build_diagram(model, mode, k, opts)
    split = seed_mu(model.nonlinearity)
    out: list[Observation] = []
    for branch in diagram.branches:
        for event in branch.events:
            point = branch.points[event.point_index]
            if event.kind is EventKind.FOLD:
                try:
                    law, count = classify_fold(model, point, split)
                except NoThreeRootsError:
                    logging.debug(f"Skipping fold at mu={event.mu:.6g} outside the root range")
                    continue
                key: LawKey = (law, count or None, diagram.k)
                shift = 0.0
                if law is LawEvent.FOLD_LEFT:
                    shift = fold_shift(model, point) * model.d
            elif event.kind is EventKind.BRANCH_POINT and branch.is_homogeneous:
                law = LawEvent.BRANCH_POINT_LEFT if event.mu < split else LawEvent.BRANCH_POINT_RIGHT
                key = (law, None, diagram.k)
                shift = 0.0
            else:
                continue
            out.append(Observation(key, model.d, event.mu, shift))
    return out


def _extremal(observations: list[Observation]) -> dict[LawKey, dict[float, Observation]]:
    """Per law and d, keep the outermost mu: smallest on the left, largest on the right."""
    table: dict[LawKey, dict[float, Observation]] = defaultdict(dict)
    for obs in observations:
        left = obs.key[0] in _LEFT_EVENTS
        current = table[obs.key].get(obs.d)
        if current is None or (obs.mu < current.mu if left else obs.mu > current.mu):
            table[obs.key][obs.d] = obs
    return table


def _law_count(law: AsymptoticLaw) -> int | None:
    return law.a if law.a is not None else law.c


def _reference_laws(
    catalogue: list[AsymptoticLaw], key: LawKey, frame: Frame
) -> tuple[AsymptoticLaw | None, list[float]]:
    event, count, _ = key
    matches = [
        law
        for law in catalogue
        if law.event is event and law.frame is frame and _law_count(law) == count
    ]
    derived = [law for law in matches if law.provenance is Provenance.DERIVED]
    reference = (derived or matches or [None])[0]
    stated = sorted(
        {
            law.coefficient
            for law in catalogue
            if law.event is event
            and _law_count(law) == count
            and law.provenance is Provenance.PUBLISHED
            and law.frame is frame
        }
    )
    return reference, stated


def _report_entry(
    key: LawKey,
    samples: dict[float, Observation],
    catalogue: list[AsymptoticLaw],
    frame: Frame,
    exponent_tol: float,
) -> LawReport | None:
    reference, stated = _reference_laws(catalogue, key, frame)
    if reference is None:
        logging.warning(f"No law for detected {key[0].value} with count {key[1]}")
        return None
    d_values = sorted(samples)
    detected = [samples[d].mu for d in d_values]
    shifts = [samples[d].shift for d in d_values]
    effective = [mu + shift for mu, shift in zip(detected, shifts, strict=True)]
    predicted = [reference.predict(d) for d in d_values]
    pairs = (("N", reference.N), ("m", reference.m), ("k", key[2]), ("a", reference.a), ("c", reference.c))
    params = {name: value for name, value in pairs if value is not None}
    entry = LawReport(
        law=reference.name,
        frame=reference.frame.value,
        provenance=reference.provenance.value,
        params=params,
        d_samples=d_values,
        predicted=predicted,
        detected=detected,
        mu_shift=shifts,
        expected_A=reference.coefficient,
        expected_p=reference.exponent,
        published_A=[a for a in stated if abs(a - reference.coefficient) > 1e-12],
    )
    try:
        fit = fit_power_law(list(zip(d_values, effective, strict=True)), reference.complement)
    except InsufficientSamplesError as e:
        entry.note = str(e)
        return entry
    entry.fitted_A = fit.coefficient
    entry.fitted_p = fit.exponent
    if reference.complement:
        errors = [abs((1 - p) - (1 - q)) / abs(1 - q) for p, q in zip(predicted, effective, strict=True)]
    else:
        errors = [abs(p - q) / abs(q) for p, q in zip(predicted, effective, strict=True)]
    entry.max_rel_err = max(errors)
    entry.passed = abs(fit.exponent - reference.exponent) <= exponent_tol
    return entry


def run_verification(
    model: RingModel,
    d_sweep: Sequence[float],
    alltoall: bool = False,
    k_values: Sequence[int] | None = None,
    opts: ContinuationOptions | None = None,
    exponent_tol: float = 0.02,
    threads: int = 1,
) -> VerificationReport:
    """Detect events at every d of the sweep and fit each law.

    Runs one diagram per (d, k) on a thread pool. A d whose continuation
    fails is logged and left out of the fits.

    Raises:
        InsufficientSamplesError: If fewer than 3 d values are given.
        ConfigError: If ``alltoall`` is set on a ring that is not all-to-all.
    """
    d_sweep = sorted(float(d) for d in d_sweep)
    if len(d_sweep) < 3:
        raise InsufficientSamplesError(f"A d-sweep needs at least 3 values, got {len(d_sweep)}")
    if alltoall and not model.is_all_to_all:
        raise ConfigError(f"--alltoall needs m = {model.N // 2}, got m = {model.m}")
    if alltoall:
        mode: DiagramMode | None = DiagramMode.ALL_TO_ALL
        ks: list[int | None] = list(k_values or range(1, model.N // 2 + 1))
    else:
        mode, ks = None, [None]
    jobs = [(d, k) for d in d_sweep for k in ks]

    def work(job: tuple[float, int | None]) -> tuple[float, list[Observation] | None]:
        d, k = job
        try:
            return d, observe(model.with_d(d), mode, k, opts)
        except NumericalError as e:
            logging.warning(f"Sweep point d={d:g} (k={k}) failed: {e}")
            return d, None

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(work, jobs))

    observations = [obs for _, found in results if found for obs in found]
    failed = sorted({d for d, found in results if found is None})
    report = VerificationReport(
        N=model.N,
        m=model.m,
        nonlinearity=model.nonlinearity.kind.value,
        d_sweep=d_sweep,
        exponent_tol=exponent_tol,
        failed_d=failed,
    )
    catalogues: dict[int | None, list[AsymptoticLaw]] = {}
    for key, samples in sorted(_extremal(observations).items(), key=lambda kv: str(kv[0])):
        frame = law_frame(model.nonlinearity, key[0] in _LEFT_EVENTS)
        if frame is None:
            logging.info(f"No {model.nonlinearity.kind.value} law for {key[0].value}; skipped")
            continue
        k = key[2]
        if k not in catalogues:
            catalogues[k] = law_catalogue(model.N, model.m, k)
        entry = _report_entry(key, samples, catalogues[k], frame, exponent_tol)
        if entry is not None:
            report.laws.append(entry)
    fitted = [law for law in report.laws if law.passed is not None]
    report.passed = bool(fitted) and all(law.passed for law in fitted)
    return report
