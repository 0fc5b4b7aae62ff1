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


"""Anti-continuum patterns, their labels, and classification of ring states."""

import enum
import logging
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidLabelError, NoThreeRootsError
from .model import FloatArray, RingModel


class PatternFamily(str, enum.Enum):
    UBAR = "U"
    VBAR = "V"
    W23 = "W23"
    W24_PLUS = "W24+"
    W24_MINUS = "W24-"
    W3_MINUS = "W3-"
    A_PLUS = "A+"
    A_MINUS = "A-"
    B = "B"
    C_PLUS = "C+"
    C_MINUS = "C-"
    D = "D"
    HOMOGENEOUS_MINUS = "hom-"
    HOMOGENEOUS_PLUS = "hom+"
    ZERO = "zero"


SEPARATION_FRACTION = 0.5
_FAMILY_ORDER = {family: i for i, family in enumerate(PatternFamily)}
_INDEXED = {PatternFamily.UBAR, PatternFamily.VBAR}
_TWO_BLOCK = {
    PatternFamily.A_PLUS,
    PatternFamily.A_MINUS,
    PatternFamily.B,
    PatternFamily.C_PLUS,
    PatternFamily.C_MINUS,
    PatternFamily.D,
}
_SPECIAL_RINGS = {
    PatternFamily.W23: (6, 2),
    PatternFamily.W24_PLUS: (8, 3),
    PatternFamily.W24_MINUS: (8, 3),
    PatternFamily.W3_MINUS: (8, 3),
}
# Values on the kappa index set: 0 -> zero, 1 -> u_minus, 2 -> u_plus.
_SPECIAL_LAYOUTS = {
    PatternFamily.W23: (2, 1, 1, 0),
    PatternFamily.W24_PLUS: (2, 2, 0, 2, 0),
    PatternFamily.W24_MINUS: (2, 1, 0, 1, 0),
    PatternFamily.W3_MINUS: (2, 2, 1, 2, 0),
}

_LABEL_RE = re.compile(r"^(U|V|A\+|A-|B|C\+|C-|D):(\d+)$")


@dataclass(frozen=True, order=False)
class PatternLabel:
    family: PatternFamily
    k: int | None = None

    def __str__(self) -> str:
        if self.k is None:
            return self.family.value
        return f"{self.family.value}:{self.k}"

    def sort_key(self) -> tuple[int, int]:
        return _FAMILY_ORDER[self.family], self.k or 0


class GammaKind(str, enum.Enum):
    SPARSE = "Sparse"
    G62 = "G62"
    G83 = "G83"
    ALL_TO_ALL = "AllToAll_k"
    NONE = "None"


def parse_label(text: str) -> PatternLabel:
    """Parse a pattern label such as ``U:2``, ``W24+``, ``C-:1`` or ``hom-``.

    Raises:
        InvalidLabelError: If the string does not follow the label grammar.
    """
    text = text.strip()
    match = _LABEL_RE.match(text)
    if match:
        return PatternLabel(PatternFamily(match.group(1)), int(match.group(2)))
    try:
        family = PatternFamily(text)
    except ValueError as e:
        raise InvalidLabelError(
            f"Invalid pattern label '{text}'. Expected one of U:k, V:k, W23, W24+, "
            "W24-, W3-, A+:k, A-:k, B:k, C+:k, C-:k, D:k, hom-, hom+, zero"
        ) from e
    if family in _INDEXED or family in _TWO_BLOCK:
        raise InvalidLabelError(f"Pattern label '{text}' needs an index, e.g. '{text}:1'")
    return PatternLabel(family)


def validate_label(label: PatternLabel, model: RingModel) -> None:
    """Raise InvalidLabelError when ``label`` does not exist for (N, m)."""
    N, m = model.N, model.m
    family = label.family
    if family in _INDEXED:
        if label.k is None or not 1 <= label.k <= model.half:
            raise InvalidLabelError(
                f"{label} is out of range: k must lie in 1..{model.half} for N={N}"
            )
    elif family in _TWO_BLOCK:
        if label.k is None or not 1 <= label.k <= N // 2:
            raise InvalidLabelError(
                f"{label} is out of range: k must lie in 1..{N // 2} for N={N}"
            )
    elif family in _SPECIAL_RINGS:
        if (N, m) != _SPECIAL_RINGS[family]:
            ring = _SPECIAL_RINGS[family]
            raise InvalidLabelError(
                f"{label} is only defined for (N, m) = {ring}, got ({N}, {m})"
            )


def kappa_extend(values: FloatArray, N: int) -> FloatArray:
    """Extend values on the index set 1..floor(N/2)+1 to a kappa-invariant ring."""
    values = np.asarray(values, dtype=float)
    idx = np.arange(N)
    return values[np.minimum(idx, N - idx)]


def make_pattern(label: PatternLabel, model: RingModel, mu: float) -> FloatArray:
    """Return the full anti-continuum vector of ``label`` at ``mu`` (d = 0)."""
    validate_label(label, model)
    N = model.N
    zero, u_minus, u_plus = model.nonlinearity.roots(mu)
    level = np.array([zero, u_minus, u_plus])
    family, k = label.family, label.k or 0

    if family is PatternFamily.ZERO:
        return np.zeros(N)
    if family is PatternFamily.HOMOGENEOUS_MINUS:
        return np.full(N, u_minus)
    if family is PatternFamily.HOMOGENEOUS_PLUS:
        return np.full(N, u_plus)
    if family in _SPECIAL_LAYOUTS:
        return kappa_extend(level[list(_SPECIAL_LAYOUTS[family])], N)
    if family in _INDEXED:
        reduced = np.zeros(model.half)
        reduced[: k - 1] = u_plus
        reduced[k - 1] = u_plus if family is PatternFamily.UBAR else u_minus
        return kappa_extend(reduced, N)

    first, last = {
        PatternFamily.A_PLUS: (u_plus, zero),
        PatternFamily.A_MINUS: (u_minus, zero),
        PatternFamily.B: (u_plus, u_minus),
        PatternFamily.C_PLUS: (zero, u_plus),
        PatternFamily.C_MINUS: (zero, u_minus),
        PatternFamily.D: (u_minus, u_plus),
    }[family]
    out = np.full(N, last)
    out[:k] = first
    return out


def candidate_labels(model: RingModel) -> list[PatternLabel]:
    """All labels ``classify`` compares against for this model."""
    labels: list[PatternLabel] = []
    if model.is_all_to_all:
        for family in PatternFamily:
            if family in _TWO_BLOCK:
                labels += [PatternLabel(family, k) for k in range(1, model.N // 2 + 1)]
    else:
        for family in (PatternFamily.UBAR, PatternFamily.VBAR):
            labels += [PatternLabel(family, k) for k in range(1, model.half + 1)]
        labels += [
            PatternLabel(family)
            for family, ring in _SPECIAL_RINGS.items()
            if ring == (model.N, model.m)
        ]
    labels += [
        PatternLabel(PatternFamily.HOMOGENEOUS_MINUS),
        PatternLabel(PatternFamily.HOMOGENEOUS_PLUS),
        PatternLabel(PatternFamily.ZERO),
    ]
    return labels


def default_tolerance(d: float) -> float:
    return 3.0 * max(d ** (1.0 / 3.0), 1e-6)


def separation_tolerance(model: RingModel, mu: float) -> float:
    """Half the smallest gap between the roots 0 < u_minus < u_plus at mu.

    Raises:
        NoThreeRootsError: If mu lies outside the bistable range.
    """
    _, u_minus, u_plus = model.nonlinearity.roots(mu)
    return SEPARATION_FRACTION * min(u_minus, u_plus - u_minus)


def classify(
    u: FloatArray,
    model: RingModel,
    mu: float,
    tol: float | None = None,
    separated: bool = True,
) -> PatternLabel | None:
    """Return the nearest pattern label within ``tol`` in max-norm, or None.

    With ``separated`` the tolerance is capped by ``separation_tolerance``,
    so at most one pattern can match. Ties go to the smaller distance, then
    to the family order of ``PatternFamily``.
    """
    tol = default_tolerance(model.d) if tol is None else tol
    mu = min(max(mu, 0.0), 1.0)
    if separated:
        try:
            tol = min(tol, separation_tolerance(model, mu))
        except NoThreeRootsError:
            return None
    u = np.asarray(u, dtype=float)
    best: tuple[float, tuple[int, int], PatternLabel] | None = None
    for label in candidate_labels(model):
        try:
            pattern = make_pattern(label, model, mu)
        except NoThreeRootsError:
            return None
        dist = float(np.max(np.abs(u - pattern)))
        key = (dist, label.sort_key(), label)
        if best is None or key[:2] < best[:2]:
            best = key
    if best is None or best[0] > tol:
        return None
    return best[2]


def gamma_sequence(kind: GammaKind, N: int, k: int = 1) -> list[PatternLabel]:
    """Ordered labels visited by the connected set of the given kind."""
    U, V = PatternFamily.UBAR, PatternFamily.VBAR
    top = N // 2 + 1
    if kind is GammaKind.SPARSE:
        seq = [PatternLabel(V, 1)]
        for j in range(1, top):
            seq += [PatternLabel(U, j), PatternLabel(V, j + 1)]
        return seq
    if kind is GammaKind.G62:
        return [
            PatternLabel(V, 1),
            PatternLabel(U, 1),
            PatternLabel(PatternFamily.W23),
            PatternLabel(U, 3),
            PatternLabel(V, 4),
        ]
    if kind is GammaKind.G83:
        # W23 exists only on (6, 2); the (8, 3) sequence passes W24+ here.
        return [
            PatternLabel(V, 1),
            PatternLabel(U, 1),
            PatternLabel(PatternFamily.W24_MINUS),
            PatternLabel(PatternFamily.W24_PLUS),
            PatternLabel(PatternFamily.W3_MINUS),
            PatternLabel(U, 4),
            PatternLabel(V, 5),
        ]
    if kind is GammaKind.ALL_TO_ALL:
        return [
            PatternLabel(family, k)
            for family in (
                PatternFamily.A_MINUS,
                PatternFamily.A_PLUS,
                PatternFamily.B,
                PatternFamily.D,
                PatternFamily.C_PLUS,
                PatternFamily.C_MINUS,
            )
        ]
    return []


def exceptional_set(model: RingModel) -> list[tuple[PatternLabel, float]]:
    """The two endpoint configurations where continuation stops."""
    return [
        (PatternLabel(PatternFamily.VBAR, 1), 0.0),
        (PatternLabel(PatternFamily.VBAR, model.half), 1.0),
    ]


def interface_counts(label: PatternLabel, model: RingModel) -> tuple[int, int]:
    """Count coupled neighbours of the interface node of ``label``.

    The interface node is the first node sitting at u_minus: it is the node
    that changes at the folds next to this pattern.

    Returns:
        (a, c): the coupling weight from neighbours at u_plus (active) and at
        zero (inactive).

    Raises:
        InvalidLabelError: If the pattern has no node at u_minus.
    """
    mu = 0.5
    pattern = make_pattern(label, model, mu)
    _, u_minus, u_plus = model.nonlinearity.roots(mu)
    interface = np.flatnonzero(np.isclose(pattern, u_minus))
    if interface.size == 0:
        raise InvalidLabelError(f"{label} has no interface node at u_minus")
    node = int(interface[0])
    weights = model.coupling_matrix[node].copy()
    weights[node] = 0.0
    active = int(round(weights[np.isclose(pattern, u_plus)].sum()))
    inactive = int(round(weights[np.isclose(pattern, 0.0)].sum()))
    logging.debug(f"Interface counts of {label}: node {node + 1}, a={active}, c={inactive}")
    return active, inactive
