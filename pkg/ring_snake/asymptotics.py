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


"""Closed-form small-d laws for fold and branch-point locations.

Two frames are supported. The normal-form frame uses f = -mu*u + u^3 near
mu = 0 and f = (1 - mu) - u^2 near (1, 1). The raw frame uses the
cubic-quintic f = -mu*u + 2u^3 - u^5. Each law has the form
mu = A * d**p, or mu = 1 - A * d**p near mu = 1.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, curve_fit, minimize_scalar

from .errors import (
    DomainError,
    InsufficientSamplesError,
    NoSignChangeError,
    NoThreeRootsError,
)
from .model import Nonlinearity


class LawEvent(str, enum.Enum):
    FOLD_LEFT = "FoldLeft"
    FOLD_RIGHT = "FoldRight"
    BRANCH_POINT_LEFT = "BranchPointLeft"
    BRANCH_POINT_RIGHT = "BranchPointRight"
    FOLD_LEFT_CORNER = "FoldAllToAllLeftCorner"
    FOLD_RIGHT_CORNER = "FoldAllToAllRightCorner"


class Frame(str, enum.Enum):
    NORMAL_FORM = "NormalForm"
    RAW = "RawCubicQuintic"


class Provenance(str, enum.Enum):
    PUBLISHED = "Published"
    DERIVED = "Derived"


@dataclass(frozen=True)
class AsymptoticLaw:
    """One leading-order law mu(d) with its parameters and provenance."""

    event: LawEvent
    frame: Frame
    provenance: Provenance
    coefficient: float
    exponent: float
    complement: bool
    N: int
    m: int
    k: int | None = None
    a: int | None = None
    c: int | None = None

    @property
    def name(self) -> str:
        pairs = (("k", self.k), ("a", self.a), ("c", self.c))
        params = [f"{key}={value}" for key, value in pairs if value is not None]
        suffix = f"[{','.join(params)}]" if params else ""
        return f"{self.event.value}{suffix}"

    def predict(self, d: float) -> float:
        value = self.coefficient * d**self.exponent
        return 1.0 - value if self.complement else value


def _check_positive(d: float) -> None:
    if not d > 0:
        raise DomainError(f"Coupling d must be positive, got {d}")


def fold_left_coefficient(frame: Frame, a: int) -> float:
    if a < 1:
        raise DomainError(f"Active neighbour count must be at least 1, got {a}")
    if frame is Frame.NORMAL_FORM:
        return 3.0 * (a * a / 4.0) ** (1.0 / 3.0)
    return 3.0 * a ** (2.0 / 3.0)


def fold_left(frame: Frame, a: int, d: float) -> float:
    """Left fold mu_l(d) of an interface node with ``a`` active neighbours.

    The fold of a*u_plus*d - mu*u + c3*u^3 = 0 in u; with u_plus = 1, c3 = 1
    (normal form) this is 3*(a^2/4)^(1/3) d^(2/3), and with
    u_plus = sqrt(2), c3 = 2 (cubic-quintic) it is 3*a^(2/3) d^(2/3).
    """
    _check_positive(d)
    return fold_left_coefficient(frame, a) * d ** (2.0 / 3.0)


def fold_right(frame: Frame, c: int, d: float) -> float:
    """Right fold mu_r(d) = 1 - c*d, the same in both frames."""
    if c < 1:
        raise DomainError(f"Inactive neighbour count must be at least 1, got {c}")
    _check_positive(d)
    return 1.0 - c * d


def branch_point_left(frame: Frame, N: int, d: float) -> float:
    _check_positive(d)
    return N * d / 2.0


def branch_point_right(frame: Frame, N: int, d: float) -> float:
    _check_positive(d)
    half_width = N * d / 2.0 if frame is Frame.NORMAL_FORM else N * d / 4.0
    return 1.0 - half_width**2


def _check_angle(phi: float) -> None:
    if not 0.0 < phi < math.pi / 2:
        raise DomainError(f"Angle phi must lie in (0, pi/2), got {phi}")


def alltoall_leftcorner_parametrization(
    N: int, k: int, phi: float, s: float, frame: Frame = Frame.NORMAL_FORM
) -> tuple[float, float, float, float]:
    """Leading-order (v1, v2, d, mu) of the all-to-all branch near the origin.

    In the raw frame (v1, v2) = s*(cos phi, sin phi) are cubic-quintic
    amplitudes, which doubles the s^2 coefficients of d and mu; the ratio
    mu/d is frame independent.
    """
    _check_angle(phi)
    cos, sin = math.cos(phi), math.sin(phi)
    weight = k * cos + (N - k) * sin
    scale = s * s if frame is Frame.NORMAL_FORM else 2.0 * s * s
    d = (cos + sin) * cos * sin / weight * scale
    mu = (k * cos**3 + (N - k) * sin**3) / weight * scale
    return s * cos, s * sin, d, mu


def leftcorner_mu_ratio(N: int, k: int, phi: float) -> float:
    """mu/d along the left-corner branch as a function of the angle phi."""
    _check_angle(phi)
    cos, sin = math.cos(phi), math.sin(phi)
    return (k * cos**3 + (N - k) * sin**3) / ((cos + sin) * cos * sin)


def leftcorner_mu_ratio_derivative(N: int, k: int, phi: float) -> float:
    _check_angle(phi)
    cos, sin = math.cos(phi), math.sin(phi)
    num = k * cos**3 + (N - k) * sin**3
    den = (cos + sin) * cos * sin
    d_num = 3.0 * cos * sin * ((N - k) * sin - k * cos)
    d_den = (cos - sin) * (cos * sin + (cos + sin) ** 2)
    return (d_num * den - num * d_den) / den**2


def leftcorner_fold(N: int, k: int) -> tuple[float, float]:
    """Minimize mu/d over phi in (0, pi/4].

    Returns:
        (phi, ratio): the fold angle and mu_fd / d.
    """
    if not 1 <= k <= N // 2:
        raise DomainError(f"Block size k must lie in 1..{N // 2}, got {k}")
    result = minimize_scalar(
        lambda phi: leftcorner_mu_ratio(N, k, phi),
        bounds=(1e-4, math.pi / 4),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.x), float(result.fun)


def fold_alltoall_leftcorner(frame: Frame, N: int, k: int, d: float) -> float:
    _check_positive(d)
    return leftcorner_fold(N, k)[1] * d


def fold_alltoall_rightcorner_coefficient(frame: Frame, N: int, k: int) -> float:
    if not 1 <= k <= N // 2:
        raise DomainError(f"Block size k must lie in 1..{N // 2}, got {k}")
    product = k * (N - k)
    return float(product) if frame is Frame.NORMAL_FORM else product / 4.0


def fold_alltoall_rightcorner(frame: Frame, N: int, k: int, d: float) -> float:
    """Right-corner fold 1 - k(N-k)d^2 (normal form) or 1 - k(N-k)d^2/4 (raw)."""
    _check_positive(d)
    return 1.0 - fold_alltoall_rightcorner_coefficient(frame, N, k) * d * d


def alltoall_rightcorner_parametrization(
    N: int, k: int, s: float, d: float, frame: Frame = Frame.NORMAL_FORM
) -> tuple[float, float, float]:
    """Leading-order (v1, v2, mu) of the all-to-all branch near (1, 1).

    In normal-form units v1 = 1 + s and v2 = 1 - N*d - s. The branch meets
    the homogeneous branch at s = -N*d/2 and folds at s = -(N - k)*d. The
    raw frame is the same curve with amplitudes halved and d replaced by d/2.
    """
    if frame is Frame.RAW:
        d, amplitude = d / 2.0, 0.5
    else:
        amplitude = 1.0
    offset = s * s + 2.0 * (N - k) * d * s + N * (N - k) * d * d
    return 1.0 + amplitude * s, 1.0 + amplitude * (-N * d - s), 1.0 - offset


def branch_point_oracle(nl: Nonlinearity, N: int, d: float, side: str) -> float:
    """Exact branch point on the homogeneous u_minus branch.

    Solves f_u(u_minus(mu), mu) = N*d, where the antisymmetric eigenvalue
    f_u - N*d of the all-to-all Jacobian vanishes.

    Args:
        side: ``"left"`` for the root near mu = 0, ``"right"`` near mu = 1.

    Raises:
        NoSignChangeError: If d is too large for a branch point to exist.
    """
    _check_positive(d)
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")

    def gap(mu: float) -> float:
        u_minus = nl.roots(mu)[1]
        return float(nl.f_u(u_minus, mu)) - N * d

    grid = []
    for mu in np.linspace(0.0, 1.0, 401):
        try:
            grid.append((float(mu), gap(float(mu))))
        except NoThreeRootsError:
            continue
    crossings = [
        (lo, hi)
        for (lo, g_lo), (hi, g_hi) in zip(grid, grid[1:], strict=False)
        if g_lo * g_hi < 0
    ]
    if not crossings:
        raise NoSignChangeError(f"No homogeneous branch point for N*d={N * d:g}")
    lo, hi = crossings[0] if side == "left" else crossings[-1]
    mu = float(brentq(gap, lo, hi, xtol=1e-15))
    logging.debug(f"Branch point oracle ({side}) for N={N}, d={d:g}: mu={mu:.12f}")
    return mu


@dataclass(frozen=True)
class PowerLawFit:
    coefficient: float
    exponent: float
    max_rel_residual: float


def fit_power_law(
    samples: list[tuple[float, float]], complement: bool = False
) -> PowerLawFit:
    """Least-squares fit of mu = A*d**p (or 1 - mu = A*d**p) in log-log space.

    Raises:
        InsufficientSamplesError: With fewer than 3 samples, or d values
            spanning less than one decade.
        DomainError: If a fitted quantity is not positive.
    """
    if len(samples) < 3:
        raise InsufficientSamplesError(f"Need at least 3 samples, got {len(samples)}")
    d = np.array([s[0] for s in samples], dtype=float)
    mu = np.array([s[1] for s in samples], dtype=float)
    y = 1.0 - mu if complement else mu
    if np.any(d <= 0) or np.any(y <= 0):
        raise DomainError("Power-law fit needs positive d and positive fitted values")
    if d.max() / d.min() < 10.0:
        raise InsufficientSamplesError(
            f"d samples span {d.min():g}..{d.max():g}, less than one decade"
        )
    (log_a, p), _ = curve_fit(
        lambda log_d, log_a, p: log_a + p * log_d, np.log(d), np.log(y), p0=(0.0, 1.0)
    )
    coefficient = float(np.exp(log_a))
    residual = float(np.max(np.abs(coefficient * d**p - y) / np.abs(y)))
    return PowerLawFit(coefficient, float(p), residual)


def law_catalogue(N: int, m: int, k: int | None = None) -> list[AsymptoticLaw]:
    """Every law that applies to the ring (N, m), in both frames.

    Sparse rings get fold laws for every interface count 1..2m. All-to-all
    rings (pass ``k``) get the block laws and the homogeneous branch points.
    Stated coefficients that differ from the derived ones, such as 3/2^(1/3)
    for the first pitchfork, are listed as separate published entries.
    """
    laws: list[AsymptoticLaw] = []
    two_thirds = 2.0 / 3.0

    def add(
        event: LawEvent,
        frame: Frame,
        provenance: Provenance,
        coefficient: float,
        exponent: float,
        complement: bool,
        **params: int,
    ) -> None:
        laws.append(
            AsymptoticLaw(
                event, frame, provenance, coefficient, exponent, complement, N, m, **params
            )
        )

    if k is None:
        for frame in Frame:
            for count in range(1, 2 * m + 1):
                coefficient = fold_left_coefficient(frame, count)
                add(LawEvent.FOLD_LEFT, frame, Provenance.DERIVED, coefficient, two_thirds, False, a=count)
                add(LawEvent.FOLD_RIGHT, frame, Provenance.DERIVED, float(count), 1.0, True, c=count)
        nf, stated = Frame.NORMAL_FORM, Provenance.PUBLISHED
        cube_root_two = 2.0 ** (1.0 / 3.0)
        if m == 1:
            add(LawEvent.FOLD_LEFT, nf, stated, 3.0 / cube_root_two, two_thirds, False, a=1)
            add(LawEvent.FOLD_RIGHT, nf, stated, 1.0, 1.0, True, c=1)
        elif m == 2:
            add(LawEvent.FOLD_LEFT, nf, stated, 3.0, two_thirds, False, a=2)
            add(LawEvent.FOLD_LEFT, nf, stated, 3.0 / cube_root_two, two_thirds, False, a=1)
            add(LawEvent.FOLD_RIGHT, nf, stated, 2.0, 1.0, True, c=2)
        return laws

    if not 1 <= k <= N // 2:
        raise DomainError(f"Block size k must lie in 1..{N // 2}, got {k}")
    corner_ratio = leftcorner_fold(N, k)[1]
    for frame in Frame:
        if frame is Frame.NORMAL_FORM:
            provenance, right_bp = Provenance.PUBLISHED, (N / 2.0) ** 2
        else:
            provenance, right_bp = Provenance.DERIVED, (N / 4.0) ** 2
        for count in sorted({k, N - k}):
            coefficient = fold_left_coefficient(frame, count)
            add(LawEvent.FOLD_LEFT, frame, provenance, coefficient, two_thirds, False, k=k, a=count)
            add(LawEvent.FOLD_RIGHT, frame, provenance, float(count), 1.0, True, k=k, c=count)
        add(LawEvent.BRANCH_POINT_LEFT, frame, provenance, N / 2.0, 1.0, False, k=k)
        add(LawEvent.BRANCH_POINT_RIGHT, frame, provenance, right_bp, 2.0, True, k=k)
        add(LawEvent.FOLD_LEFT_CORNER, frame, Provenance.DERIVED, corner_ratio, 1.0, False, k=k)
        corner = fold_alltoall_rightcorner_coefficient(frame, N, k)
        add(LawEvent.FOLD_RIGHT_CORNER, frame, provenance, corner, 2.0, True, k=k)
    return laws
