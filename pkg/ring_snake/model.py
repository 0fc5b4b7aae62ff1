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


"""Bistable nonlinearities, ring coupling and the steady-state map."""

import enum
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import circulant

from .errors import ConfigError, NoThreeRootsError

FloatArray = NDArray[np.float64]

# Coefficients of u^3, u^5, ... for the built-in kinds; the linear term is
# always -mu*u.
_BUILTIN_COEFFICIENTS: dict[str, tuple[float, ...]] = {
    "cubic-quintic": (2.0, -1.0),
    "normal-cubic": (1.0, -1.0),
    "normal-fold": (2.75, -2.5, 0.75),
}


class NonlinearityKind(str, enum.Enum):
    CUBIC_QUINTIC = "cubic-quintic"
    NORMAL_FORM_CUBIC = "normal-cubic"
    NORMAL_FORM_FOLD = "normal-fold"
    CUSTOM_ODD_POLYNOMIAL = "poly"


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the numerical bistability checks on a nonlinearity."""

    odd: bool
    three_roots: bool
    saddle_node: bool
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.odd and self.three_roots and self.saddle_node


@dataclass(frozen=True)
class Nonlinearity:
    """Odd polynomial law f(u, mu) = -mu*u + sum_j c_j u^(2j+1).

    ``coefficients`` holds c_1, c_2, ... (the u^3, u^5, ... coefficients).
    """

    kind: NonlinearityKind = NonlinearityKind.CUBIC_QUINTIC
    coefficients: tuple[float, ...] = (2.0, -1.0)

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ConfigError("Nonlinearity needs at least one odd coefficient")
        if not all(np.isfinite(c) for c in self.coefficients):
            raise ConfigError(f"Non-finite coefficients: {self.coefficients}")

    @classmethod
    def from_kind(
        cls, kind: NonlinearityKind | str, coefficients: list[float] | None = None
    ) -> "Nonlinearity":
        """Build a nonlinearity from its kind, filling in built-in coefficients."""
        kind = NonlinearityKind(kind)
        if kind is NonlinearityKind.CUSTOM_ODD_POLYNOMIAL:
            if not coefficients:
                raise ConfigError("Kind 'poly' requires explicit coefficients")
            return cls(kind, tuple(float(c) for c in coefficients))
        return cls(kind, _BUILTIN_COEFFICIENTS[kind.value])

    @classmethod
    def parse(cls, text: str) -> "Nonlinearity":
        """Parse the CLI form ``cubic-quintic``, ``normal-cubic`` or ``poly:c3,c5,...``."""
        text = text.strip()
        if text.startswith("poly:"):
            try:
                coeffs = [float(c) for c in text[5:].split(",") if c.strip()]
            except ValueError as e:
                raise ConfigError(f"Invalid polynomial coefficients in '{text}'") from e
            return cls.from_kind(NonlinearityKind.CUSTOM_ODD_POLYNOMIAL, coeffs)
        try:
            return cls.from_kind(text)
        except ValueError as e:
            valid = ", ".join(k.value for k in NonlinearityKind)
            raise ConfigError(
                f"Unknown nonlinearity '{text}'. Valid kinds: {valid}"
            ) from e

    def _powers(self, u: FloatArray | float) -> list[FloatArray | float]:
        return [u ** (2 * j + 3) for j in range(len(self.coefficients))]

    def f(self, u: FloatArray | float, mu: float) -> FloatArray | float:
        if self.kind is NonlinearityKind.CUBIC_QUINTIC:
            return -mu * u + 2.0 * u**3 - u**5
        total = -mu * u
        for c, p in zip(self.coefficients, self._powers(u), strict=True):
            total = total + c * p
        return total

    def f_u(self, u: FloatArray | float, mu: float) -> FloatArray | float:
        if self.kind is NonlinearityKind.CUBIC_QUINTIC:
            return -mu + 6.0 * u**2 - 5.0 * u**4
        total = -mu + 0.0 * u
        for j, c in enumerate(self.coefficients):
            total = total + (2 * j + 3) * c * u ** (2 * j + 2)
        return total

    def f_mu(self, u: FloatArray | float, mu: float) -> FloatArray | float:
        return -u + 0.0 * mu

    def _reduced_roots(self, mu: float) -> list[float]:
        # f/u = -mu + c_1 w + c_2 w^2 + ..., w = u^2
        poly = np.array([*reversed(self.coefficients), -mu], dtype=float)
        candidates = np.roots(poly)
        roots = []
        for w in candidates:
            if abs(w.imag) > 1e-7 or w.real < -1e-12:
                continue
            roots.append(self._polish(max(w.real, 0.0), mu))
        return sorted(roots)

    def _polish(self, w: float, mu: float) -> float:
        coeffs = self.coefficients
        for _ in range(8):
            g = -mu + sum(c * w ** (j + 1) for j, c in enumerate(coeffs))
            dg = sum((j + 1) * c * w**j for j, c in enumerate(coeffs))
            if abs(dg) < 1e-10:
                break
            step = g / dg
            w -= step
            if abs(step) < 1e-16:
                break
        return max(w, 0.0)

    def roots(self, mu: float) -> tuple[float, float, float]:
        """Return the nonnegative zeros (0, u_minus, u_plus) at ``mu``.

        Raises:
            NoThreeRootsError: If mu is outside [0, 1] or the law has no
                bistable root pair there.
        """
        if not 0.0 <= mu <= 1.0:
            raise NoThreeRootsError(f"mu={mu} is outside [0, 1]")
        if self.kind is NonlinearityKind.CUBIC_QUINTIC:
            disc = np.sqrt(max(1.0 - mu, 0.0))
            return 0.0, float(np.sqrt(1.0 - disc)), float(np.sqrt(1.0 + disc))
        ws = self._reduced_roots(mu)
        if len(ws) < 2:
            raise NoThreeRootsError(
                f"{self.kind.value} has {len(ws)} positive root(s) at mu={mu}"
            )
        return 0.0, float(np.sqrt(ws[0])), float(np.sqrt(ws[1]))

    @cached_property
    def saddle_node_mu(self) -> float:
        """Upper end of the bistable range, where u_minus and u_plus merge."""
        if self.kind is NonlinearityKind.CUBIC_QUINTIC:
            return 1.0
        last = 0.0
        for mu in np.linspace(0.0, 1.0, 1001):
            try:
                self.roots(float(mu))
            except NoThreeRootsError:
                continue
            last = float(mu)
        return last

    def check_hypothesis(self, mu_samples: list[float] | None = None) -> HypothesisReport:
        """Check oddness, the bistable root structure and the saddle node at (1, 1)."""
        samples = mu_samples or [0.1, 0.3, 0.5, 0.7, 0.9]
        messages: list[str] = []
        u = np.linspace(-1.5, 1.5, 31)
        odd = all(
            np.allclose(self.f(-u, mu), -self.f(u, mu), atol=1e-12) for mu in samples
        )
        if not odd:
            messages.append("f is not odd in u")

        three_roots = True
        for mu in samples:
            try:
                _, um, up = self.roots(mu)
            except NoThreeRootsError as e:
                three_roots = False
                messages.append(str(e))
                continue
            signs = (self.f_u(0.0, mu) < 0, self.f_u(um, mu) > 0, self.f_u(up, mu) < 0)
            if not (0.0 < um < up and all(signs)):
                three_roots = False
                messages.append(f"f_u sign pattern violated at mu={mu}")

        saddle_node = abs(self.f(1.0, 1.0)) < 1e-12 and abs(self.f_u(1.0, 1.0)) < 1e-12
        if not saddle_node:
            messages.append("no saddle node at (u, mu) = (1, 1)")
        logging.debug(f"Hypothesis check for {self.kind.value}: {messages or 'ok'}")
        return HypothesisReport(odd, three_roots, saddle_node, messages)


CUBIC_QUINTIC = Nonlinearity()


@dataclass(frozen=True)
class RingModel:
    """Steady-state map F(U, mu) = d * L_m U + f(U, mu) on a ring of N nodes."""

    N: int
    m: int
    d: float
    nonlinearity: Nonlinearity = CUBIC_QUINTIC

    def __post_init__(self) -> None:
        if self.N < 3:
            raise ConfigError(f"N must be at least 3, got {self.N}")
        if not 1 <= self.m <= self.N // 2:
            raise ConfigError(
                f"m must lie in 1..{self.N // 2} for N={self.N}, got {self.m}"
            )
        if self.d < 0 or not np.isfinite(self.d):
            raise ConfigError(f"d must be a finite nonnegative number, got {self.d}")

    @property
    def is_all_to_all(self) -> bool:
        return self.m == self.N // 2

    @property
    def half(self) -> int:
        """Largest index of the kappa index set, floor(N/2) + 1."""
        return self.N // 2 + 1

    @cached_property
    def coupling_matrix(self) -> FloatArray:
        """Circulant coupling matrix L_m; rows sum to zero."""
        if self.is_all_to_all:
            return np.ones((self.N, self.N)) - self.N * np.eye(self.N)
        column = np.zeros(self.N)
        column[0] = -2.0 * self.m
        for j in range(1, self.m + 1):
            column[j] = 1.0
            column[-j] = 1.0
        # symmetric stencil, so row and column conventions agree
        return circulant(column)

    def coupling_row(self, u: FloatArray, n: int) -> float:
        """Return (L_m U)_n for the 1-based node index ``n``."""
        if not 1 <= n <= self.N:
            raise ConfigError(f"Node index must lie in 1..{self.N}, got {n}")
        return float(self.coupling_matrix[n - 1] @ np.asarray(u, dtype=float))

    def residual(self, u: FloatArray, mu: float) -> FloatArray:
        u = np.asarray(u, dtype=float)
        return self.d * (self.coupling_matrix @ u) + self.nonlinearity.f(u, mu)

    def jacobian(self, u: FloatArray, mu: float) -> FloatArray:
        u = np.asarray(u, dtype=float)
        return self.d * self.coupling_matrix + np.diag(self.nonlinearity.f_u(u, mu))

    def param_derivative(self, u: FloatArray, mu: float) -> FloatArray:
        return np.asarray(self.nonlinearity.f_mu(np.asarray(u, dtype=float), mu))

    def with_d(self, d: float) -> "RingModel":
        return RingModel(self.N, self.m, d, self.nonlinearity)


@dataclass
class StatePoint:
    """A point (U, mu) at coupling d, with its reduced coordinates if any."""

    u: FloatArray
    mu: float
    d: float
    x: FloatArray | None = None

    @property
    def l2norm(self) -> float:
        return float(np.linalg.norm(self.u))


def rotate(u: FloatArray, shift: int = 1) -> FloatArray:
    """Apply the ring rotation zeta ``shift`` times."""
    return np.roll(np.asarray(u), shift)


def flip(u: FloatArray) -> FloatArray:
    """Apply the flip kappa fixing node 1."""
    u = np.asarray(u)
    return u[(-np.arange(u.size)) % u.size]
