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


"""Fixed-point subspace reductions of the ring steady-state map."""

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, IncompatibleReductionError
from .model import FloatArray, RingModel


class ReductionKind(str, enum.Enum):
    FULL = "full"
    KAPPA = "kappa"
    TWO_BLOCK = "twoblock"


@dataclass(frozen=True)
class SymmetryReduction:
    """Linear embed/project pair onto a fixed-point subspace.

    ``embed`` maps reduced coordinates to the full ring and ``project``
    selects one representative node per orbit, so ``project(embed(x)) == x``.
    Kappa keeps nodes 1..floor(N/2)+1; TwoBlock keeps (v1, v2) for the
    first k and last N-k nodes.
    """

    kind: ReductionKind
    N: int
    k: int | None = None

    def __post_init__(self) -> None:
        if self.N < 3:
            raise ConfigError(f"N must be at least 3, got {self.N}")
        if self.kind is ReductionKind.TWO_BLOCK:
            if self.k is None or not 1 <= self.k <= self.N - 1:
                raise ConfigError(
                    f"TwoBlock reduction needs 1 <= k <= {self.N - 1}, got {self.k}"
                )

    @classmethod
    def parse(cls, text: str, N: int) -> "SymmetryReduction":
        """Parse ``full``, ``kappa`` or ``twoblock:k``."""
        name, _, k = text.strip().partition(":")
        try:
            kind = ReductionKind(name)
        except ValueError as e:
            raise ConfigError(
                f"Unknown symmetry '{text}'. Use full, kappa or twoblock:k"
            ) from e
        if kind is ReductionKind.TWO_BLOCK:
            if not k.isdigit():
                raise ConfigError(f"Symmetry '{text}' needs a block size, e.g. twoblock:1")
            return cls(kind, N, int(k))
        return cls(kind, N)

    def __str__(self) -> str:
        if self.kind is ReductionKind.TWO_BLOCK:
            return f"twoblock:{self.k}"
        return self.kind.value

    @property
    def reduced_dim(self) -> int:
        if self.kind is ReductionKind.KAPPA:
            return self.N // 2 + 1
        if self.kind is ReductionKind.TWO_BLOCK:
            return 2
        return self.N

    @cached_property
    def embed_matrix(self) -> FloatArray:
        E = np.zeros((self.N, self.reduced_dim))
        idx = np.arange(self.N)
        if self.kind is ReductionKind.KAPPA:
            E[idx, np.minimum(idx, self.N - idx)] = 1.0
        elif self.kind is ReductionKind.TWO_BLOCK:
            E[: self.k, 0] = 1.0
            E[self.k :, 1] = 1.0
        else:
            E[idx, idx] = 1.0
        return E

    @cached_property
    def project_matrix(self) -> FloatArray:
        P = np.zeros((self.reduced_dim, self.N))
        if self.kind is ReductionKind.TWO_BLOCK:
            P[0, 0] = 1.0
            P[1, self.k] = 1.0
        else:
            rows = np.arange(self.reduced_dim)
            P[rows, rows] = 1.0
        return P

    def embed(self, x: FloatArray) -> FloatArray:
        return self.embed_matrix @ np.asarray(x, dtype=float)

    def project(self, u: FloatArray) -> FloatArray:
        return self.project_matrix @ np.asarray(u, dtype=float)

    def check_compatible(self, model: RingModel) -> None:
        """Raise IncompatibleReductionError unless the subspace is invariant for ``model``."""
        if model.N != self.N:
            raise IncompatibleReductionError(
                f"Reduction built for N={self.N} cannot act on a ring with N={model.N}"
            )
        if self.kind is ReductionKind.TWO_BLOCK and not model.is_all_to_all:
            raise IncompatibleReductionError(
                f"TwoBlock reduction needs all-to-all coupling (m={model.N // 2}), "
                f"got m={model.m}"
            )

    def reduced_residual(self, model: RingModel, x: FloatArray, mu: float) -> FloatArray:
        self.check_compatible(model)
        return self.project(model.residual(self.embed(x), mu))

    def reduced_jacobian(self, model: RingModel, x: FloatArray, mu: float) -> FloatArray:
        self.check_compatible(model)
        return self.project_matrix @ model.jacobian(self.embed(x), mu) @ self.embed_matrix

    def reduced_param_derivative(
        self, model: RingModel, x: FloatArray, mu: float
    ) -> FloatArray:
        return self.project(model.param_derivative(self.embed(x), mu))


@dataclass(frozen=True)
class ReducedSystem:
    """A ring model restricted to a fixed-point subspace, in reduced coordinates."""

    model: RingModel
    reduction: SymmetryReduction

    def __post_init__(self) -> None:
        self.reduction.check_compatible(self.model)

    @classmethod
    def full(cls, model: RingModel) -> "ReducedSystem":
        return cls(model, SymmetryReduction(ReductionKind.FULL, model.N))

    @property
    def dim(self) -> int:
        return self.reduction.reduced_dim

    def residual(self, x: FloatArray, mu: float) -> FloatArray:
        return self.reduction.reduced_residual(self.model, x, mu)

    def jacobian(self, x: FloatArray, mu: float) -> FloatArray:
        return self.reduction.reduced_jacobian(self.model, x, mu)

    def param_derivative(self, x: FloatArray, mu: float) -> FloatArray:
        return self.reduction.reduced_param_derivative(self.model, x, mu)

    def full_state(self, x: FloatArray) -> FloatArray:
        return self.reduction.embed(x)

    def reduce_state(self, u: FloatArray) -> FloatArray:
        return self.reduction.project(u)
