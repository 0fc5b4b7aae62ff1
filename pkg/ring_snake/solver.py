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


"""Dense Newton corrector and bordered linear solves."""

import enum
import logging
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import (
    ConfigError,
    DimensionMismatchError,
    DivergedError,
    NoConvergenceError,
    SingularJacobianError,
)
from .model import FloatArray

PIVOT_TOL = 1e-14
DIVERGENCE_NORM = 1e6

LUFactor = tuple[FloatArray, np.ndarray]


class Damping(str, enum.Enum):
    NONE = "none"
    ARMIJO = "armijo"


@dataclass(frozen=True)
class NewtonOptions:
    tol_residual: float = 1e-10
    tol_step: float = 1e-12
    max_iters: int = 25
    damping: Damping = Damping.NONE
    backtrack_factor: float = 0.5
    min_step: float = 1.0 / 64.0

    def __post_init__(self) -> None:
        if self.tol_residual <= 0 or self.tol_step <= 0:
            raise ConfigError("Newton tolerances must be positive")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be at least 1, got {self.max_iters}")


@dataclass
class NewtonResult:
    x: FloatArray
    iterations: int
    residual_norm: float
    history: list[float] = field(default_factory=list)


def factorize(matrix: FloatArray) -> LUFactor:
    """LU-factorize with partial pivoting, rejecting tiny pivots.

    Raises:
        SingularJacobianError: If a pivot falls below 1e-14 in magnitude.
    """
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise SingularJacobianError("Matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_TOL:
        raise SingularJacobianError(
            f"Singular matrix: pivot {pivots.min():.3e} below {PIVOT_TOL:.0e}"
        )
    return lu, piv


def bordered_matrix(
    J: FloatArray, b_col: FloatArray, b_row: FloatArray, corner: float
) -> FloatArray:
    """Assemble [[J, b_col], [b_row^T, corner]]."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    n = J.shape[0]
    b_col = np.asarray(b_col, dtype=float).ravel()
    b_row = np.asarray(b_row, dtype=float).ravel()
    if J.shape != (n, n) or b_col.size != n or b_row.size != n:
        raise DimensionMismatchError(
            f"Bordered system needs J (n x n) and borders of length n; got J "
            f"{J.shape}, b_col {b_col.size}, b_row {b_row.size}"
        )
    A = np.empty((n + 1, n + 1))
    A[:n, :n] = J
    A[:n, n] = b_col
    A[n, :n] = b_row
    A[n, n] = corner
    return A


def bordered_solve(
    J: FloatArray,
    b_col: FloatArray,
    b_row: FloatArray,
    corner: float,
    rhs: FloatArray,
) -> FloatArray:
    """Solve the bordered system [[J, b_col], [b_row^T, corner]] x = rhs.

    Raises:
        DimensionMismatchError: If the blocks or ``rhs`` have inconsistent sizes.
        SingularJacobianError: If the bordered matrix is numerically singular.
    """
    A = bordered_matrix(J, b_col, b_row, corner)
    rhs = np.asarray(rhs, dtype=float).ravel()
    if rhs.size != A.shape[0]:
        raise DimensionMismatchError(
            f"Right-hand side has length {rhs.size}, expected {A.shape[0]}"
        )
    return lu_solve(factorize(A), rhs)


def newton_solve(
    fun: Callable[[FloatArray], FloatArray],
    jac: Callable[[FloatArray], FloatArray],
    seed: FloatArray,
    opts: NewtonOptions | None = None,
) -> NewtonResult:
    """Solve fun(x) = 0 by Newton's method with dense LU.

    Args:
        fun: Residual map.
        jac: Its Jacobian; square, same size as ``seed``.
        seed: Starting point.
        opts: Tolerances, iteration cap and damping.

    Returns:
        The converged point with its iteration count and residual history.

    Raises:
        SingularJacobianError: A Jacobian could not be factorized.
        NoConvergenceError: ``max_iters`` was exhausted.
        DivergedError: The iterate left the ball of radius 1e6.
    """
    opts = opts or NewtonOptions()
    x = np.array(seed, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DivergedError("Newton seed has non-finite entries")
    r = np.asarray(fun(x), dtype=float)
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    history = [norm]
    if norm <= opts.tol_residual:
        return NewtonResult(x, 0, norm, history)

    for iteration in range(1, opts.max_iters + 1):
        step = lu_solve(factorize(jac(x)), -r)
        lam = 1.0
        x_new = x + step
        r_new = np.asarray(fun(x_new), dtype=float)
        new_norm = float(np.max(np.abs(r_new)))
        if opts.damping is Damping.ARMIJO:
            while not new_norm < norm and lam > opts.min_step:
                lam = max(lam * opts.backtrack_factor, opts.min_step)
                x_new = x + lam * step
                r_new = np.asarray(fun(x_new), dtype=float)
                new_norm = float(np.max(np.abs(r_new)))
        x, r, norm = x_new, r_new, new_norm
        history.append(norm)
        logging.debug(f"Newton iteration {iteration}: |F|={norm:.3e}, lambda={lam}")

        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_NORM:
            raise DivergedError(f"Newton iterate diverged after {iteration} iterations")
        if norm <= opts.tol_residual:
            return NewtonResult(x, iteration, norm, history)
        if lam * np.max(np.abs(step)) < opts.tol_step:
            raise NoConvergenceError(
                f"Newton stalled after {iteration} iterations (|F|={norm:.3e})"
            )

    raise NoConvergenceError(
        f"Newton did not converge in {opts.max_iters} iterations (|F|={norm:.3e})"
    )
