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

"""Tests for the small-d fold and branch-point laws."""

import math
from collections.abc import Callable

import numpy as np
import pytest

from ring_snake.asymptotics import (
    Frame,
    LawEvent,
    Provenance,
    alltoall_leftcorner_parametrization,
    alltoall_rightcorner_parametrization,
    branch_point_left,
    branch_point_oracle,
    branch_point_right,
    fit_power_law,
    fold_alltoall_rightcorner,
    fold_alltoall_rightcorner_coefficient,
    fold_left,
    fold_left_coefficient,
    fold_right,
    law_catalogue,
    leftcorner_fold,
    leftcorner_mu_ratio,
    leftcorner_mu_ratio_derivative,
)
from ring_snake.errors import DomainError, InsufficientSamplesError, NoSignChangeError
from ring_snake.model import CUBIC_QUINTIC

NF, RAW = Frame.NORMAL_FORM, Frame.RAW


class TestClosedForms:
    def test_fold_left(self) -> None:
        """Test both frames of the left fold law."""
        assert fold_left(RAW, 1, 1e-3) == pytest.approx(0.03)
        assert fold_left_coefficient(NF, 2) == pytest.approx(3.0)
        assert fold_left_coefficient(NF, 1) == pytest.approx(3.0 / 4.0 ** (1.0 / 3.0))

    def test_fold_right(self) -> None:
        """Test the right fold law."""
        assert fold_right(NF, 2, 0.01) == pytest.approx(0.98)

    def test_branch_points(self) -> None:
        """Test the homogeneous branch-point laws."""
        assert branch_point_left(NF, 6, 0.01) == pytest.approx(0.03)
        assert branch_point_right(NF, 6, 0.01) == pytest.approx(0.9991)
        assert branch_point_right(RAW, 6, 0.01) == pytest.approx(0.999775)

    def test_right_corner(self) -> None:
        """Test the right-corner fold law and its coefficients."""
        assert fold_alltoall_rightcorner(NF, 6, 3, 0.01) == pytest.approx(0.9991)
        assert fold_alltoall_rightcorner_coefficient(NF, 6, 1) == 5.0
        assert fold_alltoall_rightcorner_coefficient(RAW, 6, 1) == 1.25

    @pytest.mark.parametrize(
        "call",
        [
            lambda: fold_left(NF, 1, 0.0),
            lambda: fold_left(NF, 0, 0.01),
            lambda: fold_right(NF, 0, 0.01),
            lambda: branch_point_left(NF, 6, -1.0),
            lambda: fold_alltoall_rightcorner_coefficient(NF, 6, 4),
        ],
    )
    def test_domain_errors(self, call: Callable[[], float]) -> None:
        """Test that non-positive d and out-of-range counts raise DomainError."""
        with pytest.raises(DomainError):
            call()


class TestRightCornerParametrization:
    @pytest.mark.parametrize("frame", [NF, RAW])
    def test_meets_homogeneous_branch_point(self, frame: Frame) -> None:
        """Test that the branch meets the homogeneous state at its branch point."""
        N, k, d = 6, 1, 0.01
        half_d = d if frame is NF else d / 2
        v1, v2, mu = alltoall_rightcorner_parametrization(N, k, -N * half_d / 2, d, frame)
        assert v1 == pytest.approx(v2)
        assert mu == pytest.approx(branch_point_right(frame, N, d))

    @pytest.mark.parametrize("frame", [NF, RAW])
    def test_fold_location(self, frame: Frame) -> None:
        """Test that the parametrization turns at the right-corner fold."""
        N, k, d = 6, 2, 0.01
        half_d = d if frame is NF else d / 2
        _, _, mu = alltoall_rightcorner_parametrization(N, k, -(N - k) * half_d, d, frame)
        assert mu == pytest.approx(fold_alltoall_rightcorner(frame, N, k, d))


class TestLeftCorner:
    def test_ratio_derivative_at_diagonal(self) -> None:
        """Test the derivative of mu/d at phi = pi/4."""
        for k in (1, 2, 3):
            assert leftcorner_mu_ratio_derivative(6, k, math.pi / 4) == pytest.approx(1.5 * (6 - 2 * k))

    def test_symmetric_block_folds_on_diagonal(self) -> None:
        """Test that k = N/2 folds at phi = pi/4 with mu/d = N/2."""
        phi, ratio = leftcorner_fold(6, 3)
        assert phi == pytest.approx(math.pi / 4, abs=1e-3)
        assert ratio == pytest.approx(3.0, rel=1e-6)

    def test_interior_fold_is_stationary(self) -> None:
        """Test that the minimizer of mu/d is a critical point."""
        phi, ratio = leftcorner_fold(6, 1)
        assert 0 < phi < math.pi / 4
        assert ratio < 3.0
        assert leftcorner_mu_ratio_derivative(6, 1, phi) == pytest.approx(0.0, abs=1e-4)

    @pytest.mark.parametrize("frame", [NF, RAW])
    def test_parametrization_ratio(self, frame: Frame) -> None:
        """Test that mu/d along the parametrization is frame independent."""
        _, _, d, mu = alltoall_leftcorner_parametrization(8, 3, 0.4, 0.1, frame)
        assert mu / d == pytest.approx(leftcorner_mu_ratio(8, 3, 0.4))

    def test_angle_range(self) -> None:
        """Test that phi outside (0, pi/2) raises DomainError."""
        with pytest.raises(DomainError):
            leftcorner_mu_ratio(6, 1, 0.0)


class TestBranchPointOracle:
    def test_left(self) -> None:
        """Test the left root against N*d/2."""
        assert branch_point_oracle(CUBIC_QUINTIC, 6, 1e-4, "left") == pytest.approx(3e-4, rel=0.05)

    def test_right(self) -> None:
        """Test the right root against 1 - (N*d/4)^2."""
        mu = branch_point_oracle(CUBIC_QUINTIC, 6, 1e-3, "right")
        assert 1.0 - mu == pytest.approx((6 * 1e-3 / 4) ** 2, rel=0.1)

    def test_no_branch_point_for_large_d(self) -> None:
        """Test that strong coupling removes the homogeneous branch points."""
        with pytest.raises(NoSignChangeError):
            branch_point_oracle(CUBIC_QUINTIC, 6, 1.0, "left")

    def test_side(self) -> None:
        """Test that an unknown side raises DomainError."""
        with pytest.raises(DomainError):
            branch_point_oracle(CUBIC_QUINTIC, 6, 1e-3, "middle")


class TestFitPowerLaw:
    def test_exact_fold_law(self) -> None:
        """Test that exact 3 d^(2/3) data is recovered."""
        ds = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
        fit = fit_power_law([(d, 3.0 * d ** (2.0 / 3.0)) for d in ds])
        assert fit.coefficient == pytest.approx(3.0, rel=1e-6)
        assert fit.exponent == pytest.approx(2.0 / 3.0, rel=1e-6)
        assert fit.max_rel_residual < 1e-6

    def test_complement(self) -> None:
        """Test fitting 1 - mu for laws near mu = 1."""
        fit = fit_power_law([(d, 1.0 - 2.0 * d) for d in (1e-4, 1e-3, 1e-2)], complement=True)
        assert fit.coefficient == pytest.approx(2.0, rel=1e-6)
        assert fit.exponent == pytest.approx(1.0, rel=1e-6)

    @pytest.mark.parametrize(
        "samples",
        [
            [(1e-4, 0.1), (1e-2, 0.2)],
            [(1e-3, 0.1), (2e-3, 0.15), (5e-3, 0.2)],
        ],
    )
    def test_insufficient_samples(self, samples: list[tuple[float, float]]) -> None:
        """Test that too few samples or under a decade of d raise."""
        with pytest.raises(InsufficientSamplesError):
            fit_power_law(samples)

    def test_non_positive_values(self) -> None:
        """Test that a zero fitted value raises DomainError."""
        with pytest.raises(DomainError):
            fit_power_law([(1e-4, 0.0), (1e-3, 0.1), (1e-2, 0.2)])


class TestLawCatalogue:
    def test_sparse_ring(self) -> None:
        """Test the fold laws of a nearest-neighbour ring."""
        laws = law_catalogue(6, 1)
        assert len(laws) == 10
        published = [law for law in laws if law.provenance is Provenance.PUBLISHED]
        assert {law.name for law in published} == {"FoldLeft[a=1]", "FoldRight[c=1]"}
        stated = next(law for law in published if law.event is LawEvent.FOLD_LEFT)
        assert stated.coefficient == pytest.approx(3.0 / 2.0 ** (1.0 / 3.0))

    def test_all_to_all_ring(self) -> None:
        """Test the block laws of an all-to-all ring."""
        laws = law_catalogue(6, 3, k=1)
        assert len(laws) == 16
        names = {law.name for law in laws}
        assert "FoldLeft[k=1,a=5]" in names
        assert "FoldAllToAllRightCorner[k=1]" in names

    def test_block_size_range(self) -> None:
        """Test that k outside 1..N/2 raises DomainError."""
        with pytest.raises(DomainError):
            law_catalogue(6, 3, k=4)

    def test_predict(self) -> None:
        """Test law evaluation with and without the complement."""
        laws = {(law.event, law.frame): law for law in law_catalogue(6, 3, k=2)}
        assert laws[(LawEvent.BRANCH_POINT_LEFT, NF)].predict(0.01) == pytest.approx(0.03)
        assert laws[(LawEvent.BRANCH_POINT_RIGHT, RAW)].predict(0.01) == pytest.approx(0.999775)
        np.testing.assert_allclose(
            laws[(LawEvent.FOLD_RIGHT_CORNER, NF)].predict(0.01), fold_alltoall_rightcorner(NF, 6, 2, 0.01)
        )
