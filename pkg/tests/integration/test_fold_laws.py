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

"""d-sweeps of the full pipeline against the fold laws."""

import pytest

from ring_snake.model import RingModel
from ring_snake.verification import (
    DEFAULT_D_SWEEP,
    LawReport,
    VerificationReport,
    run_verification,
)


def law(report: VerificationReport, name: str) -> LawReport:
    return next(entry for entry in report.laws if entry.law == name)


@pytest.mark.parametrize("N, m, a", [(6, 1, 1), (9, 2, 2)])
def test_left_fold_law(N: int, m: int, a: int) -> None:
    """Test the 2/3 exponent and the raw-frame prefactor 3 a^(2/3)."""
    report = run_verification(RingModel(N, m, 0.005), DEFAULT_D_SWEEP, threads=4)
    left = law(report, f"FoldLeft[a={a}]")
    assert left.fitted_p == pytest.approx(2.0 / 3.0, abs=0.02)
    assert left.fitted_A == pytest.approx(3.0 * a ** (2.0 / 3.0), rel=0.05)


def test_right_fold_law() -> None:
    """Test the linear right-fold law 1 - d on the nearest-neighbour ring."""
    report = run_verification(RingModel(6, 1, 0.005), DEFAULT_D_SWEEP, threads=4)
    right = law(report, "FoldRight[c=1]")
    assert right.fitted_p == pytest.approx(1.0, abs=0.02)
    assert right.fitted_A == pytest.approx(1.0, rel=0.02)
    assert report.passed


def test_right_fold_law_two_inactive_neighbours() -> None:
    """Test 1 - mu = 2d at the right folds of the m = 2 ring on nine nodes."""
    report = run_verification(RingModel(9, 2, 0.005), DEFAULT_D_SWEEP, threads=4)
    right = law(report, "FoldRight[c=2]")
    assert right.fitted_p == pytest.approx(1.0, abs=0.02)
    assert right.fitted_A == pytest.approx(2.0, rel=0.05)
    assert right.passed


@pytest.fixture(scope="module")
def alltoall_report() -> VerificationReport:
    model = RingModel(6, 3, 0.005)
    return run_verification(model, DEFAULT_D_SWEEP, alltoall=True, k_values=[1, 2], threads=4)


@pytest.mark.parametrize("k, c", [(1, 5), (1, 1), (2, 4), (2, 2)])
def test_alltoall_right_fold_law(alltoall_report: VerificationReport, k: int, c: int) -> None:
    """Test 1 - mu = c*d for both block sides c = N - k and c = k of the closed curves."""
    right = law(alltoall_report, f"FoldRight[k={k},c={c}]")
    assert right.fitted_p == pytest.approx(1.0, abs=0.02)
    assert right.fitted_A == pytest.approx(float(c), rel=0.05)
