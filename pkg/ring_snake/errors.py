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


"""Exception hierarchy shared by the library and the CLI."""


class RingSnakeError(Exception):
    """Base class for all ring-snake errors."""


class ConfigError(RingSnakeError, ValueError):
    """Invalid user input: labels, model parameters, option combinations."""


class InvalidLabelError(ConfigError):
    pass


class IncompatibleReductionError(ConfigError):
    pass


class NoThreeRootsError(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class InsufficientSamplesError(ConfigError):
    pass


class DimensionMismatchError(ConfigError):
    pass


class NumericalError(RingSnakeError, RuntimeError):
    """A solve or a continuation run failed."""


class SingularJacobianError(NumericalError):
    pass


class NoConvergenceError(NumericalError):
    pass


class DivergedError(NumericalError):
    pass


class SeedNotConvergedError(NumericalError):
    pass


class StepCollapseError(NumericalError):
    pass


class NoSignChangeError(NumericalError):
    pass


class NullVectorNotFoundError(NumericalError):
    pass


class FallbackToOriginalBranchError(NumericalError):
    """Branch switching returned to the branch it started from."""


class OutputError(RingSnakeError, OSError):
    """Writing an output artifact failed."""
