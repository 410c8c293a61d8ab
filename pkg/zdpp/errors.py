# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""
Error Hierarchy

Every failure raised by zdpp derives from ZdppError so callers (the CLI in
particular) can map failures to exit codes without catching bare exceptions.
"""

from typing import Optional


class ZdppError(Exception):
    """Base class for all zdpp errors."""

    exit_code = 3

    def __init__(self, message: str, operation: Optional[str] = None):
        super().__init__(message)
        self.operation = operation

    def __str__(self) -> str:
        base = super().__str__()
        if self.operation:
            return f"{self.operation}: {base}"
        return base


class ConfigError(ZdppError):
    """Invalid command-line or YAML configuration."""

    exit_code = 2


class PoleAtNonpositiveInteger(ZdppError):
    """Gamma-family function evaluated at a pole."""


class ParameterPole(ZdppError):
    """A hypergeometric lower parameter sits at a nonpositive integer."""


class NoConvergentRoute(ZdppError):
    """No evaluation route converged for the given arguments."""


class DomainError(ZdppError):
    """Argument outside the domain of the function."""

    exit_code = 2


class DistributionalRegime(ZdppError):
    """phi_a requested with Re a <= -1, where it is only a distribution."""


class SizeGuard(ZdppError):
    """Input size exceeds the combinatorial or quadrature cost guard."""


class SizeMismatch(ZdppError):
    """Partition and cycle type have different sizes."""


class InvalidCoords(ZdppError):
    """Frobenius coordinates are not strictly decreasing or have unequal length."""


class InadmissibleParams(ZdppError):
    """(z, z') is neither a principal nor a complementary series pair."""

    exit_code = 2


class OutsidePolydisc(ZdppError):
    """Series requested outside its safe convergence polydisc."""


class PreconditionViolated(ZdppError):
    """Integral representation requested outside its exponent regime."""


class QuadratureFailure(ZdppError):
    """Quadrature did not reach the requested tolerance within its node budget."""


class PoleOnContour(ZdppError):
    """A Mellin-Barnes contour passes through a pole of the integrand."""


class DegenerateDifference(ZdppError):
    """a_i - b_i is an integer; the generic continuation does not apply."""


class RegimeError(ZdppError):
    """Parameters outside the integrability regime of a direct integral."""


class FitFailure(ZdppError):
    """Asymptotic residuals do not admit a power-law fit."""
