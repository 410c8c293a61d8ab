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
Parameter and Result Types

Value objects shared by every numeric module: the (z, z') parameter pair,
evaluation results with their method tag, and the argument bundles of the
Lauricella and kernel operations.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple
import math

from .errors import DomainError, InadmissibleParams

_ADMISSIBILITY_TOL = 1e-12


class SeriesKind(Enum):
    """Admissible parameter classes."""

    PRINCIPAL = "principal"
    COMPLEMENTARY = "complementary"
    RELAXED = "relaxed"


class Method(Enum):
    """How a value was computed."""

    SERIES = "Series"
    EULER_INTEGRAL = "EulerIntegral"
    MELLIN_BARNES_CONTINUATION = "MellinBarnesContinuation"
    DETERMINANT = "Determinant"
    DIRECT_QUADRATURE = "DirectQuadrature"
    CLOSED_FORM = "ClosedForm"
    LIBRARY = "Library"


@dataclass(frozen=True)
class EvalResult:
    """A numeric value with an error estimate and the route that produced it."""

    value: complex
    abs_err: float
    method: Method
    detail: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise DomainError(f"non-finite value from {self.method.value}")
        if self.abs_err < 0:
            object.__setattr__(self, "abs_err", abs(self.abs_err))

    @property
    def real(self) -> float:
        return self.value.real

    def scaled(self, factor: complex) -> "EvalResult":
        """Multiply value and error by a constant factor."""
        return EvalResult(
            complex(self.value * factor), self.abs_err * abs(factor), self.method, self.detail
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "abs_err": self.abs_err,
            "method": self.method.value,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ZParams:
    """
    Admissible parameter pair (z, z').

    Principal series: z' = conj(z) and z not an integer.
    Complementary series: z, z' real with m < z, z' < m + 1 for an integer m.
    RELAXED marks pairs accepted without admissibility (direct-integral
    cross-checks only).
    """

    z: complex
    zprime: complex
    series: SeriesKind
    m: Optional[int] = None

    @classmethod
    def create(
        cls, z: complex, zprime: Optional[complex] = None, unchecked: bool = False
    ) -> "ZParams":
        z = complex(z)
        zprime = z.conjugate() if zprime is None else complex(zprime)
        if unchecked:
            return cls(z, zprime, SeriesKind.RELAXED)

        if abs(zprime - z.conjugate()) <= _ADMISSIBILITY_TOL * max(1.0, abs(z)):
            if abs(z.imag) <= _ADMISSIBILITY_TOL and _is_integer(z.real):
                raise InadmissibleParams(f"z={z} is an integer", operation="ZParams")
            return cls(z, z.conjugate(), SeriesKind.PRINCIPAL)

        if abs(z.imag) <= _ADMISSIBILITY_TOL and abs(zprime.imag) <= _ADMISSIBILITY_TOL:
            a, b = z.real, zprime.real
            if not _is_integer(a) and not _is_integer(b) and math.floor(a) == math.floor(b):
                return cls(complex(a), complex(b), SeriesKind.COMPLEMENTARY, math.floor(a))

        raise InadmissibleParams(
            f"(z, z')=({z}, {zprime}) is neither principal nor complementary",
            operation="ZParams",
        )

    @property
    def t(self) -> float:
        return (self.z * self.zprime).real

    @property
    def is_relaxed(self) -> bool:
        return self.series is SeriesKind.RELAXED

    def negated(self) -> "ZParams":
        """(z, z') -> (-z, -z'), the reflection partner of the negative octant."""
        if self.is_relaxed:
            return ZParams(-self.z, -self.zprime, SeriesKind.RELAXED)
        if self.series is SeriesKind.PRINCIPAL:
            return ZParams(-self.z, -self.zprime, SeriesKind.PRINCIPAL)
        return ZParams(-self.z, -self.zprime, SeriesKind.COMPLEMENTARY, -self.m - 1)

    def describe(self) -> Dict[str, Any]:
        return {
            "z": [self.z.real, self.z.imag],
            "zprime": [self.zprime.real, self.zprime.imag],
            "t": self.t,
            "series": self.series.value,
            "m": self.m,
        }


def _is_integer(v: float) -> bool:
    return abs(v - round(v)) <= _ADMISSIBILITY_TOL


@dataclass(frozen=True)
class FBParams:
    """Parameters a, b (length m) and c of the Lauricella F_B."""

    a: Tuple[complex, ...]
    b: Tuple[complex, ...]
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        object.__setattr__(self, "b", tuple(complex(v) for v in self.b))
        object.__setattr__(self, "c", complex(self.c))
        if len(self.a) == 0 or len(self.a) != len(self.b):
            raise DomainError("a and b must be nonempty and of equal length", operation="FBParams")

    @property
    def m(self) -> int:
        return len(self.a)

    def shifted(self, indices: Sequence[int], c_shift: int = 0) -> "FBParams":
        """a_i + 1, b_i + 1 for each listed index, c + c_shift."""
        a = list(self.a)
        b = list(self.b)
        for i in indices:
            a[i] += 1
            b[i] += 1
        return FBParams(tuple(a), tuple(b), self.c + c_shift)

    def subset(self, indices: Sequence[int], c: Optional[complex] = None) -> "FBParams":
        return FBParams(
            tuple(self.a[i] for i in indices),
            tuple(self.b[i] for i in indices),
            self.c if c is None else c,
        )


@dataclass(frozen=True)
class FNArgs:
    """Arguments of f_n: parameters and the two negative point sets y', y''."""

    params: ZParams
    yprime: Tuple[float, ...]
    ydoubleprime: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "yprime", tuple(float(v) for v in self.yprime))
        object.__setattr__(self, "ydoubleprime", tuple(float(v) for v in self.ydoubleprime))
        if len(self.yprime) != len(self.ydoubleprime) or not self.yprime:
            raise DomainError("y' and y'' must be nonempty and of equal length", operation="f_n")
        if any(v >= 0 for v in self.yprime + self.ydoubleprime):
            raise DomainError("all y entries must be strictly negative", operation="f_n")

    @property
    def n(self) -> int:
        return len(self.yprime)


@dataclass(frozen=True)
class CorrelationQuery:
    """Point of a non-lifted correlation function, all coordinates of one sign."""

    params: ZParams
    x: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if not self.x:
            raise DomainError("need at least one point", operation="CorrelationQuery")
        if any(v == 0 for v in self.x):
            raise DomainError("points must be nonzero", operation="CorrelationQuery")
        if len({v > 0 for v in self.x}) != 1:
            raise DomainError("points must share one sign", operation="CorrelationQuery")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def positive(self) -> bool:
        return self.x[0] > 0


@dataclass(frozen=True)
class KernelPoint:
    """Argument pair of a kernel on (0, inf)^2."""

    x: float
    y: float

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0):
            raise DomainError(f"kernel arguments must be positive, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class LiftSpec:
    """Exponent of the gamma scale mixture."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError(f"lifting exponent must be positive, got {self.tau}")


@dataclass
class CheckReport:
    """Outcome of one verification check."""

    check: str
    name: str
    route_a: str
    route_b: str
    deviation: float
    tolerance: float
    values: List[Any] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def to_row(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "name": self.name,
            "route_a": self.route_a,
            "route_b": self.route_b,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
