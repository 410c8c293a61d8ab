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

"""Tests for lauricella module."""

import mpmath
import pytest
from scipy import special as sc

from ..errors import (
    DegenerateDifference,
    DomainError,
    NoConvergentRoute,
    OutsidePolydisc,
    ParameterPole,
    PreconditionViolated,
    SizeGuard,
)
from ..lauricella import (
    fb_continuation,
    fb_continuation_branches,
    fb_continuation_log,
    fb_derivative,
    fb_euler_integral,
    fb_evaluate,
    fb_hybrid,
    fb_mellin_barnes,
    fb_series,
    f_n,
    f_n_detailed,
    fn_parameters,
)
from ..params import FBParams, FNArgs, Method, ZParams
from ..telemetry import EventType, TelemetryCollector

GAUSS = FBParams((0.45,), (0.8,), 2.1)
PAIR = FBParams((0.3, 0.5), (0.45, 0.9), 2.4)


def _close(a: complex, b: complex, rel: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b))


class TestOneVariable:
    """F_B with one variable is the Gauss function; every route must agree with scipy."""

    def test_series(self):
        """Test the series route inside the disc."""
        result = fb_series(FBParams((0.3,), (0.4,), 1.5), [-0.5])
        assert result.value.real == pytest.approx(sc.hyp2f1(0.3, 0.4, 1.5, -0.5), rel=1e-13)
        assert result.method is Method.SERIES

    def test_series_complex_parameters(self):
        """Test complex parameters against mpmath."""
        p = FBParams((0.3 + 0.2j,), (0.7,), 1.9)
        expected = complex(mpmath.hyp2f1(0.3 + 0.2j, 0.7, 1.9, -0.8))
        assert _close(fb_series(p, [-0.8]).value, expected, 1e-12)

    def test_euler_integral(self):
        """Test the Euler integral route."""
        result = fb_euler_integral(FBParams((0.6,), (0.35,), 1.4), [-1.7])
        assert result.value.real == pytest.approx(sc.hyp2f1(0.6, 0.35, 1.4, -1.7), rel=1e-8)

    def test_mellin_barnes(self):
        """Test the contour route."""
        result = fb_mellin_barnes(FBParams((0.6,), (0.35,), 1.4), [-1.7])
        assert result.value.real == pytest.approx(sc.hyp2f1(0.6, 0.35, 1.4, -1.7), rel=1e-8)

    def test_continuation(self):
        """Test the large-argument expansion."""
        result = fb_continuation(GAUSS, [-5.0])
        assert result.value.real == pytest.approx(sc.hyp2f1(0.45, 0.8, 2.1, -5.0), rel=1e-10)
        assert len(fb_continuation_branches(GAUSS, [-5.0])) == 2

    def test_logarithmic_continuation(self):
        """Test the a = b expansion with its logarithmic branch."""
        result = fb_continuation_log([0.3], 1.7, [-3.0])
        assert result.value.real == pytest.approx(sc.hyp2f1(0.3, 0.3, 1.7, -3.0), rel=1e-9)
        assert result.detail == "log-continuation"

    def test_derivative(self):
        """Test the contiguity derivative."""
        p = FBParams((0.3,), (0.4,), 1.5)
        expected = 0.3 * 0.4 / 1.5 * sc.hyp2f1(1.3, 1.4, 2.5, -0.5)
        assert fb_derivative(p, [-0.5], 0).value.real == pytest.approx(expected, rel=1e-12)


class TestTwoVariables:
    """Route agreement for m = 2."""

    def test_zero_coordinate_reduces_to_gauss(self):
        """Test F_B(a, b; c | y, 0) = F(a_1, b_1; c; y)."""
        p = FBParams((0.3, 0.5), (0.4, 0.6), 2.2)
        result = fb_series(p, [-0.3, 0.0])
        assert result.value.real == pytest.approx(sc.hyp2f1(0.3, 0.4, 2.2, -0.3), rel=1e-13)

    def test_series_against_euler(self):
        """Test series and Euler integral on the disc."""
        p = FBParams((0.3, 0.5), (0.4, 0.6), 2.2)
        y = [-0.3, -0.6]
        assert _close(fb_series(p, y).value, fb_euler_integral(p, y).value, 1e-8)

    def test_mellin_barnes_against_euler(self):
        """Test the double contour integral outside the disc."""
        p = FBParams((0.3, 0.5), (0.4, 0.6), 2.2)
        y = [-1.5, -2.0]
        assert _close(fb_mellin_barnes(p, y).value, fb_euler_integral(p, y).value, 1e-7)

    def test_continuation_against_mellin_barnes(self):
        """Test the four-branch expansion."""
        y = [-4.0, -6.0]
        assert _close(fb_continuation(PAIR, y).value, fb_mellin_barnes(PAIR, y).value, 1e-7)

    def test_hybrid_against_mellin_barnes(self):
        """Test series in one coordinate and continuation in the other."""
        y = [-0.5, -3.0]
        result = fb_hybrid(PAIR, y)
        assert result.detail == "hybrid"
        assert _close(result.value, fb_mellin_barnes(PAIR, y).value, 1e-7)

    def test_mixed_logarithmic(self):
        """Test one logarithmic and one simple coordinate."""
        p = FBParams((0.3, 0.2), (0.3, 0.45), 1.9)
        y = [-3.0, -4.0]
        result = fb_evaluate(p, y, route="continuation")
        assert result.detail == "log-continuation"
        assert _close(result.value, fb_mellin_barnes(p, y).value, 1e-7)


@pytest.mark.slow
class TestThreeVariables:
    """Route agreement for m = 3."""

    def test_continuation_against_euler(self):
        """Test the eight-branch expansion against the triple integral."""
        p = FBParams((0.2, 0.3, 0.4), (0.5, 0.65, 0.55), 2.5)
        y = [-5.0, -6.0, -8.0]
        assert _close(fb_continuation(p, y).value, fb_euler_integral(p, y).value, 1e-6)

    def test_series_against_euler(self):
        """Test the series against the triple integral."""
        p = FBParams((0.2, 0.3, 0.4), (0.5, 0.5, 0.5), 2.5)
        y = [-0.2, -0.4, -0.6]
        assert _close(fb_series(p, y).value, fb_euler_integral(p, y).value, 1e-6)


class TestPreconditions:
    """Tests for route preconditions."""

    def test_series_outside_polydisc(self):
        """Test the series radius."""
        with pytest.raises(OutsidePolydisc):
            fb_series(GAUSS, [-0.97])

    def test_series_parameter_pole(self):
        """Test a nonpositive integer c."""
        with pytest.raises(ParameterPole):
            fb_series(FBParams((0.3,), (0.4,), -1.0), [-0.5])

    def test_size_guards(self):
        """Test dimension limits of the integral routes."""
        p4 = FBParams((0.1,) * 4, (0.2,) * 4, 3.0)
        with pytest.raises(SizeGuard):
            fb_euler_integral(p4, [-1.0] * 4)
        p3 = FBParams((0.1,) * 3, (0.2,) * 3, 3.0)
        with pytest.raises(SizeGuard):
            fb_mellin_barnes(p3, [-1.0] * 3)

    def test_euler_needs_positive_b(self):
        """Test the Euler integral convergence condition."""
        with pytest.raises(PreconditionViolated):
            fb_euler_integral(FBParams((0.3,), (-0.2,), 1.5), [-1.0])

    def test_continuation_needs_large_arguments(self):
        """Test the continuation thresholds."""
        with pytest.raises(PreconditionViolated):
            fb_continuation(GAUSS, [-1.5])

    def test_continuation_integer_difference(self):
        """Test that an integer a - b is refused."""
        with pytest.raises(DegenerateDifference):
            fb_continuation(FBParams((0.3,), (1.3,), 2.1), [-5.0])

    def test_positive_argument(self):
        """Test that the integral routes need negative arguments."""
        with pytest.raises(DomainError):
            fb_mellin_barnes(GAUSS, [1.5])


class TestDispatcher:
    """Tests for fb_evaluate."""

    def test_auto_series(self):
        """Test that small arguments use the series."""
        assert fb_evaluate(PAIR, [-0.2, -0.3]).method is Method.SERIES

    def test_auto_continuation(self):
        """Test that large arguments use the continuation."""
        assert fb_evaluate(PAIR, [-4.0, -6.0]).detail == "continuation"

    def test_fallback_is_recorded(self):
        """Test that a failing route falls back and leaves events."""
        telemetry = TelemetryCollector()
        p = FBParams((-1.0,), (0.35,), 1.4)
        result = fb_evaluate(p, [-1.5], telemetry=telemetry, trace_id="fallback")
        assert result.method is Method.EULER_INTEGRAL
        assert result.value.real == pytest.approx(1 + 0.35 * 1.5 / 1.4, rel=1e-10)
        fallbacks = telemetry.get_events(EventType.ROUTE_FALLBACK, trace_id="fallback")
        assert fallbacks[0].data["from_route"] == "mellin_barnes"
        assert len(telemetry.get_events(EventType.ROUTE_COMPLETE, trace_id="fallback")) == 1

    def test_no_route(self):
        """Test that positive arguments outside the disc have no route."""
        with pytest.raises(NoConvergentRoute):
            fb_evaluate(GAUSS, [1.5])

    def test_forced_route(self):
        """Test that an explicit route bypasses the plan."""
        result = fb_evaluate(GAUSS, [-5.0], route="mellin_barnes")
        assert result.detail == "contour"
        with pytest.raises(DomainError):
            fb_evaluate(GAUSS, [-5.0], route="bogus")


class TestFn:
    """Tests for f_n."""

    PARAMS = ZParams.create(0.3 + 0.4j)

    def test_parameters(self):
        """Test the F_B parameters of one sign pattern."""
        z, zp = 0.3 + 0.4j, 0.3 - 0.4j
        p = fn_parameters(z, zp, (0, 1))
        assert p.m == 4
        assert p.a == (1 - zp, -zp, -z, 1 - z)
        assert p.c == pytest.approx(0.25 - 2 * (0.6 - 1))

    def test_coincident_modes_agree(self):
        """Test the exact derivative form against offset extrapolation."""
        args = FNArgs(self.PARAMS, (-3.0,), (-3.0,))
        exact = f_n(args)
        extrapolated, err, results = f_n_detailed(args, coincident="extrapolate")
        assert _close(exact, extrapolated, 1e-5)
        assert len(results) == 4

    def test_limit_of_distinct_points(self):
        """Test continuity of f_n across the coincident set."""
        exact = f_n(FNArgs(self.PARAMS, (-3.0,), (-3.0,)))
        near = f_n(FNArgs(self.PARAMS, (-3.0,), (-3.003,)))
        assert _close(exact, near, 1e-2)

    def test_order_guard(self):
        """Test the size guard on n."""
        args = FNArgs(self.PARAMS, (-3.0,) * 4, (-4.0,) * 4)
        with pytest.raises(SizeGuard):
            f_n(args)

    def test_unknown_mode(self):
        """Test that an unknown coincident mode is refused."""
        with pytest.raises(DomainError):
            f_n(FNArgs(self.PARAMS, (-3.0,), (-3.0,)), coincident="guess")
