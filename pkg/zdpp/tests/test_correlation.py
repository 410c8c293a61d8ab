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

"""Tests for correlation module."""

import math

import pytest

from ..config import QuadratureSpec
from ..correlation import (
    MomentCheck,
    asympt_const_A,
    controlling_density_check,
    rho_1,
    rho_1_closed,
    rho_n_fb,
    rho_n_fb_pair,
    rho_n_integral,
)
from ..errors import DomainError, RegimeError, SizeGuard
from ..params import CorrelationQuery, Method, ZParams

PRINCIPAL = ZParams.create(0.3 + 0.4j)
COMPLEMENTARY = ZParams.create(1.2, 1.8)


class TestRhoOne:
    """Test the one-point function."""

    def test_zero_outside_support(self):
        """Test rho_1 vanishes for |x| >= 1."""
        for x in (1.0, -1.0, 1.5, -3.0):
            result = rho_1(PRINCIPAL, x)
            assert result.value == 0
            assert result.method is Method.CLOSED_FORM

    def test_origin_rejected(self):
        """Test rho_1 is undefined at 0."""
        with pytest.raises(DomainError):
            rho_1(PRINCIPAL, 0.0)

    def test_closed_form_domain(self):
        """Test the closed form only accepts 0 < |x| < 1."""
        with pytest.raises(DomainError):
            rho_1_closed(PRINCIPAL, 1.0)
        with pytest.raises(DomainError):
            rho_1_closed(PRINCIPAL, 0.0)

    @pytest.mark.parametrize("params", [PRINCIPAL, COMPLEMENTARY])
    def test_closed_form_matches_lauricella_route(self, params):
        """Test the three-term closed form against the f_1 route."""
        closed = rho_1_closed(params, 0.3)
        route = rho_n_fb(CorrelationQuery(params, (0.3,)), coincident="extrapolate")
        assert closed.value.real == pytest.approx(route.value.real, rel=1e-6)

    def test_real_and_positive(self):
        """Test rho_1 is a real positive density on both octants."""
        for x in (-0.8, -0.4, -0.1, 0.1, 0.4, 0.8):
            value = rho_1(PRINCIPAL, x).value
            assert value.imag == 0
            assert value.real > 0

    def test_reflection(self):
        """Test rho_1 on x < 0 equals rho_1 with negated parameters at |x|."""
        left = rho_1(PRINCIPAL, -0.35).value.real
        right = rho_1(PRINCIPAL.negated(), 0.35).value.real
        assert left == pytest.approx(right, rel=1e-12)

    def test_cached_and_uncached_agree(self):
        """Test the default cache returns the same value as an explicit spec."""
        cached = rho_1(PRINCIPAL, 0.6).value.real
        explicit = rho_1(PRINCIPAL, 0.6, quad=QuadratureSpec()).value.real
        assert cached == pytest.approx(explicit, rel=1e-12)


class TestLauricellaRoute:
    """Test rho_n by the f_n route."""

    def test_outside_simplex_is_zero(self):
        """Test rho_n vanishes when sum |x| >= 1."""
        result = rho_n_fb(CorrelationQuery(PRINCIPAL, (0.6, 0.5)))
        assert result.value == 0

    def test_pair_form_rejects_mismatch(self):
        """Test x' and x'' must have equal length."""
        with pytest.raises(DomainError):
            rho_n_fb_pair(PRINCIPAL, (0.1, 0.2), (0.1,))

    def test_pair_form_rejects_negative_octant(self):
        """Test the pair form is defined on the positive octant only."""
        with pytest.raises(DomainError):
            rho_n_fb_pair(PRINCIPAL, (-0.1,), (-0.1,))

    def test_order_guard(self):
        """Test n above the f_n limit raises SizeGuard."""
        with pytest.raises(SizeGuard):
            rho_n_fb(CorrelationQuery(PRINCIPAL, (0.1, 0.1, 0.1, 0.1)))

    def test_mixed_signs_rejected(self):
        """Test points must share one sign."""
        with pytest.raises(DomainError):
            CorrelationQuery(PRINCIPAL, (0.1, -0.2))

    @pytest.mark.slow
    def test_two_point_symmetric(self):
        """Test rho_2 is symmetric in its arguments."""
        a = rho_n_fb(CorrelationQuery(PRINCIPAL, (0.2, 0.3)), coincident="extrapolate")
        b = rho_n_fb(CorrelationQuery(PRINCIPAL, (0.3, 0.2)), coincident="extrapolate")
        assert a.value.real == pytest.approx(b.value.real, rel=1e-6)


class TestDirectIntegral:
    """Test the direct quadrature route."""

    def test_regime_error_for_positive_real_parts(self):
        """Test the integral refuses Re z >= 0."""
        with pytest.raises(RegimeError):
            rho_n_integral(CorrelationQuery(PRINCIPAL, (0.3,)))

    def test_regime_error_for_small_t(self):
        """Test the integral refuses t <= n + 1."""
        params = ZParams.create(-0.5 + 0.5j)
        with pytest.raises(RegimeError):
            rho_n_integral(CorrelationQuery(params, (0.3,)))

    def test_order_guard(self):
        """Test n above the integral limit raises SizeGuard."""
        params = ZParams.create(-0.5 + 3j)
        with pytest.raises(SizeGuard):
            rho_n_integral(CorrelationQuery(params, (0.1, 0.1, 0.1, 0.1)))

    @pytest.mark.slow
    def test_matches_closed_form(self):
        """Test the n = 1 integral against the closed form."""
        params = ZParams.create(-0.5 + 2j)
        direct = rho_n_integral(CorrelationQuery(params, (0.3,)))
        closed = rho_1(params, 0.3)
        assert direct.method is Method.DIRECT_QUADRATURE
        assert direct.value.real == pytest.approx(closed.value.real, rel=1e-4)


class TestAsymptoticConstant:
    """Test the coefficient of 1/x at the origin."""

    def test_formula(self):
        """Test A against the sine formula for a complementary pair."""
        z, zp = 1.2, 1.8
        expected = (
            (z - zp) * math.sin(math.pi * z) * math.sin(math.pi * zp)
            / (math.pi * math.sin(math.pi * (z - zp)))
        )
        assert asympt_const_A(COMPLEMENTARY) == pytest.approx(expected, rel=1e-14)

    def test_coincident_limit(self):
        """Test z = z' uses sin^2(pi z)/pi^2."""
        params = ZParams.create(0.4, 0.4)
        assert asympt_const_A(params) == pytest.approx(
            math.sin(0.4 * math.pi) ** 2 / math.pi**2, rel=1e-14
        )

    def test_positive_for_principal(self):
        """Test A is positive on the principal series."""
        assert asympt_const_A(PRINCIPAL) > 0


class TestControllingDensity:
    """Test the first-moment identity."""

    def test_size_guard(self):
        """Test l_max outside 0..6 raises SizeGuard."""
        with pytest.raises(SizeGuard):
            controlling_density_check(PRINCIPAL, 7)
        with pytest.raises(SizeGuard):
            controlling_density_check(PRINCIPAL, -1)

    def test_max_deviation_of_empty_check(self):
        """Test an empty check reports zero deviation."""
        assert MomentCheck(PRINCIPAL).max_deviation == 0.0

    def test_max_deviation(self):
        """Test max_deviation picks the largest row."""
        check = MomentCheck(PRINCIPAL, [{"deviation": 1e-8}, {"deviation": 3e-7}])
        assert check.max_deviation == 3e-7
        assert check.to_rows()[1]["deviation"] == 3e-7

    @pytest.mark.slow
    def test_moments_match(self):
        """Test quadrature moments agree with the exact controlling moments."""
        check = controlling_density_check(PRINCIPAL, 4)
        assert [row["l"] for row in check.rows] == [0, 1, 2, 3, 4]
        assert set(check.rows[0]) == {"l", "quadrature", "exact", "quad_err", "deviation"}
        assert check.max_deviation <= 1e-5
