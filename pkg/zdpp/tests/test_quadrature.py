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

"""Tests for quadrature module."""

import math

import mpmath
import numpy as np
import pytest

from ..config import QuadratureSpec
from ..errors import QuadratureFailure
from ..quadrature import (
    exp_sinh_rule,
    integrate_interval,
    integrate_semi_infinite,
    integrate_semi_infinite_2d,
    integrate_simplex,
    jacobi_rule,
    tanh_sinh_rule,
)


def _beta(a: complex, b: complex) -> complex:
    return complex(mpmath.beta(a, b))


class TestRules:
    """Tests for the node and weight generators."""

    def test_jacobi_weights_sum_to_beta(self):
        """Test that Jacobi weights carry the weight function."""
        x, w = jacobi_rule(-0.3, 0.6, 12)
        assert np.all((x > 0) & (x < 1))
        assert w.sum() == pytest.approx(_beta(0.7, 1.6).real, rel=1e-13)

    def test_jacobi_rule_is_read_only(self):
        """Test that cached node arrays cannot be modified."""
        x, _ = jacobi_rule(0.0, 0.0, 8)
        with pytest.raises(ValueError):
            x[0] = 0.5

    def test_tanh_sinh_complement(self):
        """Test that the complement array is 1 - x."""
        x, xc, _ = tanh_sinh_rule(0.0, 0.0, 2)
        assert np.allclose(x + xc, 1.0, atol=1e-15)

    def test_exp_sinh_positive_nodes(self):
        """Test that exp-sinh nodes cover (0, inf)."""
        x, w = exp_sinh_rule(0.0, 1.0, 1)
        assert x.min() < 1e-6
        assert x.max() > 40
        assert np.all(w > 0)


class TestIntegrateInterval:
    """Tests for integrate_interval."""

    def test_real_exponents(self):
        """Test a Beta integral through Gauss-Jacobi."""
        value, err = integrate_interval(lambda x: np.ones_like(x), -0.5, 0.25)
        assert value.real == pytest.approx(_beta(0.5, 1.25).real, rel=1e-12)
        assert err < 1e-10

    def test_complex_exponents(self):
        """Test a complex Beta integral through tanh-sinh."""
        alpha = 0.3 + 0.5j
        value, _ = integrate_interval(lambda x: np.ones_like(x), alpha, 0.2)
        expected = _beta(alpha + 1, 1.2)
        assert abs(value - expected) <= 1e-9 * abs(expected)

    def test_shifted_interval(self):
        """Test the affine map to [lo, hi]."""
        value, _ = integrate_interval(lambda x: x**2, quad=None, lo=1.0, hi=3.0)
        assert value.real == pytest.approx(26 / 3, rel=1e-13)

    def test_failure_when_budget_exhausted(self):
        """Test that a single level cannot confirm convergence."""
        with pytest.raises(QuadratureFailure):
            integrate_interval(np.cos, quad=QuadratureSpec(max_doublings=0))


class TestIntegrateSemiInfinite:
    """Tests for the exp-sinh drivers."""

    def test_gamma_half(self):
        """Test the integral of x^(-1/2) e^(-x)."""
        value, _ = integrate_semi_infinite(lambda x: x**-0.5 * np.exp(-x), -0.5, 1.0)
        assert value.real == pytest.approx(math.sqrt(math.pi), rel=1e-9)

    def test_two_dimensional(self):
        """Test a product integral over the quadrant."""
        value, _ = integrate_semi_infinite_2d(
            lambda s, t: s**0.5 * np.exp(-s) * np.exp(-2 * t), (0.5, 0.0), (1.0, 2.0)
        )
        assert value.real == pytest.approx(math.gamma(1.5) / 2, rel=1e-9)


class TestIntegrateSimplex:
    """Tests for Dirichlet-weighted simplex integrals."""

    def test_dirichlet_normalization(self):
        """Test the Dirichlet integral with a constant integrand."""
        value, _ = integrate_simplex(lambda u, r: np.ones(u.shape[0]), [0.5, -0.3], 0.2)
        expected = math.gamma(1.5) * math.gamma(0.7) * math.gamma(1.2) / math.gamma(3.4)
        assert value.real == pytest.approx(expected, rel=1e-11)

    def test_remainder_matches_coordinates(self):
        """Test that the remainder passed to g equals 1 - sum(u)."""
        seen = []

        def g(u, remainder):
            seen.append(np.max(np.abs(1 - u.sum(axis=1) - remainder)))
            return u[:, 0]

        value, _ = integrate_simplex(g, [0.0, 0.0], 0.0)
        assert value.real == pytest.approx(1 / 6, rel=1e-12)
        assert max(seen) < 1e-14

    def test_three_dimensional(self):
        """Test a three-dimensional simplex volume."""
        value, _ = integrate_simplex(lambda u, r: np.ones(u.shape[0]), [0.0, 0.0, 0.0])
        assert value.real == pytest.approx(1 / 6, rel=1e-11)
