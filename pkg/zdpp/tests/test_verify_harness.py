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

"""Tests for verify_harness module."""

import math

import numpy as np
import pytest

from ..config import HarnessSettings, Settings
from .. import verify_harness
from ..errors import RegimeError, SizeGuard
from ..params import EvalResult, Method, ZParams
from ..telemetry import EventType, TelemetryCollector
from ..verify_harness import (
    FB_ROUTE_CASES,
    SUITES,
    KERNEL_REFERENCE,
    VerificationHarness,
    convergence_check,
    finite_n_table,
    limit_bin_mass,
    param_label,
)

PRINCIPAL = ZParams.create(0.3 + 0.4j)


def small_settings() -> Settings:
    return Settings(harness=HarnessSettings(nmax_characters=4, n_normalization=6))


class _FixedTable:
    def __init__(self, mass: float):
        self.mass = mass

    def bin_mass(self, lo: float, hi: float) -> float:
        return self.mass


def fix_masses(monkeypatch, masses, limit=1.0):
    """Replace the finite-n tables and the limit integral by fixed bin masses."""
    monkeypatch.setattr(verify_harness, "finite_n_table", lambda params, n: _FixedTable(masses[n]))
    monkeypatch.setattr(verify_harness, "limit_bin_mass", lambda params, lo, hi, settings: limit)


class TestFiniteN:
    """Test the exact finite-n tables."""

    def test_total_mass(self):
        """Test the z-measure sums to one."""
        report = finite_n_table(PRINCIPAL, 8)
        assert report.total_mass_error < 1e-12
        assert math.fsum(report.probabilities.values()) == pytest.approx(1.0)

    def test_first_moment_is_one(self):
        """Test the scaled Frobenius coordinates carry unit absolute mass."""
        report = finite_n_table(PRINCIPAL, 7)
        assert float(np.sum(report.weights * np.abs(report.points))) == pytest.approx(1.0)

    def test_points_inside_interval(self):
        """Test scaled coordinates lie in (-1, 1)."""
        report = finite_n_table(PRINCIPAL, 6)
        assert np.all(np.abs(report.points) < 1)

    def test_bin_mass_additive(self):
        """Test adjacent bins add up."""
        report = finite_n_table(PRINCIPAL, 9)
        whole = report.bin_mass(0.0, 1.0)
        assert whole == pytest.approx(report.bin_mass(0.0, 0.4) + report.bin_mass(0.4, 1.0))

    def test_histogram_matches_bins(self):
        """Test the histogram agrees with bin_mass."""
        report = finite_n_table(PRINCIPAL, 5)
        counts = report.histogram([-1.0, 0.0, 1.0])
        assert counts[1] == pytest.approx(report.bin_mass(0.0, 1.0))

    def test_size_guard(self):
        """Test n outside 1..30 raises SizeGuard."""
        with pytest.raises(SizeGuard):
            finite_n_table(PRINCIPAL, 31)
        with pytest.raises(SizeGuard):
            finite_n_table(PRINCIPAL, 0)

    def test_bin_across_origin(self):
        """Test a bin containing the origin raises RegimeError."""
        with pytest.raises(RegimeError):
            limit_bin_mass(PRINCIPAL, -0.2, 0.3)

    def test_bin_outside_support(self):
        """Test a bin beyond the support has zero mass."""
        assert limit_bin_mass(PRINCIPAL, 1.0, 2.0) == 0.0


class TestVerificationHarness:
    """Test suite dispatch and reporting."""

    def test_suite_order(self):
        """Test the fixed suite order."""
        assert SUITES[0] == "characters"
        assert SUITES[-1] == "convergence"
        assert len(SUITES) == 8

    def test_unknown_suite(self):
        """Test an unknown suite name raises ValueError."""
        harness = VerificationHarness(PRINCIPAL, small_settings())
        with pytest.raises(ValueError):
            harness.run("everything")

    def test_characters_suite_passes(self):
        """Test the character suite agrees on small n."""
        harness = VerificationHarness(PRINCIPAL, small_settings())
        reports = harness.run("characters")
        assert reports
        assert all(r.passed for r in reports)
        assert reports[0].name == "n=1"

    def test_normalization_suite(self):
        """Test one normalization report per n."""
        harness = VerificationHarness(PRINCIPAL, small_settings())
        reports = harness.run("normalization")
        assert [r.name for r in reports] == [f"n={n}" for n in range(1, 7)]
        assert all(r.passed for r in reports)

    def test_strict_tolerance_fails(self):
        """Test a negative tolerance fails every check."""
        settings = small_settings()
        settings.tolerances.normalization = -1.0
        reports = VerificationHarness(PRINCIPAL, settings).run("normalization")
        assert not any(r.passed for r in reports)

    def test_events_recorded(self):
        """Test each check becomes a telemetry event under the trace id."""
        collector = TelemetryCollector()
        harness = VerificationHarness(
            PRINCIPAL, small_settings(), trace_id="trace-1", telemetry=collector
        )
        reports = harness.run("normalization")
        events = collector.get_events(EventType.CHECK_PASS, trace_id="trace-1")
        assert len(events) == len(reports)

    def test_aborted_suite_reported(self):
        """Test a suite raising a library error becomes one failing report."""
        relaxed = ZParams.create(0.3 + 0.4j, 0.5, unchecked=True)
        collector = TelemetryCollector()
        harness = VerificationHarness(relaxed, small_settings(), telemetry=collector)
        reports = harness.run("moments")
        assert len(reports) == 1
        assert reports[0].name == "aborted"
        assert reports[0].deviation == math.inf
        assert not reports[0].passed
        assert collector.get_events(EventType.CHECK_FAIL)

    def test_report_row(self):
        """Test report rows carry the pass flag."""
        harness = VerificationHarness(PRINCIPAL, small_settings())
        row = harness.run("normalization")[0].to_row()
        assert row["check"] == "normalization"
        assert row["pass"] is True

    def test_route_cases_are_well_formed(self):
        """Test every Lauricella case has matching a, b and y lengths."""
        for name, a, b, c, y, route_a, route_b in FB_ROUTE_CASES:
            assert len(a) == len(b) == len(y), name
            assert route_a != route_b, name

    @pytest.mark.slow
    def test_fb_routes_suite(self):
        """Test the Lauricella routes agree on their overlaps."""
        reports = VerificationHarness(PRINCIPAL).run("fb_routes")
        assert len(reports) == len(FB_ROUTE_CASES)
        assert all(r.passed for r in reports)

    @pytest.mark.slow
    def test_lifting_suite(self):
        """Test lifting rho_1 reproduces K(x, x)."""
        reports = VerificationHarness(PRINCIPAL).run("lifting")
        assert all(r.passed for r in reports)

    @pytest.mark.slow
    def test_kernel_routes_suite(self):
        """Test M and K agree on the grid with symmetric K and nonnegative minors."""
        settings = Settings(harness=HarnessSettings(kernel_grid=[0.2, 0.5, 0.8]))
        reports = VerificationHarness(PRINCIPAL, settings).run("kernel_routes")
        assert len(reports) == 9 + 2
        assert reports[0].name == "M=K x=0.2,y=0.2 (z=0.3+0.4j,z'=0.3-0.4j)"
        assert all(r.passed for r in reports)

    @pytest.mark.slow
    def test_asymptotics_suite(self):
        """Test the remainder fits and k(1) = A(0)."""
        reports = VerificationHarness(PRINCIPAL).run("asymptotics")
        names = [r.name for r in reports]
        assert len(reports) == 3
        assert names[-1] == "k(1) = A(0)"
        assert reports[-1].passed


class TestConvergenceCheck:
    """Test the finite-n convergence reports on fixed bin masses."""

    BINS = [(0.2, 0.5)]

    def test_monotone_approach_passes(self, monkeypatch):
        """Test a steadily shrinking deviation passes both reports."""
        fix_masses(monkeypatch, {10: 0.90, 20: 0.95, 30: 0.97})
        final, trend = convergence_check(PRINCIPAL, [10, 20, 30], self.BINS)
        assert final.name == "bin [0.2, 0.5] n=30"
        assert final.deviation == pytest.approx(0.03)
        assert final.passed
        assert trend.name == "bin [0.2, 0.5] trend"
        assert trend.deviation == 0.0
        assert trend.passed

    def test_middle_spike_fails_trend(self, monkeypatch):
        """Test a deviation that grows between n=10 and n=20 fails the trend."""
        fix_masses(monkeypatch, {10: 0.95, 20: 0.80, 30: 0.96})
        final, trend = convergence_check(PRINCIPAL, [10, 20, 30], self.BINS)
        assert final.passed
        assert trend.deviation == pytest.approx(0.15)
        assert not trend.passed
        assert trend.values == pytest.approx([0.05, 0.20, 0.04])

    def test_large_final_deviation_fails(self, monkeypatch):
        """Test a final deviation above 10% fails even when the trend is monotone."""
        fix_masses(monkeypatch, {10: 0.70, 20: 0.75, 30: 0.80})
        final, trend = convergence_check(PRINCIPAL, [10, 20, 30], self.BINS)
        assert final.deviation == pytest.approx(0.20)
        assert not final.passed
        assert trend.passed

    def test_n_list_sorted(self, monkeypatch):
        """Test the n list is taken in increasing order."""
        fix_masses(monkeypatch, {10: 0.90, 20: 0.95, 30: 0.97})
        final, trend = convergence_check(PRINCIPAL, [30, 10, 20], self.BINS)
        assert final.name.endswith("n=30")
        assert trend.passed

    def test_harness_suite_uses_configured_bin(self, monkeypatch):
        """Test the convergence suite runs on the configured n list and bin."""
        fix_masses(monkeypatch, {5: 0.90, 8: 0.80})
        harness = HarnessSettings(convergence_n=[5, 8], convergence_bin=(0.1, 0.4))
        settings = Settings(harness=harness)
        reports = VerificationHarness(PRINCIPAL, settings).run("convergence")
        assert [r.name for r in reports] == ["bin [0.1, 0.4] n=8", "bin [0.1, 0.4] trend"]
        assert not reports[1].passed


class TestKernelRouteLabels:
    """Test kernel route reports name the parameters they ran at."""

    def test_param_label(self):
        """Test real and complex parameter labels."""
        assert param_label(ZParams.create(*KERNEL_REFERENCE)) == "(z=0.4,z'=0.7)"
        assert param_label(PRINCIPAL) == "(z=0.3+0.4j,z'=0.3-0.4j)"

    def test_reference_pair_named_outside_regime(self, monkeypatch):
        """Test parameters outside -1 < Re < 1 report the reference pair in each name."""
        seen = []

        def fake_kernel_m(params, point, quad):
            seen.append(params)
            return EvalResult(0.5 + 0j, 0.0, Method.DIRECT_QUADRATURE)

        grid = [0.3, 0.5]
        monkeypatch.setattr(verify_harness, "kernel_m", fake_kernel_m)
        monkeypatch.setattr(verify_harness, "kernel_conjugation", lambda params, point: 1.0)
        monkeypatch.setattr(verify_harness, "whittaker_kernel", lambda params, point: 0.5)
        monkeypatch.setattr(
            verify_harness, "lifted_kernel_matrix", lambda params, g, workers: np.eye(len(g))
        )
        settings = Settings(harness=HarnessSettings(kernel_grid=grid))
        complementary = ZParams.create(1.2, 1.8)
        reports = VerificationHarness(complementary, settings).run("kernel_routes")

        route_names = [r.name for r in reports[:4]]
        assert route_names[0] == "M=K x=0.3,y=0.3 (z=0.4,z'=0.7)"
        assert all(name.endswith("(z=0.4,z'=0.7)") for name in route_names)
        assert all(p.z == 0.4 and p.zprime == 0.7 for p in seen)
        assert reports[4].name == "K symmetric (z=1.2,z'=1.8)"
        assert reports[5].name == "det K >= 0 (z=1.2,z'=1.8)"

    def test_user_pair_named_inside_regime(self, monkeypatch):
        """Test parameters inside the regime are used and named as given."""
        monkeypatch.setattr(
            verify_harness,
            "kernel_m",
            lambda params, point, quad: EvalResult(0.5 + 0j, 0.0, Method.DIRECT_QUADRATURE),
        )
        monkeypatch.setattr(verify_harness, "kernel_conjugation", lambda params, point: 1.0)
        monkeypatch.setattr(verify_harness, "whittaker_kernel", lambda params, point: 0.5)
        monkeypatch.setattr(
            verify_harness, "lifted_kernel_matrix", lambda params, g, workers: np.eye(len(g))
        )
        settings = Settings(harness=HarnessSettings(kernel_grid=[0.4, 0.6]))
        reports = VerificationHarness(PRINCIPAL, settings).run("kernel_routes")
        assert reports[0].name == "M=K x=0.4,y=0.4 (z=0.3+0.4j,z'=0.3-0.4j)"
        assert reports[0].passed
