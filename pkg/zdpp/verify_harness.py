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
Verification Harness

Runs the cross-checks between independent routes (characters, normalization,
moments, Lauricella routes, kernel routes, lifting, origin asymptotics and
finite-n convergence) and collects one CheckReport per comparison.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import math
import uuid

import numpy as np
from joblib import Parallel, delayed

from .config import Settings
from .correlation import asympt_const_A, controlling_density_check, rho_1
from .errors import RegimeError, SizeGuard, ZdppError
from .lauricella import fb_evaluate
from .lifted_kernel import (
    LIFTED,
    NON_LIFTED,
    asympt_kernel_k,
    asympt_remainder_fit,
    dirichlet_lift_check,
    kernel_conjugation,
    kernel_m,
    lift_transform,
    lifted_kernel_matrix,
    lifted_rho_1_by_lifting,
    pd_lifted_rho,
    pd_rho_n,
    whittaker_kernel,
)
from .monitoring import failed_checks, route_matrix_pass_ratio
from .params import CheckReport, FBParams, KernelPoint, LiftSpec, ZParams
from .partitions_chars import (
    Partition,
    count_structures,
    enumerate_partitions,
    enumerate_structures,
    frobenius,
    mn_character,
    structure_character,
    z_measure_table,
)
from .quadrature import integrate_interval
from .telemetry import EventType, TelemetryCollector, get_telemetry_collector

MAX_FINITE_N = 30
# largest n whose structures are enumerated one by one for the count check
MAX_STRUCTURE_LISTING = 8
# residual / (lambda ln^2 lambda) may vary by at most this factor minus one
LOG_RATIO_SPREAD = 9.0
# kernel integral reference pair for parameters outside its regime
KERNEL_REFERENCE = (0.4, 0.7)

SUITES = (
    "characters",
    "normalization",
    "moments",
    "fb_routes",
    "kernel_routes",
    "lifting",
    "asymptotics",
    "convergence",
)


def _relative(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def _fmt_complex(w: complex) -> str:
    if w.imag == 0:
        return f"{w.real:g}"
    return f"{w.real:g}{w.imag:+g}j"


def param_label(params: ZParams) -> str:
    """Parameter pair as it appears in report names, e.g. "(z=0.4,z'=0.7)"."""
    return f"(z={_fmt_complex(params.z)},z'={_fmt_complex(params.zprime)})"



# Lauricella overlap cases: (name, a, b, c, y, route_a, route_b)
MB, CONT, EULER = "mellin_barnes", "continuation", "euler"
A3, B3 = (0.2, 0.3, 0.4), (0.5, 0.65, 0.55)
FB_ROUTE_CASES: List[Tuple[str, tuple, tuple, complex, tuple, str, str]] = [
    ("m1 series/euler", (0.3,), (0.4,), 1.5, (-0.5,), "series", EULER),
    ("m1 series/mb", (0.3 + 0.2j,), (0.7,), 1.9, (-0.8,), "series", MB),
    ("m1 mb/euler", (0.6,), (0.35,), 1.4, (-1.7,), MB, EULER),
    ("m1 mb/continuation", (0.3,), (0.75,), 1.6, (-3.0,), MB, CONT),
    ("m1 log mb/continuation", (0.3,), (0.3,), 1.7, (-3.0,), MB, CONT),
    ("m1 continuation/euler", (0.45,), (0.8,), 2.1, (-5.0,), CONT, EULER),
    ("m2 series/euler", (0.3, 0.5), (0.4, 0.6), 2.2, (-0.3, -0.6), "series", EULER),
    ("m2 series/mb", (0.3, 0.5), (0.4, 0.6), 2.2, (-0.3, -0.6), "series", MB),
    ("m2 complex series/mb", (0.2 + 0.3j, 0.4), (0.5, 0.3 - 0.3j), 1.8, (-0.7, -0.4), "series", MB),
    ("m2 mb/euler", (0.3, 0.5), (0.4, 0.6), 2.2, (-1.5, -2.0), MB, EULER),
    ("m2 mb/continuation", (0.3, 0.5), (0.45, 0.9), 2.4, (-3.0, -4.0), MB, CONT),
    ("m2 continuation/euler", (0.3, 0.5), (0.45, 0.9), 2.4, (-4.0, -6.0), CONT, EULER),
    ("m2 log mb/continuation", (0.3, 0.4), (0.3, 0.4), 2.1, (-3.0, -5.0), MB, CONT),
    ("m2 mixed log mb/continuation", (0.3, 0.2), (0.3, 0.45), 1.9, (-3.0, -4.0), MB, CONT),
    ("m2 hybrid/mb", (0.3, 0.5), (0.45, 0.9), 2.4, (-0.5, -3.0), "hybrid", MB),
    ("m2 hybrid/euler", (0.3, 0.5), (0.45, 0.9), 2.4, (-0.5, -4.0), "hybrid", EULER),
    ("m3 series/euler", (0.2, 0.3, 0.4), (0.5, 0.5, 0.5), 2.5, (-0.2, -0.4, -0.6), "series", EULER),
    ("m3 continuation/euler", A3, B3, 2.5, (-5.0, -6.0, -8.0), CONT, EULER),
    ("m3 hybrid/euler", A3, B3, 2.5, (-0.4, -4.0, -5.0), "hybrid", EULER),
    ("m2 rho_1 terms mb/continuation", (-0.8, -1.2), (-0.2, -1.8), 0.16, (-4.0, -4.0), MB, CONT),
    ("m2 rho_1 terms series/mb", (-0.8, -1.2), (-0.2, -1.8), 0.16, (-0.6, -0.6), "series", MB),
]


@dataclass
class FiniteNReport:
    """Exact z-measure at size n and its scaled first correlation measure."""

    n: int
    probabilities: Dict[Partition, float]
    points: np.ndarray
    weights: np.ndarray
    total_mass_error: float

    def bin_mass(self, lo: float, hi: float) -> float:
        """Expected number of scaled points in [lo, hi)."""
        mask = (self.points >= lo) & (self.points < hi)
        return float(np.sum(self.weights[mask]))

    def histogram(self, edges: Sequence[float]) -> np.ndarray:
        return np.histogram(self.points, bins=np.asarray(edges), weights=self.weights)[0]


def finite_n_table(params: ZParams, n: int) -> FiniteNReport:
    """
    Probabilities of all partitions of n and the atoms (p_i + 1/2)/n and
    -(q_i + 1/2)/n of their scaled Frobenius coordinates, weighted by P(lambda).
    """
    if not 1 <= n <= MAX_FINITE_N:
        raise SizeGuard(f"n={n} outside 1..{MAX_FINITE_N}", operation="finite_n_table")
    probabilities = z_measure_table(params, n)
    points: List[float] = []
    weights: List[float] = []
    for lam, prob in probabilities.items():
        coords = frobenius(lam)
        for p in coords.p:
            points.append((p + 0.5) / n)
            weights.append(prob)
        for q in coords.q:
            points.append(-(q + 0.5) / n)
            weights.append(prob)
    total = math.fsum(probabilities.values())
    return FiniteNReport(n, probabilities, np.asarray(points), np.asarray(weights), abs(total - 1))


def limit_bin_mass(
    params: ZParams, lo: float, hi: float, settings: Optional[Settings] = None
) -> float:
    """int_lo^hi rho_1(x) dx for a bin on one side of the origin."""
    settings = settings or Settings()
    if lo < 0 < hi:
        raise RegimeError("bins must not contain the origin", operation="convergence_check")
    lo_c, hi_c = max(lo, -1.0), min(hi, 1.0)
    if hi_c <= lo_c:
        return 0.0

    def density(x: np.ndarray) -> np.ndarray:
        return np.asarray([rho_1(params, float(v)).real for v in x])

    value, _ = integrate_interval(density, 0.0, 0.0, settings.quadrature, lo_c, hi_c)
    return float(value.real)


def convergence_check(
    params: ZParams,
    n_list: Sequence[int],
    bins: Sequence[Tuple[float, float]],
    settings: Optional[Settings] = None,
    workers: int = 1,
) -> List[CheckReport]:
    """
    Binned first-correlation mass at each n against the limit integral of rho_1.

    Per bin: one report on the deviation at the largest n and one on the trend
    (each step from one n to the next must not increase the deviation).
    """
    settings = settings or Settings()
    n_list = sorted(n_list)
    tables = [finite_n_table(params, n) for n in n_list]
    limits = Parallel(n_jobs=workers)(
        delayed(limit_bin_mass)(params, lo, hi, settings) for lo, hi in bins
    )
    reports = []
    for (lo, hi), limit in zip(bins, limits):
        deviations = [_relative(t.bin_mass(lo, hi), limit) for t in tables]
        name = f"bin [{lo:g}, {hi:g}]"
        values = [t.bin_mass(lo, hi) for t in tables] + [limit]
        worst_step = max((b - a for a, b in zip(deviations, deviations[1:])), default=0.0)
        reports.append(
            CheckReport(
                "convergence",
                f"{name} n={n_list[-1]}",
                "finite_n",
                "rho_1",
                deviations[-1],
                settings.tolerances.convergence,
                values,
            )
        )
        reports.append(
            CheckReport(
                "convergence",
                f"{name} trend",
                "finite_n",
                "rho_1",
                max(0.0, worst_step),
                0.0,
                deviations,
            )
        )
    return reports


class VerificationHarness:
    """
    Runs verification suites for one parameter pair.

    Every check is recorded as a telemetry event and counted in the metrics;
    reports come back in a fixed order.
    """

    def __init__(
        self,
        params: ZParams,
        settings: Optional[Settings] = None,
        trace_id: Optional[str] = None,
        telemetry: Optional[TelemetryCollector] = None,
        workers: int = 1,
    ):
        self.params = params
        self.settings = settings or Settings()
        self.trace_id = trace_id or str(uuid.uuid4())
        self.telemetry = telemetry or get_telemetry_collector()
        self.workers = workers
        self._suites: Dict[str, Callable[[], List[CheckReport]]] = {
            "characters": self.check_characters,
            "normalization": self.check_normalization,
            "moments": self.check_moments,
            "fb_routes": self.check_fb_routes,
            "kernel_routes": self.check_kernel_routes,
            "lifting": self.check_lifting,
            "asymptotics": self.check_asymptotics,
            "convergence": self.check_convergence,
        }

    @property
    def tolerances(self):
        return self.settings.tolerances

    def run(self, suite: str = "all") -> List[CheckReport]:
        """Run one suite, or all of them in order."""
        names = list(SUITES) if suite == "all" else [suite]
        unknown = [s for s in names if s not in self._suites]
        if unknown:
            raise ValueError(f"unknown suite: {unknown[0]}")

        self.telemetry.info(
            f"Starting verification ({', '.join(names)})",
            trace_id=self.trace_id,
            operation="verify",
            params=self.params.describe(),
        )
        reports: List[CheckReport] = []
        for name in names:
            try:
                suite_reports = self._suites[name]()
            except ZdppError as e:
                self.telemetry.error(
                    f"Suite {name} aborted: {e}",
                    trace_id=self.trace_id,
                    operation=name,
                    error=str(e),
                )
                suite_reports = [CheckReport(name, "aborted", str(e), "", math.inf, 0.0)]
            for report in suite_reports:
                self._record(report)
            reports.extend(suite_reports)

        passed = sum(1 for r in reports if r.passed)
        route_matrix_pass_ratio.set(passed / len(reports) if reports else 1.0)
        self.telemetry.record_metric(
            "checks_passed", passed, unit="checks", suite=suite, total=len(reports)
        )
        self.telemetry.info(
            f"Verification finished: {passed}/{len(reports)} checks passed",
            trace_id=self.trace_id,
            operation="verify",
        )
        return reports

    def _record(self, report: CheckReport) -> None:
        event = EventType.CHECK_PASS if report.passed else EventType.CHECK_FAIL
        if not report.passed:
            failed_checks.labels(check=report.check).inc()
        self.telemetry.record_event(
            event,
            self.trace_id,
            operation=report.check,
            name=report.name,
            deviation=report.deviation,
            tolerance=report.tolerance,
        )

    # Suites

    def check_characters(self) -> List[CheckReport]:
        """Character by structures against Murnaghan-Nakayama, and structure counts."""
        reports = []
        for n in range(1, self.settings.harness.nmax_characters + 1):
            partitions = enumerate_partitions(n)
            mismatches = sum(
                1
                for lam in partitions
                for rho in partitions
                if structure_character(lam, rho.parts) != mn_character(lam, rho.parts)
            )
            reports.append(
                CheckReport(
                    "characters",
                    f"n={n}",
                    "structures",
                    "murnaghan_nakayama",
                    float(mismatches),
                    self.tolerances.characters,
                )
            )
            if n <= MAX_STRUCTURE_LISTING:
                listed = len(enumerate_structures(n))
                counted = count_structures(n)
                reports.append(
                    CheckReport(
                        "characters",
                        f"structure count n={n}",
                        "enumeration",
                        "recurrence",
                        float(abs(listed - counted)),
                        0.0,
                        [listed, counted],
                    )
                )
        return reports

    def check_normalization(self) -> List[CheckReport]:
        """Total mass of the z-measure at each n."""
        reports = []
        for n in range(1, self.settings.harness.n_normalization + 1):
            table = finite_n_table(self.params, n)
            reports.append(
                CheckReport(
                    "normalization",
                    f"n={n}",
                    "z_measure",
                    "one",
                    table.total_mass_error,
                    self.tolerances.normalization,
                )
            )
        return reports

    def check_moments(self) -> List[CheckReport]:
        """Quadrature moments of |x| rho_1 against the exact controlling moments."""
        check = controlling_density_check(
            self.params, self.settings.harness.l_max, self.settings.quadrature
        )
        return [
            CheckReport(
                "moments",
                f"l={row['l']}",
                "quadrature",
                "controlling_moment",
                row["deviation"],
                self.tolerances.moments,
                [row["quadrature"], row["exact"]],
            )
            for row in check.rows
        ]

    def check_fb_routes(self) -> List[CheckReport]:
        """Pairwise agreement of Lauricella routes on their overlap domains."""
        specs = dict(
            series=self.settings.series,
            quad=self.settings.quadrature,
            contour=self.settings.contour,
            telemetry=self.telemetry,
            trace_id=self.trace_id,
        )
        reports = []
        for name, a, b, c, y, route_a, route_b in FB_ROUTE_CASES:
            p = FBParams(a, b, c)
            try:
                first = fb_evaluate(p, y, route=route_a, **specs)
                second = fb_evaluate(p, y, route=route_b, **specs)
                deviation = _relative(first.value, second.value)
                values = [first.value, second.value]
            except ZdppError as e:
                deviation, values = math.inf, [str(e)]
            reports.append(
                CheckReport(
                    "fb_routes",
                    name,
                    route_a,
                    route_b,
                    deviation,
                    self.tolerances.fb_routes,
                    values,
                )
            )
        return reports

    def _kernel_params(self) -> ZParams:
        z, zp = self.params.z, self.params.zprime
        if -1 < z.real < 1 and -1 < zp.real < 1:
            return self.params
        self.telemetry.info(
            "Parameters outside the kernel integral regime; using the reference pair",
            trace_id=self.trace_id,
            operation="kernel_routes",
        )
        return ZParams.create(*KERNEL_REFERENCE)

    def check_kernel_routes(self) -> List[CheckReport]:
        """M = (x/y)^((z-z')/2) K on the grid, symmetry of K and positivity of minors."""
        grid = self.settings.harness.kernel_grid
        reports = []
        params = self._kernel_params()
        used = param_label(params)
        label = param_label(self.params)
        for x in grid:
            for y in grid:
                point = KernelPoint(x, y)
                m = kernel_m(params, point, self.settings.quadrature).value
                k = kernel_conjugation(params, point) * whittaker_kernel(params, point)
                reports.append(
                    CheckReport(
                        "kernel_routes",
                        f"M=K x={x:g},y={y:g} {used}",
                        "kernel_m",
                        "whittaker_kernel",
                        _relative(m, k),
                        self.tolerances.kernel_routes,
                        [m, k],
                    )
                )

        matrix = lifted_kernel_matrix(self.params, grid, self.workers)
        asymmetry = max(
            _relative(whittaker_kernel(self.params, KernelPoint(x, y)), matrix[i, j])
            for i, x in enumerate(grid)
            for j, y in enumerate(grid)
            if j < i
        )
        reports.append(
            CheckReport(
                "kernel_routes", f"K symmetric {label}", "K(x,y)", "K(y,x)", asymmetry, 1e-12
            )
        )
        worst = 0.0
        for size in (2, 3):
            for start in range(len(grid) - size + 1):
                minor = matrix[start : start + size, start : start + size]
                worst = max(worst, -float(np.linalg.det(minor)))
        reports.append(
            CheckReport("kernel_routes", f"det K >= 0 {label}", "minors", "zero", worst, 1e-8)
        )
        return reports

    def check_lifting(self) -> List[CheckReport]:
        """Gamma mixture of rho_1 against K(x, x), and the Poisson-Dirichlet and Dirichlet cases."""
        quad = self.settings.quadrature
        reports = []
        for x in self.settings.harness.lifting_points:
            lifted = lifted_rho_1_by_lifting(self.params, x, quad).value.real
            diagonal = whittaker_kernel(self.params, KernelPoint(x, x))
            reports.append(
                CheckReport(
                    "lifting",
                    f"x={x:g}",
                    "lift(rho_1)",
                    "K(x,x)",
                    _relative(lifted, diagonal),
                    self.tolerances.lifting,
                    [lifted, diagonal],
                )
            )

        t = self.params.t
        for x in ([0.3], [0.2, 0.5]):
            numeric = lift_transform(
                lambda pt: pd_rho_n(t, pt), LiftSpec(tau=t), x, quad, edge_exponent=t - 1
            ).value.real
            closed = pd_lifted_rho(t, x)
            reports.append(
                CheckReport(
                    "lifting",
                    f"poisson-dirichlet n={len(x)}",
                    "lift(pd_rho_n)",
                    "pd_lifted_rho",
                    _relative(numeric, closed),
                    self.tolerances.lifting_pd,
                    [numeric, closed],
                )
            )

        numeric, closed = dirichlet_lift_check((0.5, -0.5), 0.3, (0.2, 0.3), quad)
        reports.append(
            CheckReport(
                "lifting",
                "dirichlet product",
                "quadrature",
                "closed_form",
                _relative(numeric.value.real, closed),
                self.tolerances.lifting_pd,
                [numeric.value.real, closed],
            )
        )
        return reports

    def check_asymptotics(self) -> List[CheckReport]:
        """Remainder exponents at the origin, lifted and not, and k(1) = A(0)."""
        scales = self.settings.harness.asymptotic_scales
        reports = []
        for route in (LIFTED, NON_LIFTED):
            try:
                fit = asympt_remainder_fit(self.params, route, scales)
                tolerance = (
                    LOG_RATIO_SPREAD if fit.logarithmic else self.tolerances.asymptotics_slope
                )
                reports.append(
                    CheckReport(
                        "asymptotics",
                        f"{route} remainder slope",
                        "fit",
                        "theory",
                        fit.deviation,
                        tolerance,
                        [fit.slope, fit.expected],
                    )
                )
            except ZdppError as e:
                failure = CheckReport(
                    "asymptotics",
                    f"{route} remainder slope",
                    "fit",
                    "theory",
                    math.inf,
                    self.tolerances.asymptotics_slope,
                    [str(e)],
                )
                reports.append(failure)
        k_one = asympt_kernel_k(self.params, 1.0)
        a_zero = asympt_const_A(self.params)
        reports.append(
            CheckReport(
                "asymptotics",
                "k(1) = A(0)",
                "asympt_kernel_k",
                "asympt_const_A",
                abs(k_one - a_zero),
                self.tolerances.k_at_one,
                [k_one, a_zero],
            )
        )
        return reports

    def check_convergence(self) -> List[CheckReport]:
        """Finite-n first-correlation mass against the limit on the configured bin."""
        harness = self.settings.harness
        return convergence_check(
            self.params,
            harness.convergence_n,
            [tuple(harness.convergence_bin)],
            self.settings,
            self.workers,
        )


def route_matrix(
    params: ZParams, settings: Optional[Settings] = None, **kwargs
) -> List[CheckReport]:
    """Every cross-check for one parameter pair."""
    return VerificationHarness(params, settings, **kwargs).run("all")
