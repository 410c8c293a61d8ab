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
Correlation Functions

Non-lifted correlation functions rho_n of the z-measure point process in the
pure-sign octants of [-1, 1]^n:

    rho_n_fb          Lauricella route, n <= 3
    rho_n_integral    direct 2n-fold quadrature (integrable regime only)
    rho_1_closed      the n = 1 formula with three F_B^[2] terms
    rho_1             cached dispatcher used by the checks and the CLI

Negative octants are handled by the reflection
rho_n^(z,z')(x) = rho_n^(-z,-z')(|x|).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Any, Dict, List, Optional, Sequence, Tuple
import cmath
import logging
import math

import numpy as np

from .config import ContourSpec, QuadratureSpec, SeriesSpec
from .errors import DomainError, NoConvergentRoute, RegimeError, SizeGuard, ZdppError
from .lauricella import MAX_FN_ORDER, f_n_detailed, fb_evaluate
from .monitoring import route_fallbacks, track_execution_time
from .params import CorrelationQuery, EvalResult, FBParams, FNArgs, Method, ZParams
from .partitions_chars import controlling_moment
from .quadrature import integrate_simplex, jacobi_rule
from .special_fn import log_gamma, power_weight, rgamma
from .telemetry import EventType, TelemetryCollector, get_telemetry_collector

logger = logging.getLogger(__name__)

MAX_INTEGRAL_ORDER = 3
MAX_MOMENT_L = 6
# dyadic pieces [2^-(k+1), 2^-k] of (0, 1/2] used by the moment quadrature
MOMENT_DYADIC_DEPTH = 40


def _imaginary_residue_ok(value: complex, abs_err: float) -> bool:
    return abs(value.imag) <= max(1e-10, 1e-8 * abs(value.real), 10 * abs_err)


def _realify(result: EvalResult, operation: str) -> EvalResult:
    if not _imaginary_residue_ok(result.value, result.abs_err):
        raise NoConvergentRoute(
            f"imaginary residue {result.value.imag:.3e} on real value {result.value.real:.3e}",
            operation=operation,
        )
    return EvalResult(complex(result.value.real), result.abs_err, result.method, result.detail)


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def _reflect(q: CorrelationQuery) -> Tuple[ZParams, Tuple[float, ...]]:
    if q.positive:
        return q.params, q.x
    return q.params.negated(), tuple(abs(v) for v in q.x)


# Lauricella route


def rho_n_fb_pair(
    params: ZParams,
    xprime: Sequence[float],
    xdoubleprime: Sequence[float],
    coincident: str = "exact",
    **kwargs,
) -> EvalResult:
    """
    The 2n-variable extension R_n(x', x'') in the positive octant; rho_n is its
    restriction to x' = x''.

    With h = (|x'| + |x''|)/2 and y_i = -(1 - h)/x_i:
    R_n = Gamma(t) prod phi_{z-1}(x'_i) phi_{z'-1}(x''_i) phi_{c-1}(1 - h)
          sum_sigma sgn(sigma) f_n(y'; y''_sigma).
    """
    n = len(xprime)
    if n != len(xdoubleprime) or n == 0:
        raise DomainError("x' and x'' must be nonempty and of equal length", operation="rho_n_fb")
    if n > MAX_FN_ORDER:
        raise SizeGuard(f"n={n} exceeds {MAX_FN_ORDER}", operation="rho_n_fb")
    if min(xprime) <= 0 or min(xdoubleprime) <= 0:
        raise DomainError("pair form is defined on the positive octant", operation="rho_n_fb")
    h = (sum(xprime) + sum(xdoubleprime)) / 2
    if h >= 1:
        return EvalResult(0j, 0.0, Method.CLOSED_FORM, "outside support")

    z, zp, t = params.z, params.zprime, params.t
    c = t - n * (z + zp - 1)
    prefactor = cmath.exp(log_gamma(t)) * complex(power_weight(c - 1, 1 - h))
    for u, v in zip(xprime, xdoubleprime):
        prefactor *= complex(power_weight(z - 1, u)) * complex(power_weight(zp - 1, v))

    y1 = tuple(-(1 - h) / u for u in xprime)
    y2 = tuple(-(1 - h) / v for v in xdoubleprime)
    total = 0j
    err = 0.0
    methods = set()
    for perm in permutations(range(n)):
        args = FNArgs(params, y1, tuple(y2[j] for j in perm))
        value, e, results = f_n_detailed(args, coincident=coincident, **kwargs)
        total += _permutation_sign(perm) * value
        err += e
        methods.update(r.detail or r.method.value for r in results)
    return EvalResult(
        total * prefactor,
        err * abs(prefactor),
        Method.MELLIN_BARNES_CONTINUATION,
        "+".join(sorted(methods)),
    )


@track_execution_time("rho_n_fb")
def rho_n_fb(q: CorrelationQuery, **kwargs) -> EvalResult:
    """rho_n in one octant by the Lauricella route; zero outside sum |x_i| < 1."""
    params, x = _reflect(q)
    if sum(x) >= 1:
        return EvalResult(0j, 0.0, Method.CLOSED_FORM, "outside support")
    return _realify(rho_n_fb_pair(params, x, x, **kwargs), "rho_n_fb")


# Direct quadrature


@track_execution_time("rho_n_integral")
def rho_n_integral(q: CorrelationQuery, quad: Optional[QuadratureSpec] = None) -> EvalResult:
    """
    t^n Gamma(t) int prod phi_{-z}(a_i) phi_{z'}(a_i+1) phi_{-z'}(b_i) phi_z(b_i+1)
        det(1/(a_i + b_j + 1)) phi_{t-n-1}(1 - sum x_i (a_i + b_i + 1)) da db.

    The region is mapped to the 2n-simplex by a_i = R u_i/x_i, b_i = R v_i/x_i
    with R = 1 - sum x. Integrable for -1 < Re z, Re z' < 0 and t > n + 1.
    """
    params, x = _reflect(q)
    n = len(x)
    if n > MAX_INTEGRAL_ORDER:
        raise SizeGuard(f"n={n} exceeds {MAX_INTEGRAL_ORDER}", operation="rho_n_integral")
    z, zp, t = params.z, params.zprime, params.t
    if not (-1 < z.real < 0 and -1 < zp.real < 0 and t > n + 1):
        raise RegimeError(
            f"direct integral needs -1 < Re z, Re z' < 0 and t > {n + 1}; "
            f"got z={z}, z'={zp}, t={t:.4g}",
            operation="rho_n_integral",
        )
    remainder = 1 - sum(x)
    if remainder <= 0:
        return EvalResult(0j, 0.0, Method.DIRECT_QUADRATURE, "outside support")

    scale = np.asarray([remainder / xi for xi in x])

    def integrand(u: np.ndarray, rest: np.ndarray) -> np.ndarray:
        a = u[:, :n] * scale[None, :]
        b = u[:, n:] * scale[None, :]
        weights = np.prod((a + 1) ** zp * (b + 1) ** z, axis=1)
        matrix = 1.0 / (a[:, :, None] + b[:, None, :] + 1.0)
        return weights * np.linalg.det(matrix)

    value, err = integrate_simplex(integrand, [-z] * n + [-zp] * n, t - n - 1, quad)
    norm = t**n * cmath.exp(log_gamma(t)) * rgamma(t - n)
    norm *= (rgamma(1 - z) * rgamma(1 - zp) * rgamma(1 + z) * rgamma(1 + zp)) ** n
    norm *= remainder ** (t - n - 1)
    for s in scale:
        norm *= s ** (2 - z - zp)
    return _realify(
        EvalResult(value * norm, err * abs(norm), Method.DIRECT_QUADRATURE), "rho_n_integral"
    )


# n = 1


def rho_1_closed(
    params: ZParams,
    x: float,
    series: Optional[SeriesSpec] = None,
    quad: Optional[QuadratureSpec] = None,
    contour: Optional[ContourSpec] = None,
    telemetry: Optional[TelemetryCollector] = None,
    trace_id: str = "zdpp",
) -> EvalResult:
    """
    rho_1(x) = Gamma(t)/(Gamma(z)Gamma(z')) x^(z+z'-2) phi_{c-1}(1-x)
               [F(a, b; c | y) + y (F(a', b'; c+1 | y) - zz'/c F(a'', b''; c+1 | y))]

    with y = (1 - 1/x, 1 - 1/x), c = (1-z)(1-z'),
    a = (1-z', -z), b = (1-z, -z'), a' = (2-z', -z), b' = (2-z, -z'),
    a'' = (1-z', 1-z), b'' = (1-z, 1-z'). For x < 0 use |x| and (-z, -z').
    """
    if x == 0 or abs(x) >= 1:
        raise DomainError(f"need 0 < |x| < 1, got {x}", operation="rho_1_closed")
    if x < 0:
        params, x = params.negated(), -x
    z, zp, t = params.z, params.zprime, params.t
    c = (1 - z) * (1 - zp)
    y = 1 - 1 / x
    args = [y, y]
    route = dict(series=series, quad=quad, contour=contour, telemetry=telemetry, trace_id=trace_id)

    base = fb_evaluate(FBParams((1 - zp, -z), (1 - z, -zp), c), args, **route)
    up = fb_evaluate(FBParams((2 - zp, -z), (2 - z, -zp), c + 1), args, **route)
    mixed = fb_evaluate(FBParams((1 - zp, 1 - z), (1 - z, 1 - zp), c + 1), args, **route)
    ratio = z * zp / c
    bracket = base.value + y * (up.value - ratio * mixed.value)
    bracket_err = base.abs_err + abs(y) * (up.abs_err + abs(ratio) * mixed.abs_err)

    prefactor = (
        cmath.exp(log_gamma(t))
        * rgamma(z)
        * rgamma(zp)
        * x ** (z + zp - 2)
        * complex(power_weight(c - 1, 1 - x))
    )
    result = EvalResult(
        bracket * prefactor,
        bracket_err * abs(prefactor),
        Method.CLOSED_FORM,
        "+".join(sorted({base.detail or base.method.value, up.detail or up.method.value})),
    )
    return _realify(result, "rho_1_closed")


def _rho_1_uncached(
    params: ZParams, x: float, telemetry: Optional[TelemetryCollector], **specs
) -> EvalResult:
    try:
        return rho_1_closed(params, x, telemetry=telemetry, **specs)
    except ZdppError as e:
        route_fallbacks.labels(operation="rho_1", from_route="closed", to_route="lauricella").inc()
        (telemetry or get_telemetry_collector()).record_event(
            EventType.ROUTE_FALLBACK,
            "zdpp",
            operation="rho_1",
            from_route="closed",
            to_route="lauricella",
            reason=str(e),
        )
        return rho_n_fb(CorrelationQuery(params, (x,)), coincident="extrapolate", **specs)


@lru_cache(maxsize=1 << 16)
def _rho_1_default(params: ZParams, x: float) -> EvalResult:
    return _rho_1_uncached(params, x, None)


def rho_1(
    params: ZParams,
    x: float,
    series: Optional[SeriesSpec] = None,
    quad: Optional[QuadratureSpec] = None,
    contour: Optional[ContourSpec] = None,
    telemetry: Optional[TelemetryCollector] = None,
) -> EvalResult:
    """rho_1 anywhere on [-1, 1] \\ {0}: closed form, falling back to the Lauricella route."""
    x = float(x)
    if x == 0:
        raise DomainError("rho_1 is not defined at the origin", operation="rho_1")
    if abs(x) >= 1:
        return EvalResult(0j, 0.0, Method.CLOSED_FORM, "outside support")
    if series is None and quad is None and contour is None and telemetry is None:
        return _rho_1_default(params, x)
    return _rho_1_uncached(params, x, telemetry, series=series, quad=quad, contour=contour)


def asympt_const_A(params: ZParams) -> float:
    """
    A(0) = (z - z') sin(pi z) sin(pi z') / (pi sin(pi (z - z'))),
    the coefficient of 1/x in rho_1 at the origin; sin^2(pi z)/pi^2 when z = z'.
    """
    z, zp = params.z, params.zprime
    diff = z - zp
    sines = cmath.sin(math.pi * z) * cmath.sin(math.pi * zp)
    if abs(diff) < 1e-12:
        value = sines / math.pi**2
    else:
        value = diff * sines / (math.pi * cmath.sin(math.pi * diff))
    return float(value.real)


# First-moment identity


@dataclass
class MomentCheck:
    """Quadrature moments of |x| rho_1 against the exact controlling moments."""

    params: ZParams
    rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((row["deviation"] for row in self.rows), default=0.0)

    def to_rows(self) -> List[Dict[str, Any]]:
        return [dict(row) for row in self.rows]


def _octant_rule(c: complex, nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Nodes and weights on (0, 1) for integrands x^(l+1) rho_1(x).

    Dyadic Gauss-Legendre pieces cover (0, 1/2]; [1/2, 1) uses Gauss-Jacobi with
    the (1-x)^(c-1) edge factor, returned separately so callers divide it out.
    """
    s, w = jacobi_rule(0.0, 0.0, nodes)
    xs, ws = [], []
    for k in range(1, MOMENT_DYADIC_DEPTH + 1):
        lo, hi = 2.0 ** -(k + 1), 2.0**-k
        xs.append(lo + (hi - lo) * s)
        ws.append((hi - lo) * w)
    beta = float(c.real) - 1
    sj, wj = jacobi_rule(0.0, beta, nodes)
    edge_x = 0.5 + 0.5 * sj
    edge_w = wj * 0.5 ** (1 + beta)
    x = np.concatenate(xs + [edge_x])
    weights = np.concatenate(ws + [edge_w])
    # 1 marks plain nodes, otherwise the weight factor to divide out
    edge = np.concatenate([np.ones(sum(len(v) for v in xs)), (1 - edge_x) ** beta])
    return x, weights, edge


def _octant_moments(params: ZParams, l_max: int, nodes: int) -> np.ndarray:
    c = (1 - params.z) * (1 - params.zprime)
    if abs(c.imag) > 1e-12:
        raise DomainError("edge exponent must be real", operation="controlling_density_check")
    x, w, edge = _octant_rule(c, nodes)
    rho = np.asarray([rho_1(params, float(v)).real for v in x])
    base = w * rho / edge
    return np.asarray([float(np.sum(base * x ** (l + 1))) for l in range(l_max + 1)])


@track_execution_time("controlling_density_check")
def controlling_density_check(
    params: ZParams, l_max: int, quad: Optional[QuadratureSpec] = None
) -> MomentCheck:
    """
    Compare int_{-1}^{1} |x| x^l rho_1(x) dx (both octants by quadrature) with
    the exact controlling moment for l = 0..l_max.
    """
    if not 0 <= l_max <= MAX_MOMENT_L:
        raise SizeGuard(
            f"l_max={l_max} outside 0..{MAX_MOMENT_L}", operation="controlling_density_check"
        )
    quad = quad or QuadratureSpec()
    mirror = params.negated()
    low, high = max(4, quad.base_nodes // 2), quad.base_nodes
    coarse = _octant_moments(params, l_max, low) + _signed(_octant_moments(mirror, l_max, low))
    fine = _octant_moments(params, l_max, high) + _signed(_octant_moments(mirror, l_max, high))

    report = MomentCheck(params)
    for l in range(l_max + 1):
        exact = controlling_moment(params, [l])
        deviation = abs(fine[l] - exact) / max(abs(exact), 1e-300)
        report.rows.append(
            {
                "l": l,
                "quadrature": float(fine[l]),
                "exact": float(exact),
                "quad_err": float(abs(fine[l] - coarse[l])),
                "deviation": float(deviation),
            }
        )
        logger.debug("moment l=%d: quadrature %.17g exact %.17g", l, fine[l], exact)
    return report


def _signed(moments: np.ndarray) -> np.ndarray:
    return moments * np.asarray([(-1) ** l for l in range(len(moments))])
