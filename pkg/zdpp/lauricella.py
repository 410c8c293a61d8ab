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
Lauricella F_B Engine

F_B(a, b; c | y) = sum_k prod_i (a_i)_{k_i} (b_i)_{k_i} y_i^{k_i} / k_i! / (c)_{|k|}

Routes:
    series          the defining multiple series, summed by total degree (|y_i| < 1)
    euler           Euler-type integral over the simplex (y < 0, Re b_i > 0, Re(c - sum b) > 0)
    mellin_barnes   m-fold Barnes contour integral (y < 0, m <= 2)
    continuation    residue expansion at large negative y, with logarithmic
                    branches wherever a_i = b_i
    hybrid          series in the small coordinates, continuation in the large ones

fb_evaluate() picks a route, falling back to the next one on failure.
"""

from functools import lru_cache
from itertools import combinations, product
from typing import Callable, List, Optional, Sequence, Tuple
import cmath
import logging
import math

import mpmath
import numpy as np
from scipy import special as sc

from .config import ContourSpec, QuadratureSpec, SeriesSpec
from .errors import (
    DegenerateDifference,
    DomainError,
    NoConvergentRoute,
    OutsidePolydisc,
    ParameterPole,
    PoleOnContour,
    PreconditionViolated,
    SizeGuard,
    ZdppError,
)
from .monitoring import route_fallbacks, track_execution_time
from .params import EvalResult, FBParams, FNArgs, Method
from .quadrature import integrate_simplex
from .special_fn import is_integer, is_nonpositive_integer, log_gamma, rgamma
from .telemetry import EventType, TelemetryCollector, get_telemetry_collector

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps

SERIES_RADIUS = 0.95
CONTINUATION_MIN_ABS = 2.0
# auto dispatch uses the continuation only when sum 1/|y_i| is at most this
CONTINUATION_RATIO = 0.75
MAX_EULER_DIM = 3
MAX_CONTOUR_DIM = 2
MAX_FN_ORDER = 3
COINCIDENT_DELTA = 1e-4
_LOG_BRANCH_TOL = 1e-12

ROUTES = ("series", "continuation", "mellin_barnes", "hybrid", "euler")


def _as_real_negative(y: Sequence[complex], operation: str) -> np.ndarray:
    arr = np.asarray([complex(v) for v in y])
    if np.any(arr.imag != 0):
        raise DomainError("arguments must be real", operation=operation)
    real = arr.real
    if np.any(real >= 0):
        raise DomainError("arguments must be strictly negative", operation=operation)
    return real


def _check_length(p: FBParams, y: Sequence, operation: str) -> None:
    if len(y) != p.m:
        raise DomainError(f"expected {p.m} arguments, got {len(y)}", operation=operation)


def _gamma(x: complex, operation: str) -> complex:
    if is_nonpositive_integer(x):
        raise ParameterPole(f"Gamma({x}) is a pole", operation=operation)
    return cmath.exp(log_gamma(x))


# Degree-by-degree convolutions


@lru_cache(maxsize=8)
def _binomial_matrix(size: int) -> np.ndarray:
    n = np.arange(size)[:, None]
    k = np.arange(size)[None, :]
    with np.errstate(invalid="ignore"):
        mat = np.where(k <= n, sc.binom(n, k), 0.0)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=8)
def _shift_index(size: int) -> Tuple[np.ndarray, np.ndarray]:
    n = np.arange(size)[:, None]
    k = np.arange(size)[None, :]
    idx = n - k
    mask = idx >= 0
    idx = np.where(mask, idx, 0)
    idx.setflags(write=False)
    mask.setflags(write=False)
    return idx, mask


def _convolve(h: np.ndarray, g: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """out[N] = sum_k coef[N, k] h[N - k] g[k]."""
    idx, mask = _shift_index(h.shape[0])
    shifted = np.where(mask, h[idx], 0.0)
    return np.sum(shifted * coef * g[None, :], axis=1)


def _binomial_convolve(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    return _convolve(h, g, _binomial_matrix(h.shape[0]))


def _inverse_binomial_convolve(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    binom = _binomial_matrix(h.shape[0])
    with np.errstate(divide="ignore"):
        inv = np.where(binom > 0, 1.0 / np.where(binom > 0, binom, 1.0), 0.0)
    return _convolve(h, g, inv)


def _ratio_sequence(first: complex, ratios: np.ndarray) -> np.ndarray:
    seq = np.empty(ratios.shape[0] + 1, dtype=complex)
    seq[0] = first
    seq[1:] = first * np.cumprod(ratios)
    return seq


def _tail_converged(terms: np.ndarray, total: complex, spec: SeriesSpec) -> bool:
    tail = np.abs(terms[-spec.consecutive :])
    return bool(np.all(tail <= spec.rel_tol * max(abs(total), 1e-300)))


# Series


def _degree_terms(a, b, c: complex, y: np.ndarray, size: int) -> np.ndarray:
    """
    Terms T_N = N!/(c)_N * sum_{|k|=N} prod (a_i)_k (b_i)_k y_i^k / (k_i!)^2 / multinomial.

    Their sum over N is F_B; every factor stays bounded for |y_i| < 1.
    """
    k = np.arange(size - 1)
    h = None
    for ai, bi, yi in zip(a, b, y):
        g = _ratio_sequence(1.0, (ai + k) * (bi + k) * yi / (k + 1.0) ** 2)
        h = g if h is None else _inverse_binomial_convolve(h, g)
    if np.any(np.abs(c + k) == 0):
        raise ParameterPole(f"c={c} is a nonpositive integer", operation="fb_series")
    weights = _ratio_sequence(1.0, (k + 1.0) / (c + k))
    return weights * h


@track_execution_time("fb_series")
def fb_series(p: FBParams, y: Sequence[complex], spec: Optional[SeriesSpec] = None) -> EvalResult:
    """F_B by its defining series inside the polydisc max |y_i| <= 0.95."""
    spec = spec or SeriesSpec()
    _check_length(p, y, "fb_series")
    y_arr = np.asarray([complex(v) for v in y])
    if np.max(np.abs(y_arr)) > SERIES_RADIUS:
        raise OutsidePolydisc(
            f"max |y| = {np.max(np.abs(y_arr)):.4g} > {SERIES_RADIUS}", operation="fb_series"
        )
    if is_nonpositive_integer(p.c):
        raise ParameterPole(f"c={p.c} is a nonpositive integer", operation="fb_series")
    if np.all(y_arr == 0):
        return EvalResult(1 + 0j, 0.0, Method.SERIES)

    size = 64
    while True:
        terms = _degree_terms(p.a, p.b, p.c, y_arr, size)
        total = complex(np.sum(terms))
        if _tail_converged(terms, total, spec):
            err = float(np.sum(np.abs(terms[-spec.consecutive :]))) + 4 * _EPS * float(
                np.sum(np.abs(terms))
            )
            return EvalResult(total, err, Method.SERIES)
        if size >= spec.max_degree:
            raise NoConvergentRoute(
                f"series not converged at total degree {size}", operation="fb_series"
            )
        logger.debug("fb_series: raising degree cap %d -> %d", size, 2 * size)
        size = min(2 * size, spec.max_degree)


# Euler integral


@track_execution_time("fb_euler_integral")
def fb_euler_integral(
    p: FBParams, y: Sequence[float], quad: Optional[QuadratureSpec] = None
) -> EvalResult:
    """
    Gamma(c) int prod phi_{b_i-1}(u_i) (1 - u_i y_i)^(-a_i) phi_{c-sum b-1}(1 - sum u) du
    over the simplex.
    """
    _check_length(p, y, "fb_euler_integral")
    if p.m > MAX_EULER_DIM:
        raise SizeGuard(f"m={p.m} exceeds {MAX_EULER_DIM}", operation="fb_euler_integral")
    y_arr = _as_real_negative(y, "fb_euler_integral")
    rest = p.c - sum(p.b)
    if any(bi.real <= 0 for bi in p.b) or rest.real <= 0:
        raise PreconditionViolated(
            "need Re b_i > 0 and Re(c - sum b) > 0", operation="fb_euler_integral"
        )
    a = np.asarray(p.a)

    def integrand(u: np.ndarray, remainder: np.ndarray) -> np.ndarray:
        return np.prod((1.0 - u * y_arr[None, :]) ** (-a[None, :]), axis=1)

    value, err = integrate_simplex(integrand, [bi - 1 for bi in p.b], rest - 1, quad)
    norm = _gamma(p.c, "fb_euler_integral") * rgamma(rest)
    for bi in p.b:
        norm *= rgamma(bi)
    return EvalResult(value * norm, err * abs(norm), Method.EULER_INTEGRAL)


# Mellin-Barnes contour


def _left_poles(a: complex, b: complex, right_of: float) -> List[complex]:
    poles = []
    for e in (a, b):
        k = 0
        while (-e - k).real > right_of:
            poles.append(-e - k)
            k += 1
    return poles


def _choose_sigma(poles: List[complex], half_width: float) -> float:
    near = [q.real for q in poles if abs(q.imag) <= half_width + 1] + [0.0]
    candidates = np.linspace(-0.95, -0.05, 91)
    scores = [min(abs(r - s) for r in near) for s in candidates]
    return float(candidates[int(np.argmax(scores))])


def _circle_rules(
    misplaced: List[Tuple[complex, float]],
    singularities: List[complex],
    nodes: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of small circles around poles on the wrong side of the line."""
    points: List[complex] = []
    weights: List[complex] = []
    remaining = sorted(misplaced, key=lambda pw: (pw[0].real, pw[0].imag))
    clusters: List[List[Tuple[complex, float]]] = []
    for pole in remaining:
        for cluster in clusters:
            if any(abs(pole[0] - other[0]) < 0.05 for other in cluster):
                cluster.append(pole)
                break
        else:
            clusters.append([pole])

    theta = 2 * np.pi * np.arange(nodes) / nodes
    for cluster in clusters:
        centers = [q for q, _ in cluster]
        center = complex(np.mean(centers))
        spread = max(abs(q - center) for q in centers)
        others = [
            abs(q - center) for q in singularities if all(abs(q - c) > 1e-12 for c in centers)
        ]
        reach = min(others) if others else 1.0
        if reach <= spread:
            raise PoleOnContour("poles too close to separate", operation="fb_mellin_barnes")
        radius = min(0.5, (spread + reach) / 2)
        sign = cluster[0][1]
        ring = radius * np.exp(1j * theta)
        points.extend(center + ring)
        weights.extend(sign * ring / nodes)
    return np.asarray(points, dtype=complex), np.asarray(weights, dtype=complex)


class _ContourAxis:
    """One vertical line plus pole circles for a single Barnes variable."""

    def __init__(self, a: complex, b: complex, y: float, sigma: Optional[float], spec: ContourSpec):
        if is_nonpositive_integer(a) or is_nonpositive_integer(b):
            raise PoleOnContour(
                "a_i, b_i must not be nonpositive integers", operation="fb_mellin_barnes"
            )
        self.a, self.b, self.log_y = a, b, math.log(-y)
        spec_half = spec.half_width
        probe = _left_poles(a, b, -4.0)
        if sigma is None:
            sigma = _choose_sigma(probe, spec_half)
        else:
            gaps = [abs(q.real - sigma) for q in probe if abs(q.imag) <= spec_half + 1]
            gaps += [abs(k - sigma) for k in range(0, max(1, int(math.ceil(sigma))) + 2)]
            if min(gaps) < spec.pole_clearance:
                raise PoleOnContour(
                    f"line Re s = {sigma} passes through a pole", "fb_mellin_barnes"
                )
        self.sigma = sigma

        left = _left_poles(a, b, sigma - 3.0)
        right_count = max(0, int(math.ceil(max([q.real for q in left] + [sigma])))) + 3
        right = [complex(k) for k in range(right_count)]
        misplaced = [(q, 1.0) for q in left if q.real > sigma]
        misplaced += [(q, -1.0) for q in right if q.real < sigma]
        self.circle_s, self.circle_w = _circle_rules(misplaced, left + right, spec.circle_nodes)

    def rule(self, step: float, half_width: float) -> Tuple[np.ndarray, np.ndarray]:
        tau = np.arange(-half_width, half_width + step / 2, step)
        s = self.sigma + 1j * tau
        w = np.full(tau.shape, step / (2 * np.pi), dtype=complex)
        return np.concatenate([s, self.circle_s]), np.concatenate([w, self.circle_w])

    def factor(self, s: np.ndarray) -> np.ndarray:
        return np.exp(
            sc.loggamma(self.a + s) + sc.loggamma(self.b + s) + sc.loggamma(-s) + s * self.log_y
        )


@track_execution_time("fb_mellin_barnes")
def fb_mellin_barnes(
    p: FBParams, y: Sequence[float], contour: Optional[ContourSpec] = None
) -> EvalResult:
    """
    Gamma(c)/prod Gamma(a_i)Gamma(b_i) (2 pi i)^-m
        int prod Gamma(a_i+s_i) Gamma(b_i+s_i) Gamma(-s_i) (-y_i)^s_i / Gamma(c + sum s) ds.

    Each path runs up the line Re s_i = sigma_i; left poles -a_i-k, -b_i-k lying to
    its right (and right poles k lying to its left) are picked up by circles.
    """
    contour = contour or ContourSpec()
    _check_length(p, y, "fb_mellin_barnes")
    if p.m > MAX_CONTOUR_DIM:
        raise SizeGuard(f"m={p.m} exceeds {MAX_CONTOUR_DIM}", operation="fb_mellin_barnes")
    y_arr = _as_real_negative(y, "fb_mellin_barnes")
    sigmas = contour.sigma or [None] * p.m
    if len(sigmas) != p.m:
        raise DomainError("one sigma per variable required", operation="fb_mellin_barnes")
    axes = [
        _ContourAxis(ai, bi, yi, si, contour)
        for ai, bi, yi, si in zip(p.a, p.b, y_arr, sigmas)
    ]

    prefactor = _gamma(p.c, "fb_mellin_barnes")
    for ai, bi in zip(p.a, p.b):
        prefactor *= rgamma(ai) * rgamma(bi)

    prev: Optional[complex] = None
    step = contour.step
    for level in range(contour.max_halvings + 1):
        rules = [axis.rule(step, contour.half_width) for axis in axes]
        factors = [axis.factor(s) * w for axis, (s, w) in zip(axes, rules)]
        if p.m == 1:
            cur = complex(np.sum(factors[0] * sc.rgamma(p.c + rules[0][0])))
        else:
            coupling = sc.rgamma(p.c + rules[0][0][:, None] + rules[1][0][None, :])
            cur = complex(factors[0] @ coupling @ factors[1])
        cur *= prefactor
        if prev is not None and abs(cur - prev) <= max(contour.rel_tol * abs(cur), 1e-300):
            return EvalResult(cur, abs(cur - prev), Method.MELLIN_BARNES_CONTINUATION, "contour")
        logger.debug("fb_mellin_barnes level %d step %.4g: %r", level, step, cur)
        prev = cur
        step /= 2
    raise NoConvergentRoute("contour quadrature did not converge", operation="fb_mellin_barnes")


# Continuation at large negative arguments


def _variable_kind(a: complex, b: complex) -> str:
    if abs(a - b) <= _LOG_BRANCH_TOL * max(1.0, abs(a)):
        return "log"
    if is_integer(a - b):
        return "degenerate"
    return "simple"


def _simple_layers(lead: complex, other: complex, y: float, size: int) -> List[np.ndarray]:
    # Gamma(o-e-k) (e)_k / y^k, the residues of the simple poles at s = -e - k
    k = np.arange(size - 1)
    first = cmath.exp(log_gamma(other - lead))
    return [_ratio_sequence(first, (lead + k) / ((other - lead - k - 1) * y))]


def _log_layers(a: complex, y: float, size: int) -> List[np.ndarray]:
    # double poles at s = -a - k: (a)_k/k! / Gamma(a) (-y)^-k times
    # [ln(-y) + 2 psi(k+1) - psi(a+k)] and the derivative of 1/Gamma(c + sum s)
    if is_nonpositive_integer(a):
        raise ParameterPole(f"logarithmic branch needs a={a} off the poles", "fb_continuation_log")
    k = np.arange(size)
    seq = _ratio_sequence(rgamma(a), (a + k[:-1]) / ((k[:-1] + 1.0) * (-y)))
    log_term = math.log(-y) + 2 * sc.psi(k + 1.0) - sc.psi(a + k)
    return [seq * log_term, seq]


def _rgamma_derivatives(argument: complex, size: int, order: int) -> np.ndarray:
    """rows j = 0..order of (d/dx)^j (1/Gamma)(argument - N) / N! for N < size."""
    out = np.zeros((order + 1, size), dtype=complex)
    k = np.arange(size - 1)
    out[0] = _ratio_sequence(rgamma(argument), (argument - k - 1) / (k + 1.0))
    if order:
        for n in range(size):
            x = mpmath.mpc(argument.real - n, argument.imag)
            derivs = list(mpmath.diffs(mpmath.rgamma, x, order))
            fact = mpmath.factorial(n)
            for j in range(1, order + 1):
                out[j, n] = complex(derivs[j] / fact)
    return out


def _combine_layers(h: List[np.ndarray], g: List[np.ndarray]) -> List[np.ndarray]:
    out = [np.zeros_like(h[0]) for _ in range(len(h) + len(g) - 1)]
    for i, hi in enumerate(h):
        for j, gj in enumerate(g):
            out[i + j] = out[i + j] + _binomial_convolve(hi, gj)
    return out


def _continuation_sizes(y: np.ndarray, spec: SeriesSpec) -> List[int]:
    ratio = float(np.sum(1.0 / np.abs(y)))
    if ratio >= 1:
        raise PreconditionViolated(
            f"sum 1/|y_i| = {ratio:.3g} >= 1: expansion diverges", operation="fb_continuation"
        )
    first = int(math.ceil(math.log(spec.rel_tol * 1e-3) / math.log(ratio))) + 16
    size = min(max(first, 32), spec.max_degree)
    sizes = [size]
    while size < spec.max_degree:
        size = min(2 * size, spec.max_degree)
        sizes.append(size)
    return sizes


def fb_continuation_branches(
    p: FBParams,
    y: Sequence[float],
    spec: Optional[SeriesSpec] = None,
    allow_log: bool = True,
) -> List[Tuple[Tuple[str, ...], complex, float]]:
    """
    Branch terms of the large-argument expansion.

    One branch per choice of leading exponent in every coordinate ("a" or "b",
    or "log" when a_i = b_i); each branch is prod (-y_i)^(-lead_i) times a
    function analytic at infinity. Returns (leads, value, error) per branch.
    """
    spec = spec or SeriesSpec()
    _check_length(p, y, "fb_continuation")
    y_arr = _as_real_negative(y, "fb_continuation")
    kinds = [_variable_kind(ai, bi) for ai, bi in zip(p.a, p.b)]
    for i, kind in enumerate(kinds):
        if kind == "degenerate" or (kind == "log" and not allow_log):
            raise DegenerateDifference(
                f"a_{i + 1} - b_{i + 1} = {p.a[i] - p.b[i]} is an integer",
                operation="fb_continuation",
            )
    gamma_c = _gamma(p.c, "fb_continuation")
    options = [("log",) if kind == "log" else ("a", "b") for kind in kinds]

    for size in _continuation_sizes(y_arr, spec):
        branches = []
        converged = True
        for leads in product(*options):
            layers: Optional[List[np.ndarray]] = None
            prefactor = gamma_c
            shift = 0j
            for ai, bi, yi, lead in zip(p.a, p.b, y_arr, leads):
                if lead == "log":
                    var_layers = _log_layers(ai, yi, size)
                    e = ai
                else:
                    e, o = (ai, bi) if lead == "a" else (bi, ai)
                    var_layers = _simple_layers(e, o, yi, size)
                    prefactor *= rgamma(o)
                prefactor *= (-yi) ** (-e)
                shift += e
                layers = var_layers if layers is None else _combine_layers(layers, var_layers)
            derivs = _rgamma_derivatives(p.c - shift, size, len(layers) - 1)
            terms = sum(layer * derivs[j] for j, layer in enumerate(layers)) * prefactor
            total = complex(np.sum(terms))
            if not _tail_converged(terms, total, spec) and abs(total) > 0:
                converged = False
                break
            err = float(np.sum(np.abs(terms[-spec.consecutive :]))) + 8 * _EPS * float(
                np.sum(np.abs(terms))
            )
            branches.append((leads, total, err))
        if converged:
            return branches
        logger.debug("fb_continuation: raising truncation beyond %d", size)
    raise NoConvergentRoute("expansion did not converge", operation="fb_continuation")


def _sum_branches(branches, detail: str) -> EvalResult:
    total = sum((value for _, value, _ in branches), 0j)
    err = sum(e for _, _, e in branches) + 4 * _EPS * sum(abs(v) for _, v, _ in branches)
    return EvalResult(total, err, Method.MELLIN_BARNES_CONTINUATION, detail)


def _check_large(y: np.ndarray, operation: str) -> None:
    if np.any(y > -CONTINUATION_MIN_ABS):
        raise PreconditionViolated(
            f"continuation needs y_i <= -{CONTINUATION_MIN_ABS}", operation=operation
        )


@track_execution_time("fb_continuation")
def fb_continuation(
    p: FBParams, y: Sequence[float], spec: Optional[SeriesSpec] = None
) -> EvalResult:
    """
    The 2^m-branch expansion of F_B for large negative y (a_i - b_i not integers).

    Reciprocal gammas carry every 1/Gamma(c - ...) so poles there give zero terms.
    """
    y_arr = _as_real_negative(y, "fb_continuation")
    _check_large(y_arr, "fb_continuation")
    return _sum_branches(fb_continuation_branches(p, y_arr, spec, allow_log=False), "continuation")


@track_execution_time("fb_continuation_log")
def fb_continuation_log(
    a: Sequence[complex], c: complex, y: Sequence[float], spec: Optional[SeriesSpec] = None
) -> EvalResult:
    """F_B(a, a; c | y) for large negative y, the logarithmic expansion."""
    p = FBParams(tuple(a), tuple(a), c)
    y_arr = _as_real_negative(y, "fb_continuation_log")
    _check_large(y_arr, "fb_continuation_log")
    return _sum_branches(fb_continuation_branches(p, y_arr, spec), "log-continuation")


def _continuation_mixed(p: FBParams, y: np.ndarray, spec: SeriesSpec) -> EvalResult:
    branches = fb_continuation_branches(p, y, spec)
    has_log = any("log" in leads for leads, _, _ in branches)
    return _sum_branches(branches, "log-continuation" if has_log else "continuation")


# Hybrid: series in the small coordinates, continuation in the large ones


@track_execution_time("fb_hybrid")
def fb_hybrid(
    p: FBParams, y: Sequence[float], spec: Optional[SeriesSpec] = None
) -> EvalResult:
    """
    sum over the small coordinates S of their series terms times
    F_B(a_L, b_L; c + |k_S| | y_L) by the continuation.
    """
    spec = spec or SeriesSpec()
    y_arr = _as_real_negative(y, "fb_hybrid")
    small = [i for i in range(p.m) if abs(y_arr[i]) <= SERIES_RADIUS]
    large = [i for i in range(p.m) if y_arr[i] <= -CONTINUATION_MIN_ABS]
    if not small or not large or len(small) + len(large) != p.m:
        raise PreconditionViolated(
            "hybrid needs every |y_i| <= 0.95 or y_i <= -2, with both kinds present",
            operation="fb_hybrid",
        )
    y_small = y_arr[small]
    y_large = y_arr[large]

    size = 64
    while True:
        outer = _degree_terms(
            [p.a[i] for i in small], [p.b[i] for i in small], p.c, y_small, size
        )
        total = 0j
        err = 0.0
        terms = []
        for n, weight in enumerate(outer):
            inner = _continuation_mixed(p.subset(large, p.c + n), y_large, spec)
            term = weight * inner.value
            terms.append(term)
            total += term
            err += abs(weight) * inner.abs_err
            tail = terms[-spec.consecutive :]
            if len(tail) == spec.consecutive and all(
                abs(t) <= spec.rel_tol * abs(total) for t in tail
            ):
                err += sum(abs(t) for t in tail)
                return EvalResult(total, err, Method.MELLIN_BARNES_CONTINUATION, "hybrid")
        if size >= spec.max_degree:
            raise NoConvergentRoute("hybrid outer series did not converge", operation="fb_hybrid")
        size = min(2 * size, spec.max_degree)


# Dispatcher


def _route_plan(p: FBParams, y: np.ndarray) -> List[str]:
    if np.max(np.abs(y)) <= SERIES_RADIUS:
        return ["series"]
    if np.any(y.imag != 0) or np.any(y.real >= 0):
        return []
    real = y.real
    plan = []
    if np.all(real <= -CONTINUATION_MIN_ABS) and np.sum(1.0 / np.abs(real)) <= CONTINUATION_RATIO:
        plan.append("continuation")
    if p.m <= MAX_CONTOUR_DIM:
        plan.append("mellin_barnes")
    small = np.abs(real) <= SERIES_RADIUS
    large = real <= -CONTINUATION_MIN_ABS
    if (
        np.any(small)
        and np.any(large)
        and np.all(small | large)
        and np.sum(1.0 / np.abs(real[large])) <= CONTINUATION_RATIO
    ):
        plan.append("hybrid")
    if p.m <= MAX_EULER_DIM:
        plan.append("euler")
    return plan


def _run_route(
    route: str,
    p: FBParams,
    y: np.ndarray,
    series: SeriesSpec,
    quad: QuadratureSpec,
    contour: ContourSpec,
) -> EvalResult:
    if route == "series":
        return fb_series(p, y, series)
    real = y.real
    if route == "continuation":
        return _continuation_mixed(p, real, series)
    if route == "mellin_barnes":
        return fb_mellin_barnes(p, real, contour)
    if route == "hybrid":
        return fb_hybrid(p, real, series)
    if route == "euler":
        return fb_euler_integral(p, real, quad)
    raise DomainError(f"unknown route {route!r}", operation="fb_evaluate")


def fb_evaluate(
    p: FBParams,
    y: Sequence[complex],
    route: str = "auto",
    series: Optional[SeriesSpec] = None,
    quad: Optional[QuadratureSpec] = None,
    contour: Optional[ContourSpec] = None,
    telemetry: Optional[TelemetryCollector] = None,
    trace_id: str = "zdpp",
) -> EvalResult:
    """
    Evaluate F_B by the first route that succeeds.

    Auto order: series (max |y| <= 0.95); continuation (all y <= -2 and
    sum 1/|y| <= 0.75); Mellin-Barnes (m <= 2); hybrid; Euler integral (m <= 3).
    """
    series = series or SeriesSpec()
    quad = quad or QuadratureSpec()
    contour = contour or ContourSpec()
    _check_length(p, y, "fb_evaluate")
    y_arr = np.asarray([complex(v) for v in y])

    if route != "auto":
        return _run_route(route, p, y_arr, series, quad, contour)

    plan = _route_plan(p, y_arr)
    failures = []
    for i, name in enumerate(plan):
        try:
            result = _run_route(name, p, y_arr, series, quad, contour)
        except ZdppError as e:
            failures.append(f"{name}: {e}")
            following = plan[i + 1] if i + 1 < len(plan) else "none"
            route_fallbacks.labels(
                operation="fb_evaluate", from_route=name, to_route=following
            ).inc()
            (telemetry or get_telemetry_collector()).record_event(
                EventType.ROUTE_FALLBACK,
                trace_id,
                operation="fb_evaluate",
                from_route=name,
                to_route=following,
                reason=str(e),
            )
            continue
        if failures:
            (telemetry or get_telemetry_collector()).record_event(
                EventType.ROUTE_COMPLETE,
                trace_id,
                operation="fb_evaluate",
                route=name,
                fallbacks=len(failures),
            )
        return result
    detail = f" ({'; '.join(failures)})" if failures else ""
    raise NoConvergentRoute(
        f"no route for m={p.m}, y={list(y_arr)}{detail}",
        operation="fb_evaluate",
    )


def fb_derivative(p: FBParams, y: Sequence[complex], k: int, **kwargs) -> EvalResult:
    """d/dy_k F_B = a_k b_k / c * F_B(a + e_k, b + e_k; c + 1 | y)."""
    if not 0 <= k < p.m:
        raise DomainError(f"coordinate {k} out of range", operation="fb_derivative")
    factor = p.a[k] * p.b[k] / p.c
    return fb_evaluate(p.shifted([k], 1), y, **kwargs).scaled(factor)


# f_n


def fn_parameters(z: complex, zprime: complex, eps: Sequence[int]) -> FBParams:
    """a^eps, b^eps and c = t - n(z + z' - 1) for one sign pattern eps."""
    n = len(eps)
    t = (z * zprime).real
    a = [1 - e - zprime for e in eps] + [e - z for e in eps]
    b = [1 - e - z for e in eps] + [e - zprime for e in eps]
    return FBParams(tuple(a), tuple(b), t - n * (z + zprime - 1))


def _fn_exact(
    args: FNArgs, coincident: List[int], evaluate: Callable[[FBParams, List[float]], EvalResult]
) -> Tuple[complex, float, List[EvalResult]]:
    z, zp = args.params.z, args.params.zprime
    n = args.n
    y1 = list(args.yprime)
    y2 = list(args.ydoubleprime)
    for i in coincident:
        y1[i] = y2[i] = (y1[i] + y2[i]) / 2
    y = y1 + y2
    others = [i for i in range(n) if i not in coincident]
    denom = math.prod(y1[i] - y2[i] for i in others)

    total = 0j
    err = 0.0
    results = []
    for eps in product((0, 1), repeat=n):
        base = fn_parameters(z, zp, eps)
        sign = (-1) ** sum(eps)
        for size in range(len(coincident) + 1):
            for hit in combinations(coincident, size):
                # derivative index set hit acts on F; the rest of the coincident
                # set differentiates the monomial, which needs eps_i = 0
                if any(eps[i] for i in coincident if i not in hit):
                    continue
                monomial = 1.0
                for i in range(n):
                    if i in coincident and i not in hit:
                        continue
                    monomial *= y1[i] if eps[i] == 0 else y2[i]
                coeff = 1 + 0j
                for i in hit:
                    coeff *= base.a[i] * base.b[i]
                params = base
                if hit:
                    coeff /= complex(mpmath.rf(base.c, len(hit)))
                    params = base.shifted(list(hit), len(hit))
                result = evaluate(params, y)
                results.append(result)
                factor = sign * monomial * coeff / denom
                total += factor * result.value
                err += abs(factor) * result.abs_err
    return total, err, results


def f_n_detailed(
    args: FNArgs,
    coincident: str = "exact",
    delta: float = COINCIDENT_DELTA,
    **kwargs,
) -> Tuple[complex, float, List[EvalResult]]:
    """
    f_n with its error estimate and the F_B evaluations behind it.

    Pairs with |y'_i - y''_i| < delta |y'_i| are treated as coincident. The
    "exact" mode differentiates the epsilon-sum analytically at the pair
    midpoint; "extrapolate" evaluates at offsets h and 2h and extrapolates to 0.
    """
    if args.n > MAX_FN_ORDER:
        raise SizeGuard(f"n={args.n} exceeds {MAX_FN_ORDER}", operation="f_n")

    def evaluate(params: FBParams, y: List[float]) -> EvalResult:
        return fb_evaluate(params, y, **kwargs)

    close = [
        i
        for i in range(args.n)
        if abs(args.yprime[i] - args.ydoubleprime[i]) < delta * abs(args.yprime[i])
    ]
    if coincident == "exact" or not close:
        return _fn_exact(args, close, evaluate)
    if coincident != "extrapolate":
        raise DomainError(f"unknown coincident mode {coincident!r}", operation="f_n")

    # f is even in the pair offset, so the error of a symmetric offset is O(h^2)
    values = []
    err = 0.0
    results: List[EvalResult] = []
    for scale in (1, 2):
        y1 = list(args.yprime)
        y2 = list(args.ydoubleprime)
        for i in close:
            mid = (args.yprime[i] + args.ydoubleprime[i]) / 2
            y1[i] = mid * (1 - 10 * scale * delta)
            y2[i] = mid * (1 + 10 * scale * delta)
        shifted = FNArgs(args.params, tuple(y1), tuple(y2))
        value, e, res = _fn_exact(shifted, [], evaluate)
        values.append(value)
        err += e
        results.extend(res)
    value = (4 * values[0] - values[1]) / 3
    return value, err + abs(values[0] - values[1]) / 3, results


def f_n(
    args: FNArgs, coincident: str = "exact", delta: float = COINCIDENT_DELTA, **kwargs
) -> complex:
    """
    f_n(y'; y'') = sum_eps (-1)^|eps| prod y'_i^(1-eps_i) y''_i^eps_i F_B(a^eps, b^eps; c | y)
                   / prod (y'_i - y''_i),
    continued analytically to coincident pairs.
    """
    value, _, _ = f_n_detailed(args, coincident, delta, **kwargs)
    return value
