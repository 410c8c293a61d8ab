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
Quadrature Rules

Endpoint-singular integrals on [0, 1], semi-infinite integrals on (0, inf)
and Dirichlet-weighted integrals over the standard simplex.

Real endpoint exponents use Gauss-Jacobi rules, which integrate
x^a (1-x)^b * polynomial exactly. Complex exponents fall back to tanh-sinh,
whose double-exponential node clustering absorbs x^(i*b) oscillation near the
ends. Every driver refines (more nodes or smaller step) until two successive
estimates agree.
"""

from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.special import expit, log_expit, roots_jacobi

from .config import QuadratureSpec
from .errors import QuadratureFailure
from .monitoring import quadrature_levels

logger = logging.getLogger(__name__)

# Node arrays are evaluated in blocks of at most this many points
_CHUNK = 1 << 18
# exp(-_DECAY_EXPONENT) is treated as zero when truncating DE rules
_DECAY_EXPONENT = 40.0


@lru_cache(maxsize=256)
def jacobi_rule(alpha: float, beta: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Jacobi nodes and weights on [0, 1] for the weight x^alpha (1-x)^beta.

    The returned weights include the weight function, so sum(w * f(x))
    approximates the integral of x^alpha (1-x)^beta f(x).
    """
    t, w = roots_jacobi(n, beta, alpha)
    x = (1.0 + t) / 2.0
    w = w / 2.0 ** (alpha + beta + 1.0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _ts_extent(exponent: float) -> float:
    # |integrand| ~ x^(exponent+1) near the end; stop once that drops below e^-40
    strength = max(exponent + 1.0, 0.05)
    return math.asinh(_DECAY_EXPONENT / (math.pi * strength))


@lru_cache(maxsize=256)
def tanh_sinh_rule(
    alpha: complex, beta: complex, level: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    tanh-sinh nodes on [0, 1] with weights including x^alpha (1-x)^beta.

    Returns (x, 1-x, w); the complement is computed directly so nodes close
    to 1 keep full relative accuracy.
    """
    h = 0.5 / 2**level
    u_lo = -_ts_extent(complex(alpha).real)
    u_hi = _ts_extent(complex(beta).real)
    u = np.arange(math.floor(u_lo / h), math.ceil(u_hi / h) + 1) * h
    v = math.pi * np.sinh(u)
    x = expit(v)
    xc = expit(-v)
    log_x = log_expit(v)
    log_xc = log_expit(-v)
    # dx/du = pi cosh(u) x (1 - x)
    log_w = np.log(h * math.pi * np.cosh(u)) + log_x + log_xc
    w = np.exp(log_w + complex(alpha) * log_x + complex(beta) * log_xc)
    if complex(alpha).imag == 0 and complex(beta).imag == 0:
        w = w.real
    return x, xc, w


@lru_cache(maxsize=64)
def exp_sinh_rule(alpha: float, rate: float, level: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    exp-sinh nodes on (0, inf) for integrands ~ x^alpha at 0 and ~ e^(-rate x) at inf.

    Returns (x, dx/du * h); the caller supplies the full integrand.
    """
    h = 0.5 / 2**level
    u_lo = -_ts_extent(alpha)
    # e^(-rate x) < e^-40 once x > 40/rate; x = exp(pi/2 sinh u)
    x_far = max(_DECAY_EXPONENT / rate, 2.0)
    u_hi = math.asinh(2.0 * math.log(x_far) / math.pi) + 0.5
    u = np.arange(math.floor(u_lo / h), math.ceil(u_hi / h) + 1) * h
    x = np.exp(0.5 * math.pi * np.sinh(u))
    w = h * 0.5 * math.pi * np.cosh(u) * x
    return x, w


def _is_real(v: complex) -> bool:
    return complex(v).imag == 0.0


def _converged(prev: complex, cur: complex, quad: QuadratureSpec) -> bool:
    return abs(cur - prev) <= max(quad.rel_tol * abs(cur), quad.abs_tol)


def interval_rule(
    alpha: complex, beta: complex, level: int, quad: QuadratureSpec
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, 1-x, w) on [0, 1] at a refinement level, picking Jacobi or tanh-sinh."""
    if _is_real(alpha) and _is_real(beta):
        a, b = complex(alpha).real, complex(beta).real
        x, w = jacobi_rule(a, b, quad.base_nodes * 2**level)
        return x, 1.0 - x, w
    return tanh_sinh_rule(complex(alpha), complex(beta), level + 1)


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    alpha: complex = 0.0,
    beta: complex = 0.0,
    quad: Optional[QuadratureSpec] = None,
    lo: float = 0.0,
    hi: float = 1.0,
) -> Tuple[complex, float]:
    """
    Integral of (x-lo)^alpha (hi-x)^beta f(x) over [lo, hi].

    Returns (value, error estimate). Raises QuadratureFailure when the
    refinement budget runs out.
    """
    quad = quad or QuadratureSpec()
    length = hi - lo
    scale = complex(length) ** (1.0 + complex(alpha) + complex(beta))
    prev: Optional[complex] = None
    for level in range(quad.max_doublings + 1):
        x, _, w = interval_rule(alpha, beta, level, quad)
        cur = complex(np.sum(w * f(lo + length * x))) * scale
        if prev is not None and _converged(prev, cur, quad):
            quadrature_levels.labels(rule="interval").observe(level)
            return cur, abs(cur - prev)
        logger.debug("interval quadrature level %d: %r", level, cur)
        prev = cur
    raise QuadratureFailure(
        f"no convergence on [{lo}, {hi}] with exponents ({alpha}, {beta})",
        operation="integrate_interval",
    )


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    alpha: float = 0.0,
    rate: float = 1.0,
    quad: Optional[QuadratureSpec] = None,
) -> Tuple[complex, float]:
    """
    Integral of f over (0, inf) by the exp-sinh rule.

    alpha is the real part of the algebraic exponent at 0 and rate the
    exponential decay at infinity; both only set the truncation range.
    """
    quad = quad or QuadratureSpec()
    prev: Optional[complex] = None
    for level in range(quad.max_doublings + 1):
        x, w = exp_sinh_rule(float(alpha), float(rate), level)
        vals = np.asarray(f(x))
        vals = np.where(np.isfinite(vals), vals, 0.0)
        cur = complex(np.sum(w * vals))
        if prev is not None and _converged(prev, cur, quad):
            quadrature_levels.labels(rule="semi_infinite").observe(level)
            return cur, abs(cur - prev)
        prev = cur
    raise QuadratureFailure(
        "no convergence on (0, inf)", operation="integrate_semi_infinite"
    )


def _stick_exponents(
    alphas: Sequence[complex], alpha0: complex
) -> List[Tuple[complex, complex]]:
    m = len(alphas)
    pairs = []
    for j in range(m):
        tail = sum((complex(a) for a in alphas[j + 1 :]), 0j)
        pairs.append((complex(alphas[j]), (m - 1 - j) + tail + complex(alpha0)))
    return pairs


def _simplex_levels(quad: QuadratureSpec, m: int) -> List[int]:
    # per-axis Gauss-Jacobi node counts; slower growth in high dimension
    base = max(6, quad.base_nodes // max(1, m - 1))
    growth = 1.5 if m >= 3 else 2.0
    return [int(round(base * growth**k)) for k in range(quad.max_doublings + 1)]


def simplex_rule(
    alphas: Sequence[complex], alpha0: complex, level: int, quad: QuadratureSpec
) -> Tuple[List[np.ndarray], List[np.ndarray], List[np.ndarray]]:
    """
    Per-axis stick-breaking rules for the Dirichlet weight on the m-simplex.

    u_1 = s_1, u_j = s_j prod_{i<j}(1 - s_i); the weight
    prod u_i^alpha_i (1 - sum u)^alpha0 du becomes a product of
    s_j^alpha_j (1 - s_j)^(m-j + sum_{i>j} alpha_i + alpha0).
    """
    m = len(alphas)
    counts = _simplex_levels(quad, m)
    xs, xcs, ws = [], [], []
    for a, b in _stick_exponents(alphas, alpha0):
        if _is_real(a) and _is_real(b):
            x, w = jacobi_rule(complex(a).real, complex(b).real, counts[level])
            xs.append(x)
            xcs.append(1.0 - x)
            ws.append(w)
        else:
            x, xc, w = tanh_sinh_rule(complex(a), complex(b), level)
            xs.append(x)
            xcs.append(xc)
            ws.append(w)
    return xs, xcs, ws


def _simplex_points(s: np.ndarray, sc: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # u_j = s_j * prod_{i<j}(1 - s_i), remainder = prod(1 - s_i)
    cum = np.cumprod(sc, axis=1)
    u = s.copy()
    u[:, 1:] *= cum[:, :-1]
    return u, cum[:, -1]


def _tensor(arrays: List[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*arrays, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _outer_weights(ws: List[np.ndarray]) -> np.ndarray:
    weight = ws[0]
    for w in ws[1:]:
        weight = np.multiply.outer(weight, w)
    return weight.ravel()


def _simplex_sum(
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xs: List[np.ndarray],
    xcs: List[np.ndarray],
    ws: List[np.ndarray],
) -> complex:
    if len(xs) <= 2:
        u, remainder = _simplex_points(_tensor(xs), _tensor(xcs))
        return complex(np.sum(_outer_weights(ws) * g(u, remainder)))

    # loop over the first axis so only an (m-1)-dimensional grid is live
    inner_s = _tensor(xs[1:])
    inner_c = _tensor(xcs[1:])
    inner_w = _outer_weights(ws[1:])
    total = 0j
    for s1, c1, w1 in zip(xs[0], xcs[0], ws[0]):
        s = np.column_stack([np.full(inner_s.shape[0], s1), inner_s])
        sc = np.column_stack([np.full(inner_c.shape[0], c1), inner_c])
        for start in range(0, s.shape[0], _CHUNK):
            block = slice(start, start + _CHUNK)
            u, remainder = _simplex_points(s[block], sc[block])
            total += w1 * complex(np.sum(inner_w[block] * g(u, remainder)))
    return total


def integrate_simplex(
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    alphas: Sequence[complex],
    alpha0: complex = 0.0,
    quad: Optional[QuadratureSpec] = None,
) -> Tuple[complex, float]:
    """
    Integral of prod u_i^alpha_i (1 - sum u)^alpha0 g(u) over the m-simplex.

    g receives u with shape (N, m) and the remainder 1 - sum(u) with shape
    (N,), computed without cancellation.
    """
    quad = quad or QuadratureSpec()
    prev: Optional[complex] = None
    for level in range(quad.max_doublings + 1):
        xs, xcs, ws = simplex_rule(alphas, alpha0, level, quad)
        cur = _simplex_sum(g, xs, xcs, ws)
        if prev is not None and _converged(prev, cur, quad):
            quadrature_levels.labels(rule="simplex").observe(level)
            return cur, abs(cur - prev)
        logger.debug("simplex quadrature level %d (m=%d): %r", level, len(alphas), cur)
        prev = cur
    raise QuadratureFailure(
        f"no convergence on the {len(alphas)}-simplex", operation="integrate_simplex"
    )


def integrate_semi_infinite_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    alphas: Tuple[float, float] = (0.0, 0.0),
    rates: Tuple[float, float] = (1.0, 1.0),
    quad: Optional[QuadratureSpec] = None,
) -> Tuple[complex, float]:
    """
    Integral of f(s, t) over (0, inf)^2 by a tensor exp-sinh rule.

    f is called with two broadcastable grids; non-finite samples count as 0.
    """
    quad = quad or QuadratureSpec()
    prev: Optional[complex] = None
    for level in range(quad.max_doublings + 1):
        x1, w1 = exp_sinh_rule(float(alphas[0]), float(rates[0]), level)
        x2, w2 = exp_sinh_rule(float(alphas[1]), float(rates[1]), level)
        vals = np.asarray(f(x1[:, None], x2[None, :]))
        vals = np.where(np.isfinite(vals), vals, 0.0)
        cur = complex(w1 @ vals @ w2)
        if prev is not None and _converged(prev, cur, quad):
            quadrature_levels.labels(rule="semi_infinite_2d").observe(level)
            return cur, abs(cur - prev)
        logger.debug("2-d semi-infinite quadrature level %d: %r", level, cur)
        prev = cur
    raise QuadratureFailure(
        "no convergence on (0, inf)^2", operation="integrate_semi_infinite_2d"
    )
