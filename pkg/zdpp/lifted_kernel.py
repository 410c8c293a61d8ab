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
Lifted Process

The gamma scale mixture of the z-measure process lives on R \\ {0}. In the
positive octant its correlation functions are determinants of the Whittaker
kernel

    K(x, y) = (phi_1(x) phi_2(y) - phi_1(y) phi_2(x)) / ((x - y) Gamma(z) Gamma(z'))

and of its conjugate M(x, y) = (x/y)^((z-z')/2) K(x, y), which also has a
double-integral representation. Near the origin sqrt(xy) K(x, y) tends to a
kernel k(x/y) depending on the ratio only.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple
import cmath
import logging
import math

import numpy as np
from joblib import Parallel, delayed

from .config import QuadratureSpec
from .correlation import asympt_const_A, rho_1
from .errors import DomainError, FitFailure, NoConvergentRoute, RegimeError
from .monitoring import track_execution_time
from .params import EvalResult, KernelPoint, LiftSpec, Method, ZParams
from .quadrature import integrate_semi_infinite, integrate_semi_infinite_2d
from .special_fn import phi_weight, rgamma, whittaker_w, whittaker_w_prime

logger = logging.getLogger(__name__)

DIAGONAL_DELTA = 1e-6
LIFTED = "lifted"
NON_LIFTED = "non_lifted"


def _real(value: complex, operation: str, scale_err: float = 0.0) -> float:
    if abs(value.imag) > max(1e-10, 1e-8 * abs(value.real), 10 * scale_err):
        raise NoConvergentRoute(
            f"imaginary residue {value.imag:.3e} on real value {value.real:.3e}",
            operation=operation,
        )
    return float(value.real)


# Whittaker kernel


def _indices(params: ZParams) -> Tuple[complex, complex, complex]:
    z, zp = params.z, params.zprime
    return (z + zp + 1) / 2, (z + zp - 1) / 2, (z - zp) / 2


def _phi(kappa: complex, mu: complex, x: float, route: str) -> complex:
    return whittaker_w(kappa, mu, x, route=route).value / math.sqrt(x)


def _phi_prime(kappa: complex, mu: complex, x: float, route: str) -> complex:
    w = whittaker_w(kappa, mu, x, route=route).value
    return whittaker_w_prime(kappa, mu, x, route=route) / math.sqrt(x) - 0.5 * w * x**-1.5


def whittaker_kernel(
    params: ZParams, p: KernelPoint, delta: float = DIAGONAL_DELTA, route: str = "auto"
) -> float:
    """
    K(x, y) with phi_1 = x^(-1/2) W_{(z+z'+1)/2, (z-z')/2}(x) and
    phi_2 = x^(-1/2) W_{(z+z'-1)/2, (z-z')/2}(x).

    Within |x - y| < delta x the derivative form
    (phi_1' phi_2 - phi_1 phi_2') / (Gamma(z) Gamma(z')) is used at the midpoint.
    """
    k1, k2, mu = _indices(params)
    norm = rgamma(params.z) * rgamma(params.zprime)
    x, y = p.x, p.y
    if abs(x - y) < delta * x:
        m = (x + y) / 2
        value = (
            _phi_prime(k1, mu, m, route) * _phi(k2, mu, m, route)
            - _phi(k1, mu, m, route) * _phi_prime(k2, mu, m, route)
        ) * norm
    else:
        cross = _phi(k1, mu, x, route) * _phi(k2, mu, y, route) - _phi(k1, mu, y, route) * _phi(
            k2, mu, x, route
        )
        value = cross / (x - y) * norm
    return _real(complex(value), "whittaker_kernel")


@track_execution_time("kernel_m")
def kernel_m(params: ZParams, p: KernelPoint, quad: Optional[QuadratureSpec] = None) -> EvalResult:
    """
    M(x, y) = t int int phi_{-z}(t1) phi_{-z'}(t2) phi_{z'}(t1+1) phi_z(t2+1)
              e^(-x(t1 + 1/2) - y(t2 + 1/2)) / (t1 + t2 + 1) dt1 dt2.

    Complex in general: for principal series M(x, y) carries (x/y)^(i Im z).
    """
    z, zp = params.z, params.zprime
    if not (-1 < z.real < 1 and -1 < zp.real < 1):
        raise RegimeError(
            f"kernel integral needs -1 < Re z, Re z' < 1, got z={z}, z'={zp}", operation="kernel_m"
        )
    x, y = p.x, p.y

    def integrand(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
        return (
            t1 ** (-z)
            * t2 ** (-zp)
            * (t1 + 1) ** zp
            * (t2 + 1) ** z
            * np.exp(-x * (t1 + 0.5) - y * (t2 + 0.5))
            / (t1 + t2 + 1)
        )

    value, err = integrate_semi_infinite_2d(integrand, (-z.real, -zp.real), (x, y), quad)
    norm = params.t * rgamma(1 - z) * rgamma(1 - zp) * rgamma(1 + zp) * rgamma(1 + z)
    return EvalResult(value * norm, err * abs(norm), Method.DIRECT_QUADRATURE)


def kernel_conjugation(params: ZParams, p: KernelPoint) -> complex:
    """(x/y)^((z-z')/2), the factor taking K to M."""
    return complex((p.x / p.y) ** ((params.z - params.zprime) / 2))


def lifted_kernel_matrix(params: ZParams, x: Sequence[float], workers: int = 1) -> np.ndarray:
    """[K(x_i, x_j)], entries computed in parallel and mirrored across the diagonal."""
    n = len(x)
    if n == 0:
        raise DomainError("need at least one point", operation="lifted_kernel_matrix")
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    values = Parallel(n_jobs=workers)(
        delayed(whittaker_kernel)(params, KernelPoint(x[i], x[j])) for i, j in pairs
    )
    matrix = np.empty((n, n))
    for (i, j), v in zip(pairs, values):
        matrix[i, j] = matrix[j, i] = v
    return matrix


def lifted_rho_n(params: ZParams, x: Sequence[float], workers: int = 1) -> float:
    """det[K(x_i, x_j)]; tiny negative values are reported, not raised."""
    if len(set(x)) < len(x):
        return 0.0
    matrix = lifted_kernel_matrix(params, [float(v) for v in x], workers)
    value = float(np.linalg.det(matrix))
    scale = float(np.prod(np.abs(np.diag(matrix))))
    if value < -1e-8 * max(scale, 1e-300):
        logger.warning("negative lifted correlation %.3e at x=%s", value, list(x))
    return value


# Lifting


def lift_transform(
    rho: Callable[[Tuple[float, ...]], float],
    spec: LiftSpec,
    x: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    edge_exponent: float = 0.0,
) -> EvalResult:
    """
    int_0^inf rho(x/s) s^(tau-n-1) e^(-s) / Gamma(tau) ds for rho supported in
    sum |x_i| <= 1.

    The integral starts at s = sum |x_i|; edge_exponent is the algebraic order
    of rho at its support boundary, used only to place the nodes.
    """
    x = tuple(float(v) for v in x)
    n = len(x)
    if n == 0:
        raise DomainError("need at least one point", operation="lift_transform")
    start = sum(abs(v) for v in x)
    tau = spec.tau

    def integrand(sigma: np.ndarray) -> np.ndarray:
        s = start + sigma
        values = np.asarray([rho(tuple(v / si for v in x)) for si in s], dtype=complex)
        return values * s ** (tau - n - 1) * np.exp(-sigma)

    value, err = integrate_semi_infinite(integrand, edge_exponent, 1.0, quad)
    norm = math.exp(-start) * rgamma(tau)
    return EvalResult(value * norm, err * abs(norm), Method.DIRECT_QUADRATURE)


def lifted_rho_1_by_lifting(
    params: ZParams, x: float, quad: Optional[QuadratureSpec] = None
) -> EvalResult:
    """The gamma mixture of rho_1 at lifting exponent t, to compare with K(x, x)."""
    c = (1 - params.z) * (1 - params.zprime)
    return lift_transform(
        lambda pt: rho_1(params, pt[0]).real,
        LiftSpec(tau=params.t),
        [x],
        quad,
        edge_exponent=float(c.real) - 1,
    )


def pd_rho_n(t: float, x: Sequence[float]) -> float:
    """Poisson-Dirichlet correlation t^n (1 - sum x)_+^(t-1) / prod x."""
    if not t > 0 or min(x) <= 0:
        raise DomainError("need t > 0 and positive points", operation="pd_rho_n")
    rest = 1 - sum(x)
    if rest <= 0:
        return 0.0
    return t ** len(x) * rest ** (t - 1) / math.prod(x)


def pd_lifted_rho(t: float, x: Sequence[float]) -> float:
    """t^n e^(-sum x) / prod x, the lifted Poisson-Dirichlet correlation."""
    if not t > 0 or not x or min(x) <= 0:
        raise DomainError("need t > 0 and positive points", operation="pd_lifted_rho")
    return t ** len(x) * math.exp(-sum(x)) / math.prod(x)


def dirichlet_lift_check(
    alphas: Sequence[float],
    alpha0: float,
    u: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> Tuple[EvalResult, float]:
    """
    Lift prod phi_{alpha_i}(u_i) phi_{alpha_0}(1 - sum u) at tau = alpha_0 + m + 1
    by quadrature; for sum alpha_i = 0 it equals prod phi_{alpha_i}(u_i) e^(-sum u)
    / Gamma(alpha_0 + m + 1). Returns (quadrature, closed form).
    """
    if len(alphas) != len(u):
        raise DomainError("one exponent per point", operation="dirichlet_lift_check")
    if abs(sum(alphas)) > 1e-12:
        raise DomainError("exponents must sum to zero", operation="dirichlet_lift_check")
    m = len(alphas)

    def product_form(pt: Tuple[float, ...]) -> complex:
        value = phi_weight(alpha0, 1 - sum(pt))
        for a, v in zip(alphas, pt):
            value *= phi_weight(a, v)
        return value

    numeric = lift_transform(product_form, LiftSpec(tau=alpha0 + m + 1), u, quad, alpha0)
    closed = math.exp(-sum(u)) * rgamma(alpha0 + m + 1)
    for a, v in zip(alphas, u):
        closed *= phi_weight(a, v)
    return numeric, float(complex(closed).real)


# Origin asymptotics


def asympt_kernel_k(params: ZParams, ratio: float) -> float:
    """
    k(x) = sin(pi z) sin(pi z') / (pi sin(pi (z - z')))
           (x^((z-z')/2) - x^((z'-z)/2)) / (x^(1/2) - x^(-1/2)),

    with k(1) = A(0) and the logarithmic form sin^2(pi z)/pi^2 ln x / (x^(1/2) - x^(-1/2))
    at z = z'.
    """
    if not ratio > 0:
        raise DomainError(f"ratio must be positive, got {ratio}", operation="asympt_kernel_k")
    log_x = math.log(ratio)
    if abs(log_x) < 1e-12:
        return asympt_const_A(params)
    z, zp = params.z, params.zprime
    diff = z - zp
    sines = cmath.sin(math.pi * z) * cmath.sin(math.pi * zp)
    if abs(diff) < 1e-12:
        value = sines / math.pi**2 * log_x / (2 * math.sinh(log_x / 2))
    else:
        value = (
            sines
            / (math.pi * cmath.sin(math.pi * diff))
            * cmath.sinh(diff * log_x / 2)
            / math.sinh(log_x / 2)
        )
    return _real(complex(value), "asympt_kernel_k")


@dataclass
class RemainderFit:
    """Log-log fit of the remainder at the origin."""

    route: str
    scales: List[float]
    residuals: List[float]
    slope: float
    expected: float
    logarithmic: bool = False
    log_ratios: List[float] = field(default_factory=list)

    @property
    def deviation(self) -> float:
        """Distance of the fitted slope from the expected one, or the spread of
        residual / (lambda ln^2 lambda) in the logarithmic case."""
        if self.logarithmic:
            return max(self.log_ratios) / min(self.log_ratios) - 1
        return abs(self.slope - self.expected)


def _expected_slope(params: ZParams) -> Tuple[float, bool]:
    diff = params.z - params.zprime
    if abs(diff) < 1e-12:
        return 1.0, True
    if abs(diff.real) > 1e-12:
        return 1 - abs(diff.real), False
    return 1.0, False


@track_execution_time("asympt_remainder_fit")
def asympt_remainder_fit(
    params: ZParams,
    route: str = LIFTED,
    scales: Tuple[int, int] = (3, 10),
    base: Tuple[float, float] = (1.0, 0.5),
) -> RemainderFit:
    """
    Residuals on lambda = 2^-j, j in scales:
        lifted       sqrt(xy) K(x, y) - k(x/y) at (x, y) = lambda * base
        non_lifted   x rho_1(x) - A(0) at x = lambda * base[0]
    and the slope of log|residual| against log lambda.
    """
    if route not in (LIFTED, NON_LIFTED):
        raise DomainError(f"unknown route {route!r}", operation="asympt_remainder_fit")
    lambdas = [2.0**-j for j in range(scales[0], scales[1] + 1)]
    residuals = []
    for lam in lambdas:
        if route == LIFTED:
            x, y = lam * base[0], lam * base[1]
            value = math.sqrt(x * y) * whittaker_kernel(params, KernelPoint(x, y))
            residuals.append(abs(value - asympt_kernel_k(params, x / y)))
        else:
            x = lam * base[0]
            residuals.append(abs(x * rho_1(params, x).real - asympt_const_A(params)))

    if any(r == 0 for r in residuals):
        raise FitFailure("zero residual, cannot fit a power law", operation="asympt_remainder_fit")
    steps_up = sum(1 for a, b in zip(residuals, residuals[1:]) if b > a)
    if residuals[-1] >= residuals[0] or steps_up > (len(residuals) - 1) // 2:
        raise FitFailure(
            f"residuals do not decrease toward the origin: {residuals}",
            operation="asympt_remainder_fit",
        )

    slope = float(np.polyfit(np.log(lambdas), np.log(residuals), 1)[0])
    expected, logarithmic = _expected_slope(params)
    fit = RemainderFit(route, lambdas, residuals, slope, expected, logarithmic)
    if logarithmic:
        fit.log_ratios = [r / (lam * math.log(lam) ** 2) for r, lam in zip(residuals, lambdas)]
    logger.debug("remainder fit %s: slope %.4f expected %.4f", route, slope, expected)
    return fit
