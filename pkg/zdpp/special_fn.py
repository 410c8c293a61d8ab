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
Special Functions

Scalar special functions over the complex numbers: the gamma family,
Gauss and confluent hypergeometric functions, the Whittaker function W and
the weights phi_a(u) = u^a_+ / Gamma(a + 1).
"""

from typing import Optional, Sequence, Tuple
import cmath
import math

import mpmath
import numpy as np
from scipy import special as sc

from .config import QuadratureSpec, SeriesSpec
from .errors import (
    DistributionalRegime,
    DomainError,
    NoConvergentRoute,
    ParameterPole,
    PoleAtNonpositiveInteger,
)
from .params import EvalResult, Method
from .quadrature import integrate_interval, integrate_semi_infinite, integrate_simplex

_EPS = np.finfo(float).eps
_POCHHAMMER_DIRECT_MAX = 64
# Working precisions (decimal digits) for the mpmath Whittaker route
WHITW_DPS = (20, 32)


def is_nonpositive_integer(x: complex, tol: float = 0.0) -> bool:
    """True when x sits on a pole of Gamma."""
    x = complex(x)
    if abs(x.imag) > tol:
        return False
    r = x.real
    return r <= tol and abs(r - round(r)) <= tol


def is_integer(x: complex, tol: float = 1e-12) -> bool:
    """True when x is (numerically) an integer."""
    x = complex(x)
    return abs(x.imag) <= tol and abs(x.real - round(x.real)) <= tol


def log_gamma(x: complex) -> complex:
    """Principal branch of log Gamma(x)."""
    if is_nonpositive_integer(x):
        raise PoleAtNonpositiveInteger(f"Gamma has a pole at {x}", operation="log_gamma")
    return complex(sc.loggamma(complex(x)))


def rgamma(x: complex) -> complex:
    """1/Gamma(x); entire, zero at the nonpositive integers."""
    return complex(sc.rgamma(complex(x)))


def digamma(x: complex) -> complex:
    """psi(x) = Gamma'(x)/Gamma(x)."""
    if is_nonpositive_integer(x):
        raise PoleAtNonpositiveInteger(f"digamma has a pole at {x}", operation="digamma")
    return complex(sc.psi(complex(x)))


def pochhammer(a: complex, k: int) -> complex:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1)."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}", operation="pochhammer")
    a = complex(a)
    if k <= _POCHHAMMER_DIRECT_MAX or is_nonpositive_integer(a) or is_nonpositive_integer(a + k):
        result = 1 + 0j
        for j in range(k):
            result *= a + j
        return result
    return cmath.exp(log_gamma(a + k) - log_gamma(a))


def _sum_series(
    ratio,
    spec: SeriesSpec,
    operation: str,
) -> Tuple[complex, float]:
    """
    Sum a hypergeometric-type series from its term ratio t_{k+1}/t_k = ratio(k).

    Stops once spec.consecutive terms in a row fall below rel_tol |partial sum|.
    """
    term = 1 + 0j
    total = 1 + 0j
    magnitude = 1.0
    small = 0
    for k in range(spec.max_terms):
        term *= ratio(k)
        total += term
        magnitude += abs(term)
        if abs(term) <= spec.rel_tol * abs(total):
            small += 1
            if small >= spec.consecutive:
                err = abs(term) + 4 * _EPS * magnitude
                return total, err
        else:
            small = 0
        if term == 0:
            return total, 4 * _EPS * magnitude
    raise NoConvergentRoute(f"series did not converge in {spec.max_terms} terms", operation)


def _hyp2f1_series(
    a: complex, b: complex, c: complex, x: complex, spec: SeriesSpec
) -> Tuple[complex, float]:
    return _sum_series(
        lambda k: (a + k) * (b + k) / ((c + k) * (k + 1)) * x, spec, "gauss_2f1"
    )


def gauss_2f1(
    a: complex, b: complex, c: complex, x: complex, spec: Optional[SeriesSpec] = None
) -> EvalResult:
    """
    Gauss hypergeometric function F(a, b; c; x).

    |x| < 1: direct series. Real x <= -2: the 1/x connection formula (two
    series in 1/x), or the Pfaff transformation when b - a is an integer.
    Real -2 < x <= -1: Pfaff transformation to x/(x-1) in [1/2, 2/3].
    """
    spec = spec or SeriesSpec()
    a, b, c, x = complex(a), complex(b), complex(c), complex(x)
    if is_nonpositive_integer(c):
        raise ParameterPole(f"c={c} is a nonpositive integer", operation="gauss_2f1")
    if x == 0:
        return EvalResult(1 + 0j, 0.0, Method.SERIES)
    if abs(x) < 1:
        value, err = _hyp2f1_series(a, b, c, x, spec)
        return EvalResult(value, err, Method.SERIES)
    if x.imag != 0 or x.real > 0:
        raise NoConvergentRoute(f"no route for x={x}", operation="gauss_2f1")

    if x.real <= -2 and not is_integer(b - a):
        return _gauss_2f1_inverse(a, b, c, x.real, spec)
    # Pfaff: F(a,b;c;x) = (1-x)^(-a) F(a, c-b; c; x/(x-1))
    w = x / (x - 1)
    value, err = _hyp2f1_series(a, c - b, c, w, spec)
    factor = (1 - x) ** (-a)
    return EvalResult(value * factor, err * abs(factor), Method.SERIES, "pfaff")


def _gauss_2f1_inverse(
    a: complex, b: complex, c: complex, x: float, spec: SeriesSpec
) -> EvalResult:
    # F = G(c)G(b-a)/(G(b)G(c-a)) (-x)^(-a) F(a, 1-c+a; 1-b+a; 1/x) + (a <-> b)
    total = 0j
    err = 0.0
    for lead, other in ((a, b), (b, a)):
        coeff = (
            cmath.exp(log_gamma(c) + log_gamma(other - lead))
            * rgamma(other)
            * rgamma(c - lead)
            * (-x) ** (-lead)
        )
        if coeff == 0:
            continue
        value, e = _hyp2f1_series(lead, 1 - c + lead, 1 - other + lead, 1.0 / x, spec)
        total += coeff * value
        err += abs(coeff) * e
    return EvalResult(total, err, Method.MELLIN_BARNES_CONTINUATION, "inverse-argument")


def kummer_phi(
    a: complex, c: complex, x: complex, spec: Optional[SeriesSpec] = None
) -> EvalResult:
    """
    Confluent hypergeometric Phi(a, c; x) = sum (a)_k/(c)_k x^k/k!.

    For Re x < 0 the Kummer transformation e^x Phi(c-a, c; -x) is summed
    instead, avoiding cancellation between alternating terms.
    """
    spec = spec or SeriesSpec()
    a, c, x = complex(a), complex(c), complex(x)
    if is_nonpositive_integer(c):
        raise ParameterPole(f"c={c} is a nonpositive integer", operation="kummer_phi")
    if x == 0:
        return EvalResult(1 + 0j, 0.0, Method.SERIES)
    if x.real < 0:
        value, err = _sum_series(
            lambda k: (c - a + k) / ((c + k) * (k + 1)) * (-x), spec, "kummer_phi"
        )
        factor = cmath.exp(x)
        return EvalResult(value * factor, err * abs(factor), Method.SERIES, "kummer-transform")
    value, err = _sum_series(lambda k: (a + k) / ((c + k) * (k + 1)) * x, spec, "kummer_phi")
    return EvalResult(value, err, Method.SERIES)


def whittaker_w(
    kappa: complex,
    mu: complex,
    x: float,
    route: str = "auto",
    quad: Optional[QuadratureSpec] = None,
) -> EvalResult:
    """
    Whittaker function W_{kappa,mu}(x) for x > 0.

    Routes:
        auto      mpmath.whitw at two working precisions; abs_err is their difference
        integral  e^(-x/2) x^(mu+1/2) int phi_{mu-kappa-1/2}(t) (1+t)^(mu+kappa-1/2) e^(-t x) dt,
                  using whichever sign of mu makes the phi exponent integrable
        kummer    the two-solution Kummer combination (2 mu not an integer)
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}", operation="whittaker_w")
    kappa, mu = complex(kappa), complex(mu)
    if route == "auto":
        with mpmath.workdps(WHITW_DPS[0]):
            coarse = complex(mpmath.whitw(kappa, mu, x))
        with mpmath.workdps(WHITW_DPS[1]):
            value = complex(mpmath.whitw(kappa, mu, x))
        err = max(abs(value - coarse), _EPS * abs(value))
        return EvalResult(value, err, Method.LIBRARY, "mpmath")
    if route == "integral":
        return _whittaker_integral(kappa, mu, x, quad or QuadratureSpec())
    if route == "kummer":
        return _whittaker_kummer(kappa, mu, x)
    raise DomainError(f"unknown route {route!r}", operation="whittaker_w")


def _whittaker_integral(kappa: complex, mu: complex, x: float, quad: QuadratureSpec) -> EvalResult:
    # W is even in mu: take the sign maximizing Re(mu - kappa)
    if (-mu - kappa).real > (mu - kappa).real:
        mu = -mu
    exponent = mu - kappa - 0.5
    prefactor = cmath.exp(-x / 2) * x ** (mu + 0.5)
    if abs(exponent + 1) < 1e-14:
        # phi_{-1} is the delta at 0: the integral collapses to the integrand at t = 0
        return EvalResult(prefactor, _EPS * abs(prefactor), Method.CLOSED_FORM)
    if exponent.real <= -1:
        raise NoConvergentRoute(
            f"integral route needs Re(mu - kappa - 1/2) > -1 for some sign of mu",
            operation="whittaker_w",
        )
    norm = rgamma(exponent + 1)

    def integrand(t: np.ndarray) -> np.ndarray:
        return t**exponent * (1 + t) ** (mu + kappa - 0.5) * np.exp(-t * x)

    value, err = integrate_semi_infinite(integrand, exponent.real, x, quad)
    factor = prefactor * norm
    return EvalResult(value * factor, err * abs(factor), Method.DIRECT_QUADRATURE)


def _whittaker_kummer(kappa: complex, mu: complex, x: float) -> EvalResult:
    if abs((2 * mu).imag) < 1e-14 and abs((2 * mu).real - round((2 * mu).real)) < 1e-12:
        raise NoConvergentRoute("kummer route needs 2 mu not an integer", operation="whittaker_w")
    total = 0j
    err = 0.0
    for s in (mu, -mu):
        coeff = cmath.exp(log_gamma(-2 * s)) * rgamma(0.5 - s - kappa) * x ** (s + 0.5)
        if coeff == 0:
            continue
        phi = kummer_phi(0.5 + s - kappa, 1 + 2 * s, x)
        total += coeff * phi.value
        err += abs(coeff) * phi.abs_err
    factor = math.exp(-x / 2)
    return EvalResult(total * factor, err * factor, Method.SERIES, "kummer")


def whittaker_w_prime(kappa: complex, mu: complex, x: float, route: str = "auto") -> complex:
    """d/dx W_{kappa,mu}(x) from x W' = (x/2 - kappa) W - W_{kappa+1,mu}."""
    w = whittaker_w(kappa, mu, x, route=route).value
    w_up = whittaker_w(kappa + 1, mu, x, route=route).value
    return ((x / 2 - kappa) * w - w_up) / x


def phi_weight(a: complex, u: float) -> complex:
    """phi_a(u) = u^a / Gamma(a+1) for u > 0, and 0 for u <= 0."""
    a = complex(a)
    if a.real <= -1:
        raise DistributionalRegime(
            f"phi_a with Re a={a.real} <= -1 is a distribution", operation="phi_weight"
        )
    if u <= 0:
        return 0j
    return complex(u**a * rgamma(a + 1))


def power_weight(a: complex, u):
    """
    Pointwise u^a / Gamma(a+1) for u > 0 without a restriction on Re a.

    Vectorized over u; used by closed-form routes away from the origin.
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(u > 0, np.abs(u) ** complex(a), 0j) * rgamma(complex(a) + 1)
    return values if values.ndim else complex(values)


def stieltjes_phi(z: complex, y: float) -> complex:
    """Stieltjes transform of phi_{-z}(x) phi_{z-1}(1-x): y^(-z) (1+y)^(z-1)."""
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}", operation="stieltjes_phi")
    z = complex(z)
    return complex(y ** (-z) * (1 + y) ** (z - 1))


def stieltjes_phi_quadrature(
    z: complex, y: float, quad: Optional[QuadratureSpec] = None
) -> EvalResult:
    """
    The same transform by quadrature of int_0^1 phi_{-z}(x) phi_{z-1}(1-x)/(x+y) dx.

    Both weights are integrable only for 0 < Re z < 1.
    """
    z = complex(z)
    if not 0 < z.real < 1:
        raise DomainError(
            f"quadrature form needs 0 < Re z < 1, got {z}", operation="stieltjes_phi"
        )
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}", operation="stieltjes_phi")
    norm = rgamma(1 - z) * rgamma(z)
    value, err = integrate_interval(lambda x: 1.0 / (x + y), -z, z - 1, quad)
    return EvalResult(value * norm, err * abs(norm), Method.DIRECT_QUADRATURE)


def dirichlet_integral(
    alphas: Sequence[complex], quad: Optional[QuadratureSpec] = None
) -> EvalResult:
    """
    int phi_{alpha_0}(u_0) phi_{alpha_1}(u_1) ... phi_{alpha_k}(u_k) du_1 ... du_k
    over u_0 = 1 - u_1 - ... - u_k >= 0, by simplex quadrature.

    Closed form: 1 / Gamma(alpha_0 + ... + alpha_k + k + 1).
    """
    if len(alphas) < 2:
        raise DomainError("need at least two exponents", operation="dirichlet_integral")
    alpha0, rest = complex(alphas[0]), [complex(a) for a in alphas[1:]]
    norm = rgamma(alpha0 + 1)
    for a in rest:
        norm *= rgamma(a + 1)
    value, err = integrate_simplex(
        lambda u, remainder: np.ones(u.shape[0]), rest, alpha0, quad
    )
    return EvalResult(value * norm, err * abs(norm), Method.DIRECT_QUADRATURE)
