"""Eigenvalue-based fractional stability analysis and divergence indicators.

For a commensurate order q, an equilibrium with Jacobian spectrum
{lambda_i} is asymptotically stable when every eigenvalue satisfies
|arg(lambda_i)| > q*pi/2.  The scalar

    iota = q - 2*|alpha_min|/pi,   alpha_min = argument of smallest magnitude,

summarises the criterion: the equilibrium is unstable exactly when
iota > 0, and q* = 2*|alpha_min|/pi is the critical order where stability
is lost.

The module also provides a fractional divergence indicator: the sum of
componentwise Caputo derivatives of the field with respect to its own state
variable, evaluated by expanding tanh into a truncated Taylor polynomial
and differentiating termwise with the monomial rule

    D^q x^n = Gamma(n+1)/Gamma(n-q+1) * x^(n-q),   D^q const = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hopfield import HnnParams, sech2
from .solver import gamma_real

__all__ = [
    "Spectrum",
    "StabilityReport",
    "DivergenceSeries",
    "eigenvalues_3x3",
    "stability_index",
    "caputo_monomial",
    "divergence_series",
    "fractional_divergence",
    "integer_divergence",
]

MARGINAL_BAND = 1e-12


@dataclass
class Spectrum:
    """Eigenvalues of a real 3x3 matrix and their principal arguments.

    Complex eigenvalues come in conjugate pairs; arguments lie in [-pi, pi).
    """

    eigenvalues: np.ndarray  # three complex numbers
    arguments: np.ndarray    # three reals in [-pi, pi)


@dataclass
class StabilityReport:
    iota: float
    critical_order: float
    verdict: str  # "stable", "unstable" or "marginal"


def _principal_argument(z):
    a = math.atan2(z.imag, z.real)
    return -math.pi if a == math.pi else a


def eigenvalues_3x3(J):
    """Spectrum of a real 3x3 matrix via its characteristic cubic.

    Solves lambda^3 - c2 lambda^2 + c1 lambda - c0 = 0 in closed form:
    the trigonometric formula when all roots are real, Cardano with the
    product trick v = -p/(3u) otherwise.  Exact conjugate pairing is
    guaranteed by construction.
    """
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {J.shape}")
    if not np.isfinite(J).all():
        raise ValueError("matrix entries must be finite")
    c2 = J[0, 0] + J[1, 1] + J[2, 2]
    c1 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
          + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
          + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    c0 = np.linalg.det(J)
    # depressed cubic y^3 + p y + r with lambda = y + c2/3
    p = c1 - c2 * c2 / 3.0
    r = -2.0 * c2 ** 3 / 27.0 + c1 * c2 / 3.0 - c0
    disc = -4.0 * p ** 3 - 27.0 * r * r
    shift = c2 / 3.0
    if p == 0.0 and r == 0.0:
        roots = np.array([shift, shift, shift], dtype=complex)
    elif disc >= 0.0:
        # three real roots; p < 0 here unless fully degenerate
        amp = 2.0 * math.sqrt(-p / 3.0)
        cos3 = -r / (2.0 * (-p / 3.0) ** 1.5)
        phi = math.acos(min(1.0, max(-1.0, cos3))) / 3.0
        ys = [amp * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
        roots = np.array([y + shift for y in ys], dtype=complex)
    else:
        s = math.sqrt(r * r / 4.0 + p ** 3 / 27.0)
        u = np.cbrt(-r / 2.0 + s) if r <= 0 else np.cbrt(-r / 2.0 - s)
        v = -p / (3.0 * u)
        real = u + v + shift
        re = -(u + v) / 2.0 + shift
        im = math.sqrt(3.0) / 2.0 * abs(u - v)
        roots = np.array([real, complex(re, im), complex(re, -im)])
    order = np.lexsort((-roots.imag, -roots.real))
    roots = roots[order]
    args = np.array([_principal_argument(z) for z in roots])
    return Spectrum(eigenvalues=roots, arguments=args)


def stability_index(spectrum: Spectrum, q):
    """Fractional stability verdict of a spectrum at order q.

    alpha_min is the argument of minimum absolute value; the report carries
    iota = q - 2|alpha_min|/pi, the critical order q* = 2|alpha_min|/pi, and
    the verdict (marginal inside a 1e-12 band around iota = 0).
    """
    if not 0 < q < 1:
        raise ValueError(f"order q must lie in (0, 1), got {q}")
    alpha_min = np.min(np.abs(spectrum.arguments))
    qstar = 2.0 * alpha_min / math.pi
    iota = q - qstar
    if abs(iota) <= MARGINAL_BAND:
        verdict = "marginal"
    elif iota > 0:
        verdict = "unstable"
    else:
        verdict = "stable"
    return StabilityReport(iota=float(iota), critical_order=float(qstar),
                           verdict=verdict)


def caputo_monomial(n, q, x):
    """Caputo derivative of x^n at x >= 0: Gamma(n+1)/Gamma(n-q+1) x^(n-q).

    Constants (n = 0) differentiate to zero.
    """
    if x < 0:
        raise ValueError(f"caputo_monomial requires x >= 0, got {x}")
    if n < 0 or n != int(n):
        raise ValueError(f"monomial degree must be a non-negative integer, got {n}")
    if not 0 < q <= 1:
        raise ValueError(f"order q must lie in (0, 1], got {q}")
    if n == 0:
        return 0.0
    return gamma_real(n + 1) / gamma_real(n - q + 1) * x ** (n - q)


def _tanh_taylor(center, order):
    """Taylor coefficients a_1..a_order of tanh about ``center``.

    Derivatives of tanh are polynomials in u = tanh(center), generated by
    P_1 = 1 - u^2 and P_{k+1} = P_k' * (1 - u^2); a_k = P_k(u)/k!.
    """
    u = math.tanh(center)
    poly = [1.0, 0.0, -1.0]  # 1 - u^2, ascending powers
    coeffs = []
    fact = 1.0
    for k in range(1, order + 1):
        fact *= k
        coeffs.append(np.polynomial.polynomial.polyval(u, poly) / fact)
        dpoly = [poly[m] * m for m in range(1, len(poly))]
        poly = np.polynomial.polynomial.polymul(dpoly, [1.0, 0.0, -1.0]).tolist()
    return coeffs


@dataclass
class DivergenceSeries:
    """Per-component truncated series of the field's diagonal dependence.

    components[i] is a list of (coefficient, degree) pairs in the shifted
    variable x_i - expansion_point[i]; applying the monomial rule to each
    term and summing yields the fractional divergence.
    """

    components: list
    taylor_order: int
    expansion_point: np.ndarray


def divergence_series(params: HnnParams | None = None, center=None,
                      taylor_order=5):
    """Build the truncated diagonal series of the network field.

    Component i depends on its own variable only through
    -x_i + w_ii tanh(x_i); the off-diagonal tanh terms are constants under
    the componentwise derivative and vanish.  Zero coefficients (the even
    degrees at center 0) are dropped.
    """
    if taylor_order not in (1, 3, 5, 7):
        raise ValueError(f"taylor_order must be one of 1, 3, 5, 7, got {taylor_order}")
    params = params or HnnParams()
    center = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    components = []
    for i in range(3):
        a = _tanh_taylor(center[i], taylor_order)
        terms = []
        for k in range(1, taylor_order + 1):
            coeff = params.W[i, i] * a[k - 1] - (1.0 if k == 1 else 0.0)
            if coeff != 0.0:
                terms.append((coeff, k))
        components.append(terms)
    return DivergenceSeries(components=components, taylor_order=taylor_order,
                            expansion_point=center)


def fractional_divergence(params: HnnParams | None = None, point=(0.1, 0.1, 0.1),
                          q=0.5, taylor_order=5, center=None):
    """Fractional divergence of the network field at a point.

    Sums the componentwise Caputo derivatives of the truncated series from
    :func:`divergence_series`.  Coordinates below the expansion point would
    require fractional powers of negative reals; their magnitudes are used
    instead, with a warning.
    """
    series = divergence_series(params, center=center, taylor_order=taylor_order)
    shifted = np.asarray(point, dtype=float) - series.expansion_point
    if np.any(shifted < 0):
        warnings.warn("negative shifted coordinates, using their magnitudes")
        shifted = np.abs(shifted)
    total = 0.0
    for i, terms in enumerate(series.components):
        for coeff, degree in terms:
            total += coeff * caputo_monomial(degree, q, shifted[i])
    return total


def integer_divergence(params: HnnParams | None = None, x=(0.0, 0.0, 0.0)):
    """Classical divergence -3 + sum_i w_ii sech^2(x_i)."""
    params = params or HnnParams()
    x = np.asarray(x, dtype=float)
    return float(-3.0 + np.sum(np.diag(params.W) * sech2(x)))
