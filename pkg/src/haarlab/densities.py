"""Joint eigenvalue densities and the entry law of Haar unitaries.

Two measure conventions coexist: eigenangle densities on the torus are
taken per dz = dtheta/2pi for each angle, densities of truncated blocks
per Lebesgue measure on the unit disc.  Every evaluated point records its
convention; mixing them up silently is how normalization bugs happen.

All products are evaluated in log space and exponentiated once, since
factors like (1 - |zeta|^2)^(n-m-1) underflow directly for n beyond a few
hundred.  Factorials and binomials are exact integers up to n = 170 and
log-gamma beyond, the overflow boundary of double-precision factorials.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

__all__ = [
    "Measure",
    "DensityPoint",
    "vandermonde",
    "weyl_density",
    "truncation_constant",
    "truncated_jpdf",
    "ginibre_limit_density",
    "entry_radial_cdf",
]

_EXACT_FACTORIAL_LIMIT = 170


class Measure(Enum):
    """Reference measure a density value is taken against."""

    PER_DZ = "per-dz"
    PER_LEBESGUE = "per-lebesgue"


@dataclass(frozen=True)
class DensityPoint:
    """A density evaluation: the points, the value, and the measure used.

    log_value carries the same information in log space (-inf when the
    value is exactly zero); it is what large-n comparisons should use.
    """

    points: Tuple[complex, ...]
    value: float
    measure: Measure
    log_value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("density values are non-negative")


def vandermonde(z: Sequence[complex]) -> complex:
    """prod_{i<j} (z_i - z_j); empty and singleton tuples give 1.

    Equals the determinant of the power matrix [z_i^k] up to the sign
    (-1)^C(n,2) from ordering the differences this way round.
    """
    z = [complex(w) for w in z]
    out = complex(1.0)
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            out *= z[i] - z[j]
    return out


def _log_abs_sq_differences(points) -> float:
    """Sum of log |p_i - p_j|^2 over pairs; -inf on a coincidence."""
    total = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = abs(points[i] - points[j])
            if d == 0.0:
                return -math.inf
            total += 2.0 * math.log(d)
    return total


def _log_factorial(n: int) -> float:
    if n <= _EXACT_FACTORIAL_LIMIT:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def weyl_density(angles: Sequence[float], n: int) -> DensityPoint:
    """Joint eigenangle density of an n x n Haar unitary.

    Evaluates (1/n!) * prod_{i<j} |e^{i theta_i} - e^{i theta_j}|^2, taken
    with respect to d theta_i / 2 pi for each angle (per-dz measure).
    Angles must lie in [0, 2*pi).
    """
    angles = [float(a) for a in angles]
    if len(angles) != n:
        raise ValueError(f"expected {n} angles, got {len(angles)}")
    if any(not 0.0 <= a < 2.0 * math.pi for a in angles):
        raise ValueError("angles must lie in [0, 2*pi)")
    z = tuple(cmath.exp(1j * a) for a in angles)
    log_num = _log_abs_sq_differences(z)
    log_value = log_num - _log_factorial(n)
    value = math.exp(log_value) if log_value > -math.inf else 0.0
    return DensityPoint(points=z, value=value, measure=Measure.PER_DZ, log_value=log_value)


def _validate_truncation_sizes(n: int, m: int):
    if m < 1 or m >= n:
        raise ValueError("need 1 <= m <= n-1")


def truncation_constant(n: int, m: int) -> float:
    """Normalization constant of the truncated-block eigenvalue density.

    The inverse constant is pi^m * m! * prod_{k=0}^{m-1} 1/(C(n-m+k-1, k)
    * (n-m+k)).  For m = 1 this collapses to pi/(n-1), so the constant is
    (n-1)/pi exactly; the exact-integer path preserves that equality in
    floating point.
    """
    _validate_truncation_sizes(n, m)
    if n <= _EXACT_FACTORIAL_LIMIT:
        inv = Fraction(math.factorial(m))
        for k in range(m):
            inv /= math.comb(n - m + k - 1, k) * (n - m + k)
        return float(1 / inv) / math.pi**m
    return math.exp(_log_truncation_constant(n, m))


def _log_truncation_constant(n: int, m: int) -> float:
    log_inv = m * math.log(math.pi) + _log_factorial(m)
    for k in range(m):
        log_comb = (
            _log_factorial(n - m + k - 1)
            - _log_factorial(k)
            - _log_factorial(n - m - 1)
        )
        log_inv -= log_comb + math.log(n - m + k)
    return -log_inv


def truncated_jpdf(n: int, m: int, zeta: Sequence[complex]) -> DensityPoint:
    """Joint eigenvalue density of the unscaled m x m truncation block.

    C_{[n,m]} * prod_{i<j} |zeta_i - zeta_j|^2 * prod_i (1-|zeta_i|^2)^(n-m-1)
    per Lebesgue measure on the m-fold unit disc.  Points must lie in the
    closed disc; for m = 1 this is the entry density (n-1)/pi * (1-r^2)^(n-2).
    """
    _validate_truncation_sizes(n, m)
    zeta = tuple(complex(w) for w in zeta)
    if len(zeta) != m:
        raise ValueError(f"expected {m} points, got {len(zeta)}")
    if any(abs(w) > 1.0 for w in zeta):
        raise ValueError("points must lie in the closed unit disc")
    exponent = n - m - 1
    varying = _log_abs_sq_differences(zeta)
    if exponent > 0:
        for w in zeta:
            s = 1.0 - abs(w) ** 2
            varying += exponent * math.log(s) if s > 0.0 else -math.inf
    const = truncation_constant(n, m)
    log_value = math.log(const) + varying if varying > -math.inf else -math.inf
    value = const * math.exp(varying) if varying > -math.inf else 0.0
    return DensityPoint(points=zeta, value=value, measure=Measure.PER_LEBESGUE, log_value=log_value)


def ginibre_limit_density(m: int, zeta: Sequence[complex]) -> DensityPoint:
    """Large-n limit of the scaled truncation's eigenvalue density.

    m^(m(m+1)/2) / (pi^m prod_{k=1}^m k!) * exp(-m sum |zeta_i|^2)
    * prod_{i<j} |zeta_i - zeta_j|^2, per Lebesgue measure on C^m.  This is
    the eigenvalue density of an m x m matrix of centered complex Gaussians
    with entry variance 1/m.
    """
    if m < 1:
        raise ValueError("m must be positive")
    zeta = tuple(complex(w) for w in zeta)
    if len(zeta) != m:
        raise ValueError(f"expected {m} points, got {len(zeta)}")
    if m <= 40:
        num = Fraction(m ** (m * (m + 1) // 2))
        for k in range(1, m + 1):
            num /= math.factorial(k)
        # num outgrows the float range near m = 35; log the integer parts
        log_const = (math.log(num.numerator) - math.log(num.denominator)
                     - m * math.log(math.pi))
    else:
        log_const = (m * (m + 1) / 2) * math.log(m) - m * math.log(math.pi)
        for k in range(1, m + 1):
            log_const -= _log_factorial(k)
    varying = _log_abs_sq_differences(zeta) - m * sum(abs(w) ** 2 for w in zeta)
    log_value = log_const + varying
    value = math.exp(log_value) if log_value > -math.inf else 0.0
    return DensityPoint(points=zeta, value=value, measure=Measure.PER_LEBESGUE, log_value=log_value)


def entry_radial_cdf(n: int, x):
    """P(|sqrt(n) U_ij|^2 <= x) = 1 - (1 - x/n)^(n-1) for x in [0, n].

    Accepts scalars or arrays.  As n grows this tends to the unit-rate
    exponential law 1 - e^(-x), the squared modulus of a standard complex
    normal.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > n):
        raise ValueError("x must lie in [0, n]")
    out = 1.0 - (1.0 - arr / n) ** (n - 1)
    return float(out) if np.isscalar(x) else out
