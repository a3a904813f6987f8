"""Eigenvalues, traces of powers, and eigenvalue-power angles.

All angles live in the half-open interval [0, 2*pi); values that round to
exactly 2*pi are mapped to 0, which keeps Kolmogorov-Smirnov tests against
the uniform circle well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import unitarity_defect

__all__ = ["Spectrum", "eigenvalues", "trace_power", "eigenangle_powers",
           "power_angles", "reduce_angles"]

TWO_PI = 2.0 * np.pi
# Inputs to eigenangle_powers must be unitary to this max-norm tolerance.
UNITARY_INPUT_TOL = 1e-10

# Crossover for the default trace_power path: repeated multiplication wins
# for small exponents, the eigenvalue route for large ones.
_MATMUL_MAX_POWER = 8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue multiset of a square matrix.

    values holds the eigenvalues, angles their arguments reduced to
    [0, 2*pi).  For unitary input every |values[i]| is 1 up to 1e-10 and
    values.sum() reproduces the trace to 1e-8 * n.
    """

    values: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))
        object.__setattr__(self, "angles", np.asarray(self.angles, dtype=np.float64))
        if self.values.shape != self.angles.shape:
            raise ValueError("values and angles must have equal length")


def reduce_angles(values):
    """Arguments of complex values reduced to the half-open [0, 2*pi)."""
    a = np.mod(np.angle(values), TWO_PI)
    # mod can round up to exactly 2*pi for arguments just below zero
    a[a >= TWO_PI] = 0.0
    return a


def eigenvalues(m) -> Spectrum:
    """Full eigenvalue multiset of a square matrix.

    Uses the dense nonsymmetric solver; convergence failures surface as
    exceptions rather than truncated output.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("eigenvalues expects a square matrix")
    vals = np.linalg.eigvals(m)
    return Spectrum(values=vals, angles=reduce_angles(vals))


def trace_power(m, l: int, method: str | None = None):
    """Tr(M^l) by repeated multiplication or as the eigenvalue power sum.

    method None picks multiplication for l <= 8 and the eigenvalue route
    beyond; both stay available because their agreement is one of the
    module's correctness checks.  Non-finite results (non-contractive input
    at large l) raise instead of propagating silently.

    Returns
    -------
    complex
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("trace_power expects a square matrix")
    if l < 1:
        raise ValueError("l must be positive")
    if method is None:
        method = "multiply" if l <= _MATMUL_MAX_POWER else "eigenvalues"
    if method == "multiply":
        t = complex(np.trace(np.linalg.matrix_power(m, l)))
    elif method == "eigenvalues":
        t = complex(np.sum(eigenvalues(m).values ** l))
    else:
        raise ValueError(f"unknown method {method!r}")
    if not (np.isfinite(t.real) and np.isfinite(t.imag)):
        raise FloatingPointError(f"trace_power overflowed at l={l}; input is not a contraction")
    return t


def eigenangle_powers(u, m: int):
    """Angles of the m-th powers of the eigenvalues of a unitary.

    Returns (m * theta_j) mod 2*pi for each eigenangle theta_j, in
    [0, 2*pi).  For m > n these powers are independent and uniform on the
    circle; for m <= n they are not, and no uniformity is implied.
    """
    if m < 1:
        raise ValueError("m must be positive")
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or unitarity_defect(u) > UNITARY_INPUT_TOL:
        raise ValueError("eigenangle_powers expects a unitary matrix")
    return power_angles(eigenvalues(u).angles, m)


def power_angles(angles, m: int):
    """(m * theta) mod 2*pi with the same [0, 2*pi) tie rule as reduce_angles."""
    a = np.mod(m * np.asarray(angles, dtype=np.float64), TWO_PI)
    a[a >= TWO_PI] = 0.0
    return a
