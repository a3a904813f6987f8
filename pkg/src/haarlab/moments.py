"""Exact and limiting moment formulas for Haar unitary entries and traces.

Factorial ratios are evaluated in exact integer arithmetic and converted to
float only at the boundary; ratios like (n-k)!/n! cancel catastrophically
in floating point long before the factorials themselves overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

__all__ = [
    "MomentSpec",
    "LimitMomentQuery",
    "DiagonalMomentResult",
    "is_forced_zero",
    "entry_abs_moment",
    "diagonal_product_moment_leading",
    "limit_trace_moment",
    "limit_mixed_moment",
    "complex_normal_moment",
    "formula_rows",
]


@dataclass(frozen=True)
class MomentSpec:
    """A query E( prod U_{i j}^k * conj(U_{i j})^m ) over a list of factors.

    Each factor is (i, j, k, m): row, column, power of the entry, power of
    its conjugate.  Indices are 1-based; the ambient matrix size n is
    supplied where needed rather than stored here.
    """

    factors: Tuple[Tuple[int, int, int, int], ...]

    def __init__(self, factors: Sequence[Sequence[int]]):
        factors = tuple(tuple(int(x) for x in f) for f in factors)
        if not factors:
            raise ValueError("need at least one factor")
        for f in factors:
            if len(f) != 4:
                raise ValueError("factors are (i, j, k, m) tuples")
            i, j, k, m = f
            if i < 1 or j < 1:
                raise ValueError("indices are 1-based")
            if k < 0 or m < 0:
                raise ValueError("powers must be non-negative")
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class LimitMomentQuery:
    """Powers a_i of Tr U^i and b_i of conj(Tr U^i), i = 1..len(a)."""

    a: Tuple[int, ...]
    b: Tuple[int, ...]

    def __init__(self, a: Sequence[int], b: Sequence[int]):
        a = tuple(int(x) for x in a)
        b = tuple(int(x) for x in b)
        if len(a) != len(b) or not a:
            raise ValueError("a and b must be equally long and non-empty")
        if min(a) < 0 or min(b) < 0:
            raise ValueError("powers must be non-negative")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class DiagonalMomentResult:
    """Leading term of E(|U_11|^2 ... |U_kk|^2) plus its error envelope.

    leading is (n-k)!/n! exactly.  relative_error_bound bounds the relative
    correction eps with E(...) = (1 - eps) * leading; it is 0 for k = 1,
    where the formula is exact, and an order-of-magnitude envelope
    otherwise.  The correction itself is never reported as a number.
    """

    n: int
    k: int
    leading: Fraction
    relative_error_bound: float

    @property
    def exact(self) -> bool:
        return self.k == 1


def is_forced_zero(spec: MomentSpec, n: int) -> bool:
    """True when the moment vanishes because some row or column is unbalanced.

    The criterion: if any row u has sum of (k_r - m_r) over the factors in
    that row nonzero, the product's expectation is 0, and likewise for
    columns.  This follows from invariance under multiplication by a
    diagonal phase matrix on either side.  True is a guarantee; False says
    nothing either way.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    for i, j, k, m in spec.factors:
        if i > n or j > n:
            raise ValueError(f"factor index out of range for n={n}")
        rows[i] = rows.get(i, 0) + k - m
        cols[j] = cols.get(j, 0) + k - m
    return any(v != 0 for v in rows.values()) or any(v != 0 for v in cols.values())


def entry_abs_moment(n: int, k: int) -> Fraction:
    """Exact E|U_ij|^(2k) for an n x n Haar unitary.

    Equals k! (n-1)! / (n+k-1)!, the k-th moment of the entry's squared
    modulus under the radial density (n-1)(1-r^2)^(n-2) * 2r on [0, 1].
    n = 1 returns 1 for every k since the single entry has modulus one.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if k < 0:
        raise ValueError("k must be non-negative")
    if n == 1:
        return Fraction(1)
    return Fraction(math.factorial(k) * math.factorial(n - 1), math.factorial(n + k - 1))


def diagonal_product_moment_leading(n: int, k: int) -> DiagonalMomentResult:
    """Leading behavior (n-k)!/n! of E(|U_11|^2 |U_22|^2 ... |U_kk|^2).

    Exact for k = 1.  For k >= 2 the relative error envelope is
    C(k,2) * n^(k-1) * E|U|^(2k): expanding the product against independent
    copies one coupling at a time leaves C(k,2) pairwise correction terms,
    each at most E|U|^(2k) by the generalized Holder inequality, and the
    n^(k-1) converts the per-term count into a relative scale.  At k=2 this
    evaluates to 2/(n+1), exactly twice the true relative correction
    1/(n+1), so the envelope is loose but sound where acceptance uses it.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError("k must not exceed n")
    leading = Fraction(math.factorial(n - k), math.factorial(n))
    if k == 1:
        bound = 0.0
    else:
        bound = float(math.comb(k, 2) * n ** (k - 1) * entry_abs_moment(n, k))
    return DiagonalMomentResult(n=n, k=k, leading=leading, relative_error_bound=bound)


def limit_trace_moment(k: int, l: int) -> int:
    """Large-n limit of E|Tr U^l|^(2k): equal to k! * l^k.

    Tr U^l converges in distribution to sqrt(l) times a standard complex
    normal, whose mixed moments are E(|xi|^(2k)) = k!.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if l < 1:
        raise ValueError("l must be positive")
    return math.factorial(k) * l**k


def limit_mixed_moment(q: LimitMomentQuery) -> int:
    """Large-n limit of E( prod_i (Tr U^i)^{a_i} (conj Tr U^i)^{b_i} ).

    The traces of distinct powers become independent complex normals with
    variances i, so the limit is prod_i delta_{a_i b_i} * a_i! * i^{a_i};
    any a_i != b_i forces zero.
    """
    out = 1
    for i, (ai, bi) in enumerate(zip(q.a, q.b), start=1):
        if ai != bi:
            return 0
        out *= math.factorial(ai) * i**ai
    return out


def complex_normal_moment(k: int, l: int) -> int:
    """E(xi^k conj(xi)^l) for a standard complex normal: delta_{kl} * k!."""
    if k < 0 or l < 0:
        raise ValueError("powers must be non-negative")
    return math.factorial(k) if k == l else 0


def formula_rows(ns: Sequence[int], ks: Sequence[int], ls: Sequence[int]):
    """Tabulate the closed forms as (n, k, l, value, kind) rows.

    Rows with an inapplicable column leave it None.  Used by the CSV export;
    the column order matches the file format.
    """
    rows = []
    for n in ns:
        for k in ks:
            rows.append((n, k, None, float(entry_abs_moment(n, k)), "entry_abs_moment"))
        for k in ks:
            if 1 <= k <= n:
                res = diagonal_product_moment_leading(n, k)
                rows.append((n, k, None, float(res.leading), "diagonal_product_leading"))
    for k in ks:
        for l in ls:
            rows.append((None, k, l, float(limit_trace_moment(k, l)), "limit_trace_moment"))
        rows.append((None, k, None, float(complex_normal_moment(k, k)), "complex_normal_moment"))
    return rows
