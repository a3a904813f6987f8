"""Haar unitary samplers and truncations.

The reference construction orthonormalizes the columns of a Ginibre matrix
by modified Gram-Schmidt; by invariance of the Gaussian law under left
multiplication, the result carries Haar measure on U(n).  A QR-based sampler
with the positive-diagonal phase correction produces the same distribution
at lower cost and is what the Monte Carlo experiments use by default.

Truncations keep the upper-left m x m block of an n x n unitary, optionally
scaled by sqrt(n/m).  Because the Gram-Schmidt construction touches columns
left to right, the first m columns of a Haar unitary are exactly the
orthonormalization of an n x m Ginibre matrix; :func:`sample_truncation`
exploits that to draw truncated blocks without forming the full matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .rng import RngStream, complex_normal

__all__ = [
    "TruncationSpec",
    "haar_unitary",
    "haar_unitary_qr",
    "truncate",
    "sample_truncation",
    "coupled_truncation_pair",
    "unitarity_defect",
]

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-12
# Residual norms below this multiple of sqrt(n) count as a degenerate draw.
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class TruncationSpec:
    """Upper-left m x m block of an n x n unitary.

    scaled=True multiplies the block by sqrt(n/m).  Requires 1 <= m < n;
    the joint eigenvalue density of the block has exponent n - m - 1, so
    m = n is outside the model.
    """

    n: int
    m: int
    scaled: bool = False

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise ValueError("truncation requires 1 <= m < n")


def unitarity_defect(u) -> float:
    """Max-norm of U*U - I, the unitarity residual used by the tolerance checks."""
    u = np.asarray(u)
    g = np.einsum("...ji,...jk->...ik", u.conj(), u)
    g[..., range(g.shape[-1]), range(g.shape[-1])] -= 1.0
    return float(np.abs(g).max())


def _resample_degenerate(z, j, norm, stream, what):
    """Replace Gaussian columns whose residual collapsed; returns the mask."""
    bad = norm < DEGENERATE_TOL * np.sqrt(z.shape[1])
    if bad.any():
        if stream is None:
            raise ValueError(f"degenerate {what} and no stream to resample from")
        logger.warning(
            "degenerate %s in column %d for %d sample(s); resampling",
            what, j, int(bad.sum()),
        )
        z[bad, :, j] = complex_normal(stream, (int(bad.sum()), z.shape[1]))
    return bad


def _gram_schmidt(z, stream):
    """Orthonormalize columns of a (batch, n, k) stack by modified Gram-Schmidt.

    Projections are subtracted sequentially (column i removed from the
    current residual before column i+1 is considered), which keeps the loss
    of orthogonality at O(eps * cond) instead of classical Gram-Schmidt's
    much worse behavior.  Degenerate residuals are resampled from ``stream``.
    """
    z = np.array(z, dtype=np.complex128, copy=True)
    b, n, k = z.shape
    q = np.empty_like(z)
    j = 0
    while j < k:
        v = z[:, :, j].copy()
        for i in range(j):
            qi = q[:, :, i]
            v -= np.einsum("bi,bi->b", qi.conj(), v)[:, None] * qi
        norm = np.linalg.norm(v, axis=1)
        if _resample_degenerate(z, j, norm, stream, "residual").any():
            continue  # redo column j with the fresh draws
        q[:, :, j] = v / norm[:, None]
        j += 1
    return q


def haar_unitary(stream: RngStream, n: int, count=None):
    """Haar-distributed n x n unitary via Gram-Schmidt on a Ginibre matrix.

    This is the reference construction: the orthonormalized columns of a
    matrix of i.i.d. standard complex normals.  One re-orthogonalization
    pass runs if the first leaves a unitarity defect above 1e-12; that is
    deterministic post-processing of the same column span, so the
    distribution is unaffected.

    Parameters
    ----------
    stream : RngStream
    n : int
        Matrix size, n >= 1.
    count : None | int
        None returns one (n, n) matrix; otherwise a (count, n, n) stack.

    Returns
    -------
    ndarray, complex, unitary within 1e-12 in the max norm
    """
    if n < 1:
        raise ValueError("n must be positive")
    b = 1 if count is None else int(count)
    if b < 1:
        raise ValueError("count must be positive")
    z = complex_normal(stream, (b, n, n))
    q = _gram_schmidt(z, stream)
    q = _reorthogonalize(q, stream)
    return q[0] if count is None else q


def _reorthogonalize(q, stream):
    defect = np.abs(
        np.einsum("bji,bjk->bik", q.conj(), q) - np.eye(q.shape[-1])
    ).max(axis=(1, 2))
    redo = defect > UNITARITY_TOL
    if redo.any():
        q = q.copy()
        q[redo] = _gram_schmidt(q[redo], stream)
        worst = unitarity_defect(q[redo])
        if worst > UNITARITY_TOL:
            raise RuntimeError(f"unitarity defect {worst:.3e} persists after re-orthogonalization")
    return q


def haar_unitary_qr(stream: RngStream, n: int, count=None):
    """Haar-distributed unitary via QR factorization of a Ginibre matrix.

    The raw Q of a QR factorization is not Haar: the factorization fixes
    signs arbitrarily.  Multiplying each column by d/|d|, where d is the
    corresponding diagonal entry of R, makes the triangular factor's
    diagonal positive real and restores the Haar law.  Distributionally
    identical to :func:`haar_unitary`, roughly an order of magnitude faster
    at n in the hundreds.
    """
    if n < 1:
        raise ValueError("n must be positive")
    b = 1 if count is None else int(count)
    if b < 1:
        raise ValueError("count must be positive")
    z = complex_normal(stream, (b, n, n))
    while True:
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        bad = np.abs(d).min(axis=1) < DEGENERATE_TOL * np.sqrt(n)
        if not bad.any():
            break
        logger.warning("degenerate factorization for %d sample(s); resampling", int(bad.sum()))
        z[bad] = complex_normal(stream, (int(bad.sum()), n, n))
    q = q * (d / np.abs(d))[:, None, :]
    return q[0] if count is None else q


def truncate(u, spec: TruncationSpec):
    """Upper-left spec.m x spec.m block of u, scaled by sqrt(n/m) if requested.

    u must be spec.n x spec.n.  The unscaled block is a contraction: its
    singular values interlace those of u, so its spectral norm is at most 1.
    """
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("truncate expects a square matrix")
    if u.shape[0] != spec.n:
        raise ValueError(f"matrix size {u.shape[0]} does not match spec.n={spec.n}")
    block = u[: spec.m, : spec.m].copy()
    if spec.scaled:
        block *= np.sqrt(spec.n / spec.m)
    return block


def sample_truncation(stream: RngStream, spec: TruncationSpec, count=None):
    """Draw truncated Haar blocks directly.

    Orthonormalizes an n x m Ginibre matrix and keeps the first m rows.
    The first m columns of a Haar unitary have exactly this law (the
    Gram-Schmidt construction never looks at later columns), so the result
    is distributed as truncate(haar_unitary(stream, n), spec) at a fraction
    of the cost.  For m <= 2 the orthonormalization is inlined and fully
    vectorized; larger m goes through batched thin QR with the same phase
    correction as :func:`haar_unitary_qr`.
    """
    block, _ = coupled_truncation_pair(stream, spec, count)
    return block


def coupled_truncation_pair(stream: RngStream, spec: TruncationSpec, count=None):
    """Truncated Haar block plus the Ginibre block it was built from.

    Returns (T, G): T exactly as :func:`sample_truncation` draws it, and G
    the first m rows of the underlying n x m Ginibre matrix standardized by
    1/sqrt(m).  Each marginal law is exact (a fixed sub-block of a Ginibre
    matrix is itself Ginibre); only the joint coupling is special.
    Orthonormalization moves the columns by O(1/sqrt(n)), so T - G vanishes
    pathwise as n grows.  Convergence experiments compare T against G with
    common random numbers: the distance between them isolates the finite-n
    effect instead of burying it under two samples' worth of noise.
    """
    n, m = spec.n, spec.m
    b = 1 if count is None else int(count)
    if b < 1:
        raise ValueError("count must be positive")
    z = complex_normal(stream, (b, n, m))
    if m <= 2:
        q = _gram_schmidt_small(z, stream)
    else:
        while True:
            q, r = np.linalg.qr(z)
            d = np.diagonal(r, axis1=-2, axis2=-1)
            bad = np.abs(d).min(axis=1) < DEGENERATE_TOL * np.sqrt(n)
            if not bad.any():
                break
            logger.warning("degenerate factorization for %d sample(s); resampling", int(bad.sum()))
            z[bad] = complex_normal(stream, (int(bad.sum()), n, m))
        q = q * (d / np.abs(d))[:, None, :]
    block = q[:, :m, :]
    if spec.scaled:
        block = block * np.sqrt(n / m)
    # degenerate resampling mutates z in place, so this reads the draws
    # actually orthonormalized
    g = z[:, :m, :] / np.sqrt(m)
    if count is None:
        return block[0], g[0]
    return block, g


def _gram_schmidt_small(z, stream):
    """Vectorized two-column Gram-Schmidt; avoids per-matrix LAPACK calls."""
    n = z.shape[1]
    norm0 = np.linalg.norm(z[:, :, 0], axis=1)
    while (bad := norm0 < DEGENERATE_TOL * np.sqrt(n)).any():
        logger.warning("degenerate residual in column 0 for %d sample(s); resampling", int(bad.sum()))
        z[bad, :, 0] = complex_normal(stream, (int(bad.sum()), n))
        norm0 = np.linalg.norm(z[:, :, 0], axis=1)
    q = np.empty_like(z)
    q[:, :, 0] = z[:, :, 0] / norm0[:, None]
    if z.shape[2] == 2:
        while True:
            q0 = q[:, :, 0]
            w = z[:, :, 1] - np.einsum("bi,bi->b", q0.conj(), z[:, :, 1])[:, None] * q0
            norm1 = np.linalg.norm(w, axis=1)
            bad = norm1 < DEGENERATE_TOL * np.sqrt(n)
            if not bad.any():
                break
            logger.warning("degenerate residual in column 1 for %d sample(s); resampling", int(bad.sum()))
            z[bad, :, 1] = complex_normal(stream, (int(bad.sum()), n))
        q[:, :, 1] = w / norm1[:, None]
    return q
