"""Seeded random streams and the polar complex-normal sampler.

Streams wrap numpy's Philox generator, which is counter-based: ``jumped(k)``
advances the counter by ``k * 2**128`` steps, so distinct stream indices own
disjoint slices of one keyed cycle and can be consumed in parallel without
coordination.  Every sampler in the package draws through :class:`RngStream`,
which is what makes runs with equal ``(seed, stream_index)`` bit-identical.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream", "complex_normal", "ginibre_matrix"]


class RngStream:
    """One reproducible random stream.

    Parameters
    ----------
    seed : int
        Base seed; reduced modulo 2**64.
    stream_index : int
        Non-negative partition index.  Distinct indices yield
        non-overlapping counter ranges and hence independent streams.
    """

    __slots__ = ("seed", "stream_index", "_gen")

    def __init__(self, seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        self.seed = int(seed) % (1 << 64)
        self.stream_index = int(stream_index)
        bitgen = np.random.Philox(key=self.seed)
        if self.stream_index:
            bitgen = bitgen.jumped(self.stream_index)
        self._gen = np.random.Generator(bitgen)

    def uniform(self, size=None):
        """Uniform variates on [0, 1)."""
        return self._gen.random(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_index={self.stream_index})"


def complex_normal(stream: RngStream, size=None):
    """Standard complex normal variates via the polar construction.

    Returns xi = R * exp(i*theta) with R**2 exponentially distributed with
    mean 1 and theta uniform on [0, 2*pi), independent of R.  Then
    E xi = 0, E |xi|**2 = 1, and the mixed moments satisfy
    E(xi**k * conj(xi)**l) = delta_{kl} * k!.

    Per call the radial block V is drawn before the angular block W, so a
    given ``size`` always consumes the stream the same way.

    Parameters
    ----------
    stream : RngStream
    size : None | int | tuple of int
        None returns a scalar, otherwise an array of that shape.
    """
    # V = 1 - U lies in (0, 1], keeping log(V) finite.
    v = 1.0 - stream.uniform(size)
    w = stream.uniform(size)
    return np.sqrt(-np.log(v)) * np.exp(2j * np.pi * w)


def ginibre_matrix(stream: RngStream, rows: int, cols: int):
    """Matrix with i.i.d. standard complex normal entries.

    Parameters
    ----------
    stream : RngStream
    rows, cols : int
        Both must be positive.

    Returns
    -------
    ndarray, shape (rows, cols), complex
    """
    if rows < 1 or cols < 1:
        raise ValueError("ginibre_matrix requires positive dimensions")
    return complex_normal(stream, (rows, cols))
