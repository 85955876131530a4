"""Random matrices and algebra elements drawn from a SplitMix64 stream.

Every sampler takes the stream as an explicit argument so that callers own
the seed and any draw can be replayed exactly.  The base draw fills a matrix
with entries uniform on the square [-1, 1] x [-1, 1] in the complex plane;
Hermitian, positive and unitary samples are all built from that base draw,
so a single seed pins down the whole family.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgElement, FdAlgebra
from .linalg import CMatrix, eig_hermitian
from .rng import SplitMix64


def random_matrix(rng: SplitMix64, dim: int) -> CMatrix:
    """Square matrix with independent uniform entries on [-1,1] + i[-1,1]."""
    entries = np.empty((dim, dim), dtype=np.complex128)
    for r in range(dim):
        for c in range(dim):
            re = rng.uniform(-1.0, 1.0)
            im = rng.uniform(-1.0, 1.0)
            entries[r, c] = complex(re, im)
    return CMatrix(entries)


def random_hermitian(rng: SplitMix64, dim: int) -> CMatrix:
    m = random_matrix(rng, dim)
    return CMatrix(0.5 * (m.data + m.data.conj().T))


def random_positive(rng: SplitMix64, dim: int) -> CMatrix:
    m = random_matrix(rng, dim)
    return CMatrix(m.data.conj().T @ m.data)


def random_unitary(rng: SplitMix64, dim: int) -> CMatrix:
    """Unitary matrix: the eigenbasis of a random Hermitian draw."""
    return eig_hermitian(random_hermitian(rng, dim)).basis


def random_element(rng: SplitMix64, alg: FdAlgebra) -> AlgElement:
    return alg.element(random_matrix(rng, d) for d in alg.blocks)


def random_hermitian_element(rng: SplitMix64, alg: FdAlgebra) -> AlgElement:
    return alg.element(random_hermitian(rng, d) for d in alg.blocks)


def random_positive_element(rng: SplitMix64, alg: FdAlgebra) -> AlgElement:
    return alg.element(random_positive(rng, d) for d in alg.blocks)


def random_masked_element(
    rng: SplitMix64,
    alg: FdAlgebra,
    support: frozenset[int] | set[int],
    positive: bool = False,
) -> AlgElement:
    """Element whose blocks outside ``support`` are exactly zero.

    With ``positive=True`` the supported blocks are positive draws, so the
    result is a positive element living on the given block support.
    """
    parts = []
    for idx, d in enumerate(alg.blocks):
        if idx in support:
            parts.append(random_positive(rng, d) if positive else random_matrix(rng, d))
        else:
            parts.append(CMatrix.zeros(d))
    return alg.element(parts)
