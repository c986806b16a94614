"""Spectral synchronization baseline.

Stacks all blocks into one nm x nm symmetric matrix (identity on the
diagonal blocks), takes the top-m eigenvectors U, and rounds each m-row
panel U_i against the anchor panel U_1 with one assignment solve per set:

    A_i = argmax_P tr(P^T U_1 U_i^T)

On a noiseless consistent tensor the top eigenspace is spanned by the
stacked ground-truth permutations, U_1 U_i^T is a scaled permutation
matrix, and every pairwise map A_i^T A_j is recovered exactly; rounding
the anchor against itself maximizes the trace of a PSD Gram matrix, so
A_1 is the identity. Dense eigendecomposition caps the size at
n * m <= 4000.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import Perm, lap_max
from .errors import ParameterError, SizeError
from .matchmodel import SimilarityTensor, Solution
from .matrixcore import sym_eigs_topk

SYNC_SIZE_CAP = 4000


@dataclass(frozen=True)
class SyncConfig:
    """Eigensolver guards. The dense direct solver used here does not
    iterate, so these bound hypothetical iterative fallbacks and are
    validated for interface stability."""

    eig_tolerance: float = 1e-10
    eig_max_iters: int = 10_000

    def __post_init__(self):
        if not (self.eig_tolerance > 0.0 and np.isfinite(self.eig_tolerance)):
            raise ParameterError("eig_tolerance must be positive and finite")
        if self.eig_max_iters < 1:
            raise ParameterError("eig_max_iters must be at least 1")


def permutation_synchronization(t: SimilarityTensor, cfg: SyncConfig = SyncConfig()) -> Solution:
    """Top-m eigenvector rounding of the stacked block matrix."""
    n, m = t.n, t.m
    if n * m > SYNC_SIZE_CAP:
        raise SizeError(f"stacked matrix would be {n * m} x {n * m}, cap is {SYNC_SIZE_CAP}")
    if n == 1:
        return Solution((Perm.identity(m),))
    big = np.eye(n * m, dtype=np.float64)
    for i, j in t.pairs():
        blk = t.block(i, j)
        big[i * m:(i + 1) * m, j * m:(j + 1) * m] = blk
        big[j * m:(j + 1) * m, i * m:(i + 1) * m] = blk.T
    _, vectors = sym_eigs_topk(big, m)
    anchor = vectors[0:m, :]
    perms = []
    for i in range(n):
        panel = vectors[i * m:(i + 1) * m, :]
        perms.append(lap_max(anchor @ panel.T).perm)
    return Solution(tuple(perms))
