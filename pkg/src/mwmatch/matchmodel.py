"""Problem model: similarity tensors, solutions, generators, objective.

A problem instance over n element sets of m elements each is a grid of
m x m similarity blocks T_ij. Only the i < j blocks are stored; reading
block (j, i) returns the transpose, so the symmetry T_ji = T_ij^T holds
structurally and diagonal blocks do not exist at all.

A solution assigns one permutation A_i per set. The objective is

    sum over ordered pairs (i, j), i != j, of tr(A_i T_ij A_j^T)

which depends on the A_i only through the pairwise maps A_i^T A_j; any
common left-composition of all A_i leaves it unchanged.

RNG policy: all generators take an integer seed and use numpy's PCG64
(numpy.random.default_rng). Gaussian draws go through
Generator.standard_normal, numpy's ziggurat implementation, so a given
seed reproduces outputs bit-exactly across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import Perm
from .errors import DimensionError, ParameterError, ValidationError

# pair-count budget for the median heuristic subsample
_MEDIAN_MAX_PAIRS = 100_000
# internal subsample seed; the operation takes no seed parameter
_MEDIAN_SAMPLE_SEED = 0


class SimilarityTensor:
    """n x n grid of m x m blocks with structural transpose symmetry."""

    __slots__ = ("n", "m", "_blocks")

    def __init__(self, n: int, m: int, blocks: dict, check_range: bool = False):
        if n < 1 or m < 1:
            raise ParameterError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
        expected = {(i, j) for i in range(n) for j in range(i + 1, n)}
        if set(blocks.keys()) != expected:
            raise ValidationError(
                f"blocks must cover exactly the {len(expected)} pairs (i, j) with i < j"
            )
        stored = {}
        for key in sorted(blocks):
            arr = np.array(blocks[key], dtype=np.float64, order="C")
            if arr.shape != (m, m):
                raise DimensionError(f"block {key} has shape {arr.shape}, expected {(m, m)}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"block {key} contains non-finite entries")
            if check_range and arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise ValidationError(f"block {key} has entries outside [0, 1]")
            arr.setflags(write=False)
            stored[key] = arr
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "_blocks", stored)

    def __setattr__(self, name, value):
        raise AttributeError("SimilarityTensor is immutable")

    def block(self, i: int, j: int) -> np.ndarray:
        """Block T_ij; (j, i) access returns the stored transpose view."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ParameterError(f"block index ({i}, {j}) out of range for n={self.n}")
        if i == j:
            raise ValidationError("diagonal blocks are not part of the tensor")
        if i < j:
            return self._blocks[(i, j)]
        return self._blocks[(j, i)].T

    def pairs(self):
        """Stored block keys (i, j), i < j, in lexicographic order."""
        return sorted(self._blocks)


@dataclass(frozen=True)
class Solution:
    """One permutation per element set. perms[i] plays the role of A_i."""

    perms: tuple

    def __post_init__(self):
        perms = tuple(self.perms)
        if len(perms) < 1:
            raise ValidationError("a solution needs at least one permutation")
        m = len(perms[0])
        for p in perms:
            if not isinstance(p, Perm):
                raise ValidationError("solution entries must be Perm instances")
            if len(p) != m:
                raise DimensionError("all permutations in a solution must share one size")
        object.__setattr__(self, "perms", perms)

    @property
    def n(self) -> int:
        return len(self.perms)

    @property
    def m(self) -> int:
        return len(self.perms[0])

    def pairwise(self, i: int, j: int) -> Perm:
        """The gauge-invariant map with matrix A_i^T A_j."""
        return self.perms[i].inverse().then(self.perms[j])


class EtaGraph:
    """Symmetric non-negative noise-variance assignment per set pair."""

    __slots__ = ("n", "eta")

    def __init__(self, eta):
        arr = np.array(eta, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionError(f"eta must be a square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("eta contains non-finite entries")
        if not np.array_equal(arr, arr.T):
            raise ValidationError("eta must be symmetric")
        if arr.size and arr.min() < 0.0:
            raise ParameterError("eta values must be non-negative")
        np.fill_diagonal(arr, 0.0)
        arr.setflags(write=False)
        object.__setattr__(self, "n", int(arr.shape[0]))
        object.__setattr__(self, "eta", arr)

    def __setattr__(self, name, value):
        raise AttributeError("EtaGraph is immutable")

    def value(self, i: int, j: int) -> float:
        if i == j:
            raise ParameterError("eta is defined for distinct set pairs only")
        return float(self.eta[i, j])


def validate_point_sets(points) -> np.ndarray:
    """Coerce to an (n, m, d) float64 array of finite coordinates."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 3:
        raise DimensionError(f"point sets must be (n, m, d), got {arr.ndim}-D")
    n, m, d = arr.shape
    if n < 1 or m < 1 or d < 1:
        raise DimensionError(f"point sets must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("point sets contain non-finite coordinates")
    return arr


def tensor_from_points(points, sigma: float) -> SimilarityTensor:
    """Gaussian-kernel similarity blocks from n point sets.

    [T_ij]_{p,q} = exp(-||x_p^i - x_q^j||^2 / (2 sigma^2)). Entries land in
    (0, 1]; the blocks are exact transposes of each other by construction.
    """
    pts = validate_point_sets(points)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ParameterError(f"sigma must be positive and finite, got {sigma}")
    n = pts.shape[0]
    m = pts.shape[1]
    denom = 2.0 * sigma * sigma
    blocks = {}
    for i in range(n):
        for j in range(i + 1, n):
            diff = pts[i][:, None, :] - pts[j][None, :, :]
            sq = np.sum(diff * diff, axis=2)
            blocks[(i, j)] = np.exp(-sq / denom)
    return SimilarityTensor(n, m, blocks)


def median_heuristic_sigma(points) -> float:
    """Median distance over cross-set point pairs, as a kernel bandwidth.

    All C(n,2) * m^2 cross-set pairs are used when that count is at most
    100000; otherwise a fixed-seed uniform subsample of exactly 100000
    pairs is taken (pair indices are sampled, so the result scales
    linearly with the coordinates). A zero median means the points are
    too degenerate to set a bandwidth and raises ParameterError.
    """
    pts = validate_point_sets(points)
    n, m, _ = pts.shape
    if n < 2:
        raise ParameterError("median heuristic needs at least two point sets")
    pair_sets = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(pair_sets) * m * m
    if total <= _MEDIAN_MAX_PAIRS:
        chunks = []
        for i, j in pair_sets:
            diff = pts[i][:, None, :] - pts[j][None, :, :]
            chunks.append(np.sqrt(np.sum(diff * diff, axis=2)).ravel())
        dists = np.concatenate(chunks)
    else:
        rng = np.random.default_rng(_MEDIAN_SAMPLE_SEED)
        first = np.array([ij[0] for ij in pair_sets])
        second = np.array([ij[1] for ij in pair_sets])
        t = rng.integers(0, len(pair_sets), size=_MEDIAN_MAX_PAIRS)
        p = rng.integers(0, m, size=_MEDIAN_MAX_PAIRS)
        q = rng.integers(0, m, size=_MEDIAN_MAX_PAIRS)
        diff = pts[first[t], p] - pts[second[t], q]
        dists = np.sqrt(np.sum(diff * diff, axis=1))
    med = float(np.median(dists))
    if med <= 0.0:
        raise ParameterError("cross-set point distances are degenerate (median 0)")
    return med


def gen_ground_truth(n: int, m: int, seed: int) -> Solution:
    """n independent uniform random permutations of size m."""
    if n < 1 or m < 1:
        raise ParameterError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    return Solution(tuple(Perm(rng.permutation(m)) for _ in range(n)))


def ideal_block(truth: Solution, i: int, j: int) -> np.ndarray:
    """The 0/1 block A_i^T A_j implied by a ground-truth solution."""
    return truth.pairwise(i, j).matrix()


def gen_noisy_tensor(truth: Solution, etas: EtaGraph, seed: int) -> SimilarityTensor:
    """Squared-Gaussian perturbation of the ideal consistent tensor.

    For each stored pair i < j, with Z drawn i.i.d. from N(0, eta_ij)
    (eta is the variance): entries that are 1 in the ideal block become
    1 - Z^2 and entries that are 0 become Z^2. No clipping is applied, so
    entries may leave [0, 1]; that keeps the deviation moments exact
    (E[Z^2] = eta). Blocks are drawn in lexicographic (i, j) order, one
    (m, m) Gaussian panel per pair, so output is seed-deterministic.
    """
    if etas.n != truth.n:
        raise DimensionError(f"eta graph has n={etas.n}, truth has n={truth.n}")
    n = truth.n
    m = truth.m
    rng = np.random.default_rng(seed)
    blocks = {}
    for i in range(n):
        for j in range(i + 1, n):
            z = rng.standard_normal((m, m)) * np.sqrt(etas.value(i, j))
            z2 = z * z
            mask = np.zeros((m, m), dtype=bool)
            mask[np.arange(m), truth.pairwise(i, j).map] = True
            blocks[(i, j)] = np.where(mask, 1.0 - z2, z2)
    return SimilarityTensor(n, m, blocks)


def objective(t: SimilarityTensor, s: Solution) -> float:
    """sum_{i != j} tr(A_i T_ij A_j^T) over ordered pairs.

    tr(A_i T_ij A_j^T) = sum_p T_ij[sigma_i(p), sigma_j(p)], so each pair
    costs one O(m) gather; transposed pairs contribute equal values and
    are folded in as a factor of two.
    """
    _check_compatible(t, s)
    return _objective_perms(t, [p.map for p in s.perms])


def _objective_perms(t: SimilarityTensor, maps: list) -> float:
    total = 0.0
    for i, j in t.pairs():
        total += 2.0 * float(t.block(i, j)[maps[i], maps[j]].sum())
    return total


def _check_compatible(t: SimilarityTensor, s: Solution) -> None:
    if s.n != t.n or s.m != t.m:
        raise DimensionError(
            f"solution shape (n={s.n}, m={s.m}) does not match tensor (n={t.n}, m={t.m})"
        )


def left_compose(s: Solution, g: Perm) -> Solution:
    """Apply one permutation on the left of every A_i: A_i <- P(g) A_i."""
    if len(g) != s.m:
        raise DimensionError(f"permutation size {len(g)} does not match solution m={s.m}")
    return Solution(tuple(g.then(p) for p in s.perms))
