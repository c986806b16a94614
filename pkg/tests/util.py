"""Shared builders and independent oracles for the test suite.

Oracles here deliberately avoid the package's own code paths: objectives
come from full matrix products, spanning trees from sequence-coded tree
enumeration, assignments from itertools scans.
"""

from __future__ import annotations

import itertools

import numpy as np

from mwmatch.assignment import Perm
from mwmatch.matchmodel import EtaGraph, SimilarityTensor, Solution, gen_ground_truth, gen_noisy_tensor


def uniform_tensor(n: int, m: int, seed: int) -> SimilarityTensor:
    """Generic asymmetric blocks with entries uniform on [0, 1)."""
    rng = np.random.default_rng(seed)
    blocks = {}
    for i in range(n):
        for j in range(i + 1, n):
            blocks[(i, j)] = rng.random((m, m))
    return SimilarityTensor(n, m, blocks)


def noiseless_instance(n: int, m: int, seed: int):
    truth = gen_ground_truth(n, m, seed)
    tensor = gen_noisy_tensor(truth, EtaGraph(np.zeros((n, n))), seed + 1)
    return truth, tensor


def noisy_instance(n: int, m: int, eta: float, seed: int):
    truth = gen_ground_truth(n, m, seed)
    etas = EtaGraph(np.full((n, n), eta) - np.diag([eta] * n))
    tensor = gen_noisy_tensor(truth, etas, seed + 1)
    return truth, tensor


def naive_objective(t: SimilarityTensor, s: Solution) -> float:
    """Objective by explicit matrix products over all ordered pairs."""
    total = 0.0
    for i in range(t.n):
        for j in range(t.n):
            if i == j:
                continue
            prod = s.perms[i].matrix() @ t.block(i, j) @ s.perms[j].matrix().T
            total += float(np.trace(prod))
    return total


def brute_assignment(c: np.ndarray):
    """(map tuple, value) by plain itertools scan, first-best kept."""
    m = c.shape[0]
    best_map = None
    best_val = -np.inf
    for cand in itertools.permutations(range(m)):
        val = sum(c[p, cand[p]] for p in range(m))
        if val > best_val:
            best_val = val
            best_map = cand
    return best_map, float(best_val)


def enumerate_best_slot(t: SimilarityTensor, s: Solution, i: int, objective_fn):
    """Exhaustive best replacement for one solution slot.

    Returns (best value, best perms in lexicographic order achieving it
    within 1e-9). objective_fn is injected so this stays independent of
    the solver's coefficient shortcut.
    """
    m = s.m
    best_val = -np.inf
    values = []
    for cand in itertools.permutations(range(m)):
        perms = list(s.perms)
        perms[i] = Perm(list(cand))
        val = objective_fn(t, Solution(tuple(perms)))
        values.append((cand, val))
        best_val = max(best_val, val)
    winners = [cand for cand, val in values if val >= best_val - 1e-9]
    return best_val, winners


def prufer_to_edges(seq, n: int):
    """Sequence-coded labeled tree decode, O(n^2) scan variant."""
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    removed = [False] * n
    edges = []
    for x in seq:
        leaf = min(v for v in range(n) if degree[v] == 1 and not removed[v])
        edges.append((min(leaf, x), max(leaf, x)))
        removed[leaf] = True
        degree[x] -= 1
    u, v = [w for w in range(n) if not removed[w]]
    edges.append((min(u, v), max(u, v)))
    return edges


def all_spanning_trees(n: int):
    """Every labeled spanning tree on n vertices as an edge list."""
    if n == 1:
        return [[]]
    if n == 2:
        return [[(0, 1)]]
    return [prufer_to_edges(seq, n) for seq in itertools.product(range(n), repeat=n - 2)]
