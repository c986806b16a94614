"""Solvers: single-anchor alignment, coordinate ascent, tree-seeded search.

All solvers maximize the consistency objective

    sum over ordered pairs (i, j), i != j, of tr(A_i T_ij A_j^T)

over per-set permutations A_i. The building blocks:

  * pairwise_alignment: anchor set 0, solve each block (0, i) once.
    Consistent by construction but uses only n - 1 of the blocks.
  * coordinate_update / coordinate_ascent: block-coordinate maximization.
    Updating A_i with the rest fixed is one assignment problem on the
    coefficient matrix sum_{j != i} A_j T_ji; the objective changes by
    exactly twice the assignment-value gain, so ascent is monotone and
    every accepted step improves by more than IMPROVE_TOL.
  * mst_initialize: walk a spanning-tree edge order, solving one block
    per edge and re-labeling the smaller component so every tree edge's
    pairwise map is single-block optimal.
  * solve_alg1: tree initialization, then global coordinate ascent.
  * solve_alg2: tree initialization interleaved with coordinate ascent
    restricted to the merged component after every edge; no outer ascent
    afterwards unless final_polish is set.

A note on the coefficient orientation: the gradient of the objective in
A_i is sum_{j != i} A_j T_ji. Summing A_j T_ij instead (the "ij" setting)
coincides only when blocks are symmetric matrices and exists purely for
ablation; the default is the correct "ji".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import Perm, lap_max, _assignment_value
from .errors import ParameterError, ValidationError
from .matchmodel import SimilarityTensor, Solution, _check_compatible, _objective_perms
from .spantree import (
    AlignGraph,
    DisjointSets,
    EdgeOrder,
    build_align_graph,
    max_spanning_tree,
    prim_order,
)

# minimum objective gain for a coordinate step to count as an improvement
IMPROVE_TOL = 1e-9

_ORDERS = ("basic", "prim", "kruskal")
_SCHEDULES = ("sweep", "random")
_ORIENTATIONS = ("ji", "ij")


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the solvers.

    order: tree-edge order for the initialization walk. "kruskal" is the
      sorted acceptance order, "prim" the attachment order from vertex 0,
      "basic" the same Kruskal tree re-sorted by vertex index (ablation).
    schedule: "sweep" visits indices round-robin; "random" draws n seeded
      uniform picks per sweep.
    max_sweeps / inner_max_sweeps: caps for the global and the
      per-merge restricted ascent loops.
    seed: drives the random schedule only; solvers are deterministic
      given the config.
    final_polish: run a global ascent after solve_alg2's merge phase.
    coefficient_orientation: see the module docstring; keep "ji".
    """

    order: str = "kruskal"
    schedule: str = "sweep"
    max_sweeps: int = 1000
    seed: int = 0
    inner_max_sweeps: int = 1000
    final_polish: bool = False
    coefficient_orientation: str = "ji"

    def __post_init__(self):
        if self.order not in _ORDERS:
            raise ParameterError(f"order must be one of {_ORDERS}, got {self.order!r}")
        if self.schedule not in _SCHEDULES:
            raise ParameterError(f"schedule must be one of {_SCHEDULES}, got {self.schedule!r}")
        if self.max_sweeps < 1:
            raise ParameterError("max_sweeps must be at least 1")
        if self.inner_max_sweeps < 1:
            raise ParameterError("inner_max_sweeps must be at least 1")
        if self.coefficient_orientation not in _ORIENTATIONS:
            raise ParameterError(
                f"coefficient_orientation must be one of {_ORIENTATIONS}, "
                f"got {self.coefficient_orientation!r}"
            )


@dataclass(frozen=True)
class SolveReport:
    """Solver outcome: solution, per-phase objective values, bookkeeping.

    objective_trace holds the objective after initialization and after
    each completed sweep; it is non-decreasing by construction and that
    is re-checked here on every instantiation.
    """

    solution: Solution
    objective_trace: tuple
    sweeps_run: int
    converged: bool

    def __post_init__(self):
        trace = tuple(float(v) for v in self.objective_trace)
        if len(trace) < 1:
            raise ValidationError("objective_trace cannot be empty")
        for a, b in zip(trace, trace[1:]):
            if b < a - IMPROVE_TOL:
                raise ValidationError(f"objective_trace decreased: {a} -> {b}")
        if self.sweeps_run < 0:
            raise ValidationError("sweeps_run cannot be negative")
        object.__setattr__(self, "objective_trace", trace)


def pairwise_alignment(t: SimilarityTensor) -> Solution:
    """Anchor at set 0 and solve each block (0, i) independently.

    A_0 is the identity and A_i the best assignment for T_0i, so every
    pairwise map is a composition through the anchor. Ignores all blocks
    not touching set 0.
    """
    perms = [Perm.identity(t.m)]
    for i in range(1, t.n):
        perms.append(lap_max(t.block(0, i)).perm)
    return Solution(tuple(perms))


def _coefficient(t, maps, i, group, orientation):
    """sum over j in group, j != i, of A_j T_ji (or A_j T_ij for "ij")."""
    c = np.zeros((t.m, t.m), dtype=np.float64)
    for j in group:
        if j == i:
            continue
        blk = t.block(j, i) if orientation == "ji" else t.block(i, j)
        c += blk[maps[j], :]
    return c


def _update_index(t, maps, i, group, orientation):
    """One coordinate step on index i in place; True if accepted."""
    c = _coefficient(t, maps, i, group, orientation)
    res = lap_max(c)
    cur = _assignment_value(c, maps[i])
    if 2.0 * (res.value - cur) > IMPROVE_TOL:
        maps[i] = res.perm.map
        return True
    return False


def coordinate_update(t: SimilarityTensor, s: Solution, i: int,
                      orientation: str = "ji") -> tuple[Perm, bool]:
    """Best-response update of A_i with all other permutations fixed.

    Returns (perm, improved). The permutation is the assignment argmax of
    the coefficient matrix when that strictly improves the objective by
    more than IMPROVE_TOL, else the incumbent A_i unchanged.
    """
    if not (0 <= i < s.n):
        raise ParameterError(f"index {i} out of range for n={s.n}")
    if orientation not in _ORIENTATIONS:
        raise ParameterError(f"orientation must be one of {_ORIENTATIONS}")
    _check_compatible(t, s)
    maps = [p.map for p in s.perms]
    improved = _update_index(t, maps, i, range(s.n), orientation)
    return (Perm(maps[i]) if improved else s.perms[i], improved)


def _sweep_indices(group, schedule, rng):
    if schedule == "sweep":
        return list(group)
    picks = rng.integers(0, len(group), size=len(group))
    seq = list(group)
    return [seq[k] for k in picks]


def coordinate_ascent(t: SimilarityTensor, s: Solution, cfg: SolverConfig) -> SolveReport:
    """Repeated coordinate updates until an improvement-free sweep.

    One sweep touches n indices (round-robin or seeded uniform picks).
    Terminates when a full sweep accepts nothing, or at max_sweeps.
    The trace starts at the objective of the given initial solution.
    """
    _check_compatible(t, s)
    maps = [p.map for p in s.perms]
    group = range(t.n)
    rng = np.random.default_rng(cfg.seed)
    trace = [_objective_perms(t, maps)]
    sweeps = 0
    converged = False
    while sweeps < cfg.max_sweeps:
        any_accepted = False
        for i in _sweep_indices(group, cfg.schedule, rng):
            if _update_index(t, maps, i, group, cfg.coefficient_orientation):
                any_accepted = True
        sweeps += 1
        trace.append(_objective_perms(t, maps))
        if not any_accepted:
            converged = True
            break
    return SolveReport(
        solution=Solution(tuple(Perm(mp) for mp in maps)),
        objective_trace=tuple(trace),
        sweeps_run=sweeps,
        converged=converged,
    )


class _Components:
    """Union-find plus explicit member lists and per-component minima."""

    def __init__(self, n):
        self.dsu = DisjointSets(n)
        self.members = {i: [i] for i in range(n)}
        self.min_vertex = {i: i for i in range(n)}

    def split_sides(self, u, v):
        """(fixed_endpoint, moving_endpoint): the component holding the
        smaller minimum vertex keeps its permutations."""
        ru, rv = self.dsu.find(u), self.dsu.find(v)
        if ru == rv:
            raise ValidationError(f"edge ({u}, {v}) closes a cycle")
        if self.min_vertex[ru] < self.min_vertex[rv]:
            return u, v
        return v, u

    def moving_members(self, endpoint):
        return self.members[self.dsu.find(endpoint)]

    def merge(self, u, v):
        ru, rv = self.dsu.find(u), self.dsu.find(v)
        self.dsu.union(u, v)
        root = self.dsu.find(u)
        other = rv if root == ru else ru
        self.members[root].extend(self.members.pop(other))
        self.min_vertex[root] = min(self.min_vertex[root], self.min_vertex.pop(other))
        return self.members[root]


def _validate_spanning(order: EdgeOrder, n: int) -> None:
    if len(order) != n - 1:
        raise ValidationError(f"edge order has {len(order)} edges, need {n - 1} for n={n}")
    dsu = DisjointSets(n)
    for i, j in order.edges:
        if i >= n or j >= n:
            raise ValidationError(f"edge ({i}, {j}) out of range for n={n}")
        if not dsu.union(i, j):
            raise ValidationError(f"edge ({i}, {j}) closes a cycle")
    if dsu.n_components != 1:
        raise ValidationError("edge order does not span all vertices")


def _merge_edge(t, maps, comp, u, v):
    """Solve one tree edge and re-label the moving side.

    The block assignment argmax of A_a T_ab A_b^T (a fixed side, b moving
    side) is applied on the left of every permutation in b's component,
    making the edge's pairwise map single-block optimal while leaving all
    maps inside each component untouched. Returns the merged member list.
    """
    a, b = comp.split_sides(u, v)
    mat = t.block(a, b)[np.ix_(maps[a], maps[b])]
    phat = lap_max(mat).perm
    for w in comp.moving_members(b):
        maps[w] = maps[w][phat.map]
    return comp.merge(u, v)


def mst_initialize(t: SimilarityTensor, order: EdgeOrder) -> Solution:
    """Seed a solution by walking a spanning-tree edge order.

    Starts from all-identity permutations. After processing, every tree
    edge (i, j) satisfies A_i^T A_j = argmax_P tr(P^T T_ij). The order
    must span all n vertices acyclically.
    """
    _validate_spanning(order, t.n)
    maps = [Perm.identity(t.m).map for _ in range(t.n)]
    comp = _Components(t.n)
    for u, v in order.edges:
        _merge_edge(t, maps, comp, u, v)
    return Solution(tuple(Perm(mp) for mp in maps))


def _edge_order(g: AlignGraph, order: str) -> EdgeOrder:
    if order == "prim":
        return prim_order(g)
    kruskal = max_spanning_tree(g)
    if order == "kruskal":
        return kruskal
    return EdgeOrder(tuple(sorted(kruskal.edges)))  # "basic": index order


def solve_alg1(t: SimilarityTensor, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Tree-seeded global coordinate ascent.

    Builds the alignment graph, initializes along the spanning-tree edge
    order chosen by cfg.order, then runs coordinate_ascent to
    convergence. The trace covers both phases: entry 0 is the objective
    right after initialization.
    """
    g = build_align_graph(t)
    s0 = mst_initialize(t, _edge_order(g, cfg.order))
    return coordinate_ascent(t, s0, cfg)


def solve_alg2(t: SimilarityTensor, cfg: SolverConfig = SolverConfig(order="prim")) -> SolveReport:
    """Tree walk with coordinate ascent folded into every merge.

    After each edge is solved and the components merged, coordinate
    ascent runs restricted to the merged component (coefficients sum over
    that component only) until an improvement-free pass or
    inner_max_sweeps. Requires order "prim" or "kruskal". There is no
    outer ascent phase afterwards, so the trace is the single final
    objective, unless final_polish appends a global ascent.
    """
    if cfg.order not in ("prim", "kruskal"):
        raise ParameterError(f"order must be 'prim' or 'kruskal', got {cfg.order!r}")
    g = build_align_graph(t)
    order = _edge_order(g, cfg.order)
    _validate_spanning(order, t.n)
    maps = [Perm.identity(t.m).map for _ in range(t.n)]
    comp = _Components(t.n)
    rng = np.random.default_rng(cfg.seed)
    for u, v in order.edges:
        merged = sorted(_merge_edge(t, maps, comp, u, v))
        for _ in range(cfg.inner_max_sweeps):
            any_accepted = False
            for k in _sweep_indices(merged, cfg.schedule, rng):
                if _update_index(t, maps, k, merged, cfg.coefficient_orientation):
                    any_accepted = True
            if not any_accepted:
                break
    solution = Solution(tuple(Perm(mp) for mp in maps))
    trace = [_objective_perms(t, maps)]
    sweeps = 0
    converged = True
    if cfg.final_polish:
        polish = coordinate_ascent(t, solution, cfg)
        solution = polish.solution
        trace.extend(polish.objective_trace[1:])
        sweeps = polish.sweeps_run
        converged = polish.converged
    return SolveReport(
        solution=solution,
        objective_trace=tuple(trace),
        sweeps_run=sweeps,
        converged=converged,
    )
