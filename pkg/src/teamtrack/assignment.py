"""Minimum-cost bipartite assignment.

hungarian() is a shortest-augmenting-path solver with dual potentials
(Kuhn-Munkres in the Jonker-Volgenant formulation). Rectangular matrices
are solved natively on the smaller side, so a 12 x 1500 matrix costs
roughly 12 augmentations instead of a 1500-wide square solve.
brute_force_assignment() enumerates injections and exists to cross-check
the solver; keep it to small matrices.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = ["hungarian", "brute_force_assignment"]

# permutation tables reused across brute-force calls, keyed by (rows, cols)
_PERM_CACHE: dict[tuple[int, int], np.ndarray] = {}

_BRUTE_FORCE_MAX = 9


def _validated(cost) -> np.ndarray:
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError(f"cost matrix must be 2-D and nonempty, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix contains non-finite entries")
    return c


def hungarian(cost) -> list[tuple[int, int]]:
    """Solve the min-cost assignment over a rectangular cost matrix.

    Args:
        cost: (R, C) array-like of finite costs.

    Returns:
        min(R, C) pairs (row, col) sorted by row, minimizing the total
        cost over all maximum matchings. Among equal-cost optima the
        result is deterministic (fixed scan order); which optimum wins
        is not part of the contract.

    Raises:
        ValueError: empty matrix or non-finite entries.
    """
    c = _validated(cost)
    if c.shape[0] <= c.shape[1]:
        pairs = _solve_rows(c)
    else:
        pairs = [(r, col) for col, r in _solve_rows(c.T)]
    return sorted(pairs)


def _solve_rows(cost: np.ndarray) -> list[tuple[int, int]]:
    """Augmenting-path core; requires rows <= cols, matches every row."""
    n_rows, n_cols = cost.shape
    u = np.zeros(n_rows)
    v = np.zeros(n_cols + 1)
    # match[j] = row assigned to column j; the extra slot is a virtual
    # column holding the row currently being inserted
    match = np.full(n_cols + 1, -1, dtype=np.intp)
    way = np.full(n_cols, -1, dtype=np.intp)
    for i in range(n_rows):
        match[n_cols] = i
        j0 = n_cols
        minv = np.full(n_cols, np.inf)
        used = np.zeros(n_cols + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            reduced = cost[i0] - u[i0] - v[:n_cols]
            avail = ~used[:n_cols]
            improve = avail & (reduced < minv)
            minv[improve] = reduced[improve]
            way[improve] = j0
            cand = np.where(avail, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = float(cand[j1])
            used_cols = used[:n_cols]
            u[match[:n_cols][used_cols]] += delta
            u[i] += delta
            v[:n_cols][used_cols] -= delta
            minv[avail] -= delta
            j0 = j1
            if match[j0] == -1:
                break
        # flip the alternating path back to the virtual column
        while j0 != n_cols:
            j1 = int(way[j0])
            match[j0] = match[j1]
            j0 = j1
    return [(int(match[j]), j) for j in range(n_cols) if match[j] != -1]


def brute_force_assignment(cost) -> list[tuple[int, int]]:
    """Exhaustive minimum assignment, the test oracle for hungarian().

    Enumerates every injection of the smaller side into the larger and
    keeps the cheapest (first in lexicographic order on ties).

    Raises:
        ValueError: invalid matrix, or min(R, C) > 9 (refused to keep the
            factorial enumeration tractable).
    """
    c = _validated(cost)
    if min(c.shape) > _BRUTE_FORCE_MAX:
        raise ValueError(
            f"matrix {c.shape} too large for brute force (min side capped at {_BRUTE_FORCE_MAX})"
        )
    transposed = c.shape[0] > c.shape[1]
    work = c.T if transposed else c
    r, m = work.shape
    perms = _PERM_CACHE.get((r, m))
    if perms is None:
        perms = np.array(list(itertools.permutations(range(m), r)), dtype=np.intp)
        _PERM_CACHE[(r, m)] = perms
    totals = work[np.arange(r), perms].sum(axis=1)
    best = perms[int(np.argmin(totals))]
    pairs = [(i, int(best[i])) for i in range(r)]
    if transposed:
        pairs = [(j, i) for i, j in pairs]
    return sorted(pairs)
