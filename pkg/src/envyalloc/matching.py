"""Bipartite graphs, perfect r-matchings, and the exhaustive Hall oracle.

An r-matching lets each left vertex (agent) take up to r right vertices
(items) while every right vertex is taken at most once; it is perfect when
every left vertex takes exactly r and every right vertex is taken. The
solver runs augmenting paths on the implicit capacity-r expansion and is
deterministic: left vertices are processed in index order and neighbors in
adjacency order, so the same graph always yields the same matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _backend


class GraphError(ValueError):
    """Malformed graph or matching data."""


class DimensionMismatch(GraphError):
    """right_count != r * left_count where a perfect r-matching was requested."""


@dataclass
class BipartiteGraph:
    """Adjacency lists from left vertices to right vertices."""

    left_count: int
    right_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.left_count < 0 or self.right_count < 0:
            raise GraphError("vertex counts must be nonnegative")
        if len(self.adjacency) != self.left_count:
            raise GraphError("adjacency must list every left vertex")
        cleaned = []
        for i, nbrs in enumerate(self.adjacency):
            nbrs = tuple(int(j) for j in nbrs)
            for a, b in zip(nbrs, nbrs[1:]):
                if a >= b:
                    raise GraphError(f"adjacency of left vertex {i} must be sorted without duplicates")
            if nbrs and (nbrs[0] < 0 or nbrs[-1] >= self.right_count):
                raise GraphError(f"adjacency of left vertex {i} names a right vertex out of range")
            cleaned.append(nbrs)
        self.adjacency = tuple(cleaned)

    @staticmethod
    def from_edge_mask(mask: np.ndarray) -> "BipartiteGraph":
        """Build from a boolean left x right matrix."""
        mask = np.asarray(mask, dtype=bool)
        return BipartiteGraph(
            left_count=mask.shape[0],
            right_count=mask.shape[1],
            adjacency=tuple(tuple(np.flatnonzero(row).tolist()) for row in mask),
        )

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(self.left_count + 1, dtype=np.int32)
        for i, nbrs in enumerate(self.adjacency):
            indptr[i + 1] = indptr[i] + len(nbrs)
        indices = np.fromiter(
            (j for nbrs in self.adjacency for j in nbrs), dtype=np.int32, count=int(indptr[-1])
        )
        return indptr, indices

    def debug_dump(self) -> str:
        """One left vertex per line: ``i: j1 j2 ...``."""
        return "\n".join(f"{i}: " + " ".join(str(j) for j in nbrs) for i, nbrs in enumerate(self.adjacency))


@dataclass
class RMatching:
    """Per-left-vertex lists of assigned right vertices."""

    assignment: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_right_owner(owner: np.ndarray, left_count: int) -> "RMatching":
        lists: list[list[int]] = [[] for _ in range(left_count)]
        for j, i in enumerate(owner.tolist()):
            lists[i].append(j)
        return RMatching(assignment=tuple(tuple(lst) for lst in lists))


def find_perfect_r_matching(g: BipartiteGraph, r: int) -> Optional[RMatching]:
    """A perfect r-matching of g, or None if none exists.

    Raises DimensionMismatch when right_count != r * left_count (perfection
    is impossible by counting, which is distinct from structural failure).
    """
    if r < 1:
        raise GraphError("r must be at least 1")
    if g.right_count != r * g.left_count:
        raise DimensionMismatch(
            f"right_count {g.right_count} != r * left_count = {r * g.left_count}"
        )
    indptr, indices = g.csr()
    owner = _backend.kernels.solve_r_matching(indptr, indices, g.left_count, g.right_count, r)
    if owner is None:
        return None
    return RMatching.from_right_owner(owner, g.left_count)


def hall_violation_search(g: BipartiteGraph, r: int) -> Optional[tuple[int, ...]]:
    """Some left subset S with |N(S)| < r|S|, or None if none exists.

    Exhaustive over all 2**left_count subsets, so limited to left_count <= 20.
    When right_count == r * left_count, None here is equivalent to a perfect
    r-matching existing.
    """
    if r < 1:
        raise GraphError("r must be at least 1")
    if g.left_count > 20:
        raise GraphError("exhaustive search limited to left_count <= 20")
    nbr_masks = [sum(1 << j for j in nbrs) for nbrs in g.adjacency]
    for subset in range(1, 1 << g.left_count):
        union = 0
        size = 0
        s = subset
        while s:
            i = (s & -s).bit_length() - 1
            union |= nbr_masks[i]
            size += 1
            s &= s - 1
        if union.bit_count() < r * size:
            return tuple(i for i in range(g.left_count) if subset >> i & 1)
    return None


def validate_r_matching(g: BipartiteGraph, matching: RMatching, r: int) -> bool:
    """True iff ``matching`` is a perfect r-matching and a subgraph of g."""
    if len(matching.assignment) != g.left_count:
        return False
    used: set[int] = set()
    for i, taken in enumerate(matching.assignment):
        if len(taken) != r:
            return False
        nbrs = set(g.adjacency[i])
        for j in taken:
            if j in used or j not in nbrs:
                return False
            used.add(j)
    return len(used) == g.right_count
