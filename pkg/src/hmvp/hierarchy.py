"""Hierarchical triangle template underlying the supported covariance graphs.

The level-0 graph is a single triangle on nodes {0, 1, 2}. Each refinement
step replaces every triangular cell with three smaller cells, creating one
new midpoint node per edge of the old cell. Nodes accumulate: the nodes of
level k-1 (the "junctions" of level k) keep their indices, and the 3**(k-1)
clusters of level k each contribute three fresh interior nodes, appended in
cluster order. The junction segment of level k is therefore ordered exactly
like the nodes of level k-1, and collapsing a level onto its junctions never
requires relabeling.

Gluing convention
-----------------
Cluster c at level k sits on triangular cell c of level k-1. Writing the
cell's node indices in increasing order as (u, v, w), the cluster's interior
nodes are the three consecutive indices J + 3c, J + 3c + 1, J + 3c + 2
(J = junction count), interpreted as the midpoints of edges (u,v), (u,w),
(v,w) in that order. The child cells are (u, m_uv, m_uw), (v, m_uv, m_vw),
(w, m_uw, m_vw), appended in cluster order. Corner slot t of a cluster
touches the two interiors on its incident edges: slot 0 touches interior
slots {0, 1}, slot 1 touches {0, 2}, slot 2 touches {1, 2}. Any consistent
convention would do; this one is fixed so that files and indices are stable
across runs and implementations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import LevelOutOfRange

#: corner slot t is adjacent to these interior slots within a cluster
CORNER_SLOT_NEIGHBORS = ((0, 1), (0, 2), (1, 2))

DEFAULT_MAX_LEVEL = 8


class Family(enum.Enum):
    """Supported hierarchy families (extension point; one family ships)."""

    SIERPINSKI = "sierpinski"


class NodeKind(enum.Enum):
    JUNCTION = "junction"
    INTERIOR = "interior"


@dataclass(frozen=True)
class Cluster:
    """One cluster: three corner (junction) nodes and three interior nodes."""

    level: int
    index: int
    corners: tuple[int, int, int]
    interiors: tuple[int, int, int]


@dataclass(frozen=True)
class NodeAddress:
    """Level-relative address of a node.

    A junction node is addressed by its index at the previous level (which
    can be resolved again there, down to level 0). An interior node is
    addressed by its (cluster, slot) pair at the current level.
    """

    kind: NodeKind
    prev_index: int | None = None
    cluster: int | None = None
    slot: int | None = None


@dataclass(frozen=True)
class HierarchyTemplate:
    """Combinatorics of one hierarchy family up to a maximum level.

    Immutable and cheap to construct; per-level tables are cached at module
    scope, so templates can be created freely and shared across threads.
    """

    family: Family = Family.SIERPINSKI
    max_level: int = DEFAULT_MAX_LEVEL

    def __post_init__(self):
        if not isinstance(self.family, Family):
            raise LevelOutOfRange(f"unknown family {self.family!r}")
        if not isinstance(self.max_level, int) or self.max_level < 1:
            raise LevelOutOfRange(f"max_level must be an integer >= 1, got {self.max_level!r}")

    # counts ---------------------------------------------------------------

    def node_count(self, level: int) -> int:
        """Total nodes at `level`: (3**(level+1) + 3) / 2."""
        self._check(level)
        return _node_count(level)

    def junction_count(self, level: int) -> int:
        """Junction nodes at `level` (= all nodes of level-1); level >= 1."""
        self._check(level, low=1)
        return _node_count(level - 1)

    def interior_count(self, level: int) -> int:
        """Interior nodes at `level`: 3**level; level >= 1."""
        self._check(level, low=1)
        return 3 ** level

    def cluster_count(self, level: int) -> int:
        """Clusters at `level`: 3**(level-1); level >= 1."""
        self._check(level, low=1)
        return 3 ** (level - 1)

    # structure ------------------------------------------------------------

    def cells(self, level: int) -> tuple[tuple[int, int, int], ...]:
        """The 3**level triangular cells at `level`, each a sorted index triple."""
        self._check(level)
        return _cells(level)

    def clusters(self, level: int) -> tuple[Cluster, ...]:
        """All clusters at `level` in canonical order; level >= 1."""
        self._check(level, low=1)
        return _clusters(level)

    def corners_array(self, level: int) -> np.ndarray:
        """Corner indices of every cluster, (m, 3) int64, read-only."""
        self._check(level, low=1)
        return _corners_array(level)

    def junction_relabel(self, level: int) -> np.ndarray:
        """Bijection from level-`level` junction indices to level-(level-1)

        node indices. The canonical ordering keeps junction indices stable
        across levels, so this is the identity permutation; it exists so
        callers need not hard-code that convention.
        """
        self._check(level, low=1)
        return np.arange(_node_count(level - 1), dtype=np.int64)

    def adjacency_mask(self, level: int, strict: bool = False) -> np.ndarray:
        """Boolean (n, n) matrix of node pairs allowed to couple at `level`.

        The diagonal is False. Level 0 allows every off-diagonal pair.
        At higher levels junction pairs never couple. Permissive mode
        (default) allows every corner-interior pair within a cluster;
        strict mode keeps only the refined-triangle edges (each corner
        couples to the two interiors on its incident cell edges). Interiors
        of one cluster always couple to each other.
        """
        self._check(level)
        n = _node_count(level)
        mask = np.zeros((n, n), dtype=bool)
        if level == 0:
            mask[:] = True
            np.fill_diagonal(mask, False)
            return mask
        for cl in _clusters(level):
            ii = np.array(cl.interiors)
            mask[np.ix_(ii, ii)] = True
            if strict:
                for t, corner in enumerate(cl.corners):
                    for s in CORNER_SLOT_NEIGHBORS[t]:
                        mask[corner, cl.interiors[s]] = True
                        mask[cl.interiors[s], corner] = True
            else:
                cc = np.array(cl.corners)
                mask[np.ix_(cc, ii)] = True
                mask[np.ix_(ii, cc)] = True
        np.fill_diagonal(mask, False)
        return mask

    # addressing -----------------------------------------------------------

    def node_address(self, level: int, index: int) -> NodeAddress:
        """Resolve a node index at `level` (>= 1) to a junction/interior address."""
        self._check(level, low=1)
        n = _node_count(level)
        if not 0 <= index < n:
            raise LevelOutOfRange(f"node index {index} out of range for level {level}")
        jun = _node_count(level - 1)
        if index < jun:
            return NodeAddress(kind=NodeKind.JUNCTION, prev_index=index)
        offset = index - jun
        return NodeAddress(kind=NodeKind.INTERIOR, cluster=offset // 3, slot=offset % 3)

    def address_to_index(self, level: int, address: NodeAddress) -> int:
        """Inverse of node_address at the same level."""
        self._check(level, low=1)
        if address.kind is NodeKind.JUNCTION:
            jun = _node_count(level - 1)
            if address.prev_index is None or not 0 <= address.prev_index < jun:
                raise LevelOutOfRange(f"invalid junction address {address} at level {level}")
            return address.prev_index
        if (
            address.cluster is None
            or address.slot is None
            or not 0 <= address.cluster < 3 ** (level - 1)
            or not 0 <= address.slot < 3
        ):
            raise LevelOutOfRange(f"invalid interior address {address} at level {level}")
        return _node_count(level - 1) + 3 * address.cluster + address.slot

    def root_index(self, level: int, index: int) -> int:
        """Follow junction addresses down the hierarchy.

        Returns the level-0 index for nodes that date back to level 0,
        otherwise the index of the node at the level that created it.
        """
        self._check(level)
        k = level
        while k >= 1 and index < _node_count(k - 1):
            k -= 1
        return index

    def _check(self, level, low: int = 0) -> None:
        if not isinstance(level, (int, np.integer)) or isinstance(level, bool):
            raise LevelOutOfRange(f"level must be an integer, got {level!r}")
        if not low <= level <= self.max_level:
            raise LevelOutOfRange(
                f"level {level} outside [{low}, {self.max_level}] for this template"
            )


def template_for(level: int) -> HierarchyTemplate:
    """A template whose max_level covers `level` (at least the default)."""
    if not isinstance(level, (int, np.integer)) or isinstance(level, bool) or level < 0:
        raise LevelOutOfRange(f"level must be an integer >= 0, got {level!r}")
    return HierarchyTemplate(max_level=max(int(level), DEFAULT_MAX_LEVEL))


# cached per-level tables (family is Sierpinski; keyed by level only) --------


def _node_count(level: int) -> int:
    return (3 ** (level + 1) + 3) // 2


@lru_cache(maxsize=None)
def _cells(level: int) -> tuple[tuple[int, int, int], ...]:
    if level == 0:
        return ((0, 1, 2),)
    prev = _cells(level - 1)
    jun = _node_count(level - 1)
    out = []
    for c, (u, v, w) in enumerate(prev):
        m_uv, m_uw, m_vw = jun + 3 * c, jun + 3 * c + 1, jun + 3 * c + 2
        out.append((u, m_uv, m_uw))
        out.append((v, m_uv, m_vw))
        out.append((w, m_uw, m_vw))
    return tuple(out)


@lru_cache(maxsize=None)
def _clusters(level: int) -> tuple[Cluster, ...]:
    jun = _node_count(level - 1)
    out = []
    for c, corner_cell in enumerate(_cells(level - 1)):
        interiors = (jun + 3 * c, jun + 3 * c + 1, jun + 3 * c + 2)
        out.append(Cluster(level=level, index=c, corners=corner_cell, interiors=interiors))
    return tuple(out)


@lru_cache(maxsize=None)
def _corners_array(level: int) -> np.ndarray:
    arr = np.array([cl.corners for cl in _clusters(level)], dtype=np.int64)
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr
