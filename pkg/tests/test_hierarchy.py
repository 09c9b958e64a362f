"""Structure of the recursive triangle hierarchy."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hmvp import (
    CORNER_SLOT_NEIGHBORS,
    Family,
    HierarchyTemplate,
    NodeKind,
    template_for,
)
from hmvp.errors import LevelOutOfRange
from hmvp.hierarchy import NodeAddress

LEVELS = st.integers(min_value=0, max_value=8)


def test_counts_level_zero():
    tpl = template_for(0)
    assert tpl.node_count(0) == 3
    with pytest.raises(LevelOutOfRange):
        tpl.cluster_count(0)  # clusters only exist from level 1 up


@pytest.mark.parametrize("level,n", [(0, 3), (1, 6), (2, 15), (3, 42), (4, 123)])
def test_node_counts(level, n):
    assert template_for(level).node_count(level) == n


@given(LEVELS.filter(lambda k: k >= 1))
def test_count_recurrence(level):
    # gluing three copies at shared corners: n(k) = 3 n(k-1) - 3
    tpl = template_for(level)
    assert tpl.node_count(level) == 3 * tpl.node_count(level - 1) - 3


@given(LEVELS.filter(lambda k: k >= 1))
def test_junctions_are_previous_level(level):
    tpl = template_for(level)
    assert tpl.junction_count(level) == tpl.node_count(level - 1)
    assert tpl.interior_count(level) == 3 * tpl.cluster_count(level)
    assert tpl.cluster_count(level) == 3 ** (level - 1)


@given(LEVELS)
def test_cells_partition_is_exact(level):
    tpl = template_for(level)
    cells = tpl.cells(level)
    assert len(cells) == 3 ** level
    seen = set()
    for cell in cells:
        assert len(cell) == 3
        assert cell == tuple(sorted(cell))
        seen.update(cell)
    # cells cover all nodes; shared corners appear in multiple cells
    assert seen == set(range(tpl.node_count(level)))


@given(LEVELS.filter(lambda k: k >= 1))
def test_cluster_layout(level):
    tpl = template_for(level)
    nj = tpl.junction_count(level)
    clusters = tpl.clusters(level)
    cells_prev = tpl.cells(level - 1)
    for c in clusters:
        assert c.level == level
        # corners of cluster c are exactly the previous level's cell c
        assert c.corners == cells_prev[c.index]
        assert all(idx < nj for idx in c.corners)
        assert c.interiors == (nj + 3 * c.index, nj + 3 * c.index + 1,
                               nj + 3 * c.index + 2)


@given(LEVELS.filter(lambda k: k >= 1))
def test_corners_array_matches_clusters(level):
    tpl = template_for(level)
    arr = tpl.corners_array(level)
    assert arr.shape == (tpl.cluster_count(level), 3)
    assert arr.dtype == np.int64
    assert not arr.flags.writeable
    for c in tpl.clusters(level):
        assert tuple(arr[c.index]) == c.corners


def test_junction_relabel_is_stable():
    tpl = template_for(5)
    for level in range(1, 6):
        relabel = tpl.junction_relabel(level)
        assert np.array_equal(relabel, np.arange(tpl.junction_count(level)))


@given(LEVELS.filter(lambda k: k >= 1))
def test_adjacency_masks(level):
    tpl = template_for(level)
    permissive = tpl.adjacency_mask(level)
    strict = tpl.adjacency_mask(level, strict=True)
    n = tpl.node_count(level)
    assert permissive.shape == (n, n)
    assert np.array_equal(permissive, permissive.T)
    # strict is a sub-pattern of permissive; diagonal handled separately
    assert not np.any(strict & ~permissive)
    assert not np.any(np.diag(permissive))
    nj = tpl.junction_count(level)
    # junction-junction off-diagonal entries are never allowed
    jun_block = permissive[:nj, :nj]
    assert not np.any(jun_block & ~np.eye(nj, dtype=bool))
    # strict couples each corner slot to exactly two interiors
    for c in tpl.clusters(level):
        for slot, corner in enumerate(c.corners):
            allowed = {c.interiors[s] for s in CORNER_SLOT_NEIGHBORS[slot]}
            actual = {j for j in c.interiors if strict[corner, j]}
            assert actual == allowed


def test_node_address_round_trip():
    tpl = template_for(3)
    n = tpl.node_count(3)
    for idx in range(n):
        addr = tpl.node_address(3, idx)
        assert tpl.address_to_index(3, addr) == idx
        if idx < tpl.junction_count(3):
            assert addr.kind is NodeKind.JUNCTION
            assert addr.prev_index == idx
        else:
            assert addr.kind is NodeKind.INTERIOR
            cluster = tpl.clusters(3)[addr.cluster]
            assert cluster.interiors[addr.slot] == idx


def test_root_index_is_identity_under_stable_labels():
    # indices never change as levels refine, so following a junction down
    # the hierarchy lands on the same number
    tpl = template_for(3)
    for idx in range(tpl.node_count(3)):
        assert tpl.root_index(3, idx) == idx


def test_level_bounds():
    tpl = HierarchyTemplate(max_level=4)
    assert tpl.family is Family.SIERPINSKI
    with pytest.raises(LevelOutOfRange):
        tpl.node_count(5)
    with pytest.raises(LevelOutOfRange):
        tpl.clusters(-1)
    with pytest.raises(LevelOutOfRange):
        tpl.clusters(0)  # no clusters below level 1


def test_template_for_bounds():
    with pytest.raises(LevelOutOfRange):
        template_for(-1)


def test_address_validation():
    tpl = template_for(2)
    with pytest.raises(LevelOutOfRange):
        tpl.node_address(2, tpl.node_count(2))
    bad = NodeAddress(kind=NodeKind.INTERIOR, cluster=99, slot=0)
    with pytest.raises(LevelOutOfRange):
        tpl.address_to_index(2, bad)
