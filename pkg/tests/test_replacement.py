import numpy as np
from hypothesis import given, strategies as st

from occlab import replacement as rp


def test_tree_levels():
    assert rp.tree_levels(1) == 0
    assert rp.tree_levels(2) == 1
    assert rp.tree_levels(4) == 2
    assert rp.tree_levels(8) == 3
    assert rp.tree_levels(14) == 4
    assert rp.tree_levels(16) == 4


def test_plru_four_way_sequence():
    # touch 0,1,2,3 in order: LRU is way 0, then touching 0 moves it to 1
    bits = 0
    for w in (0, 1, 2, 3):
        bits = rp.tree_plru_touch(bits, w, 4)
    assert rp.tree_plru_select(bits, 4) == 0
    bits = rp.tree_plru_touch(bits, 0, 4)
    assert rp.tree_plru_select(bits, 4) == 1


def test_plru_tracks_single_hot_way():
    bits = 0
    for w in (0, 1, 2, 3, 4, 5, 6, 7):
        bits = rp.tree_plru_touch(bits, w, 8)
    for _ in range(20):
        v = rp.tree_plru_select(bits, 8)
        bits = rp.tree_plru_touch(bits, v, 8)
        # the victim just touched is never re-selected immediately
        assert rp.tree_plru_select(bits, 8) != v


@given(st.integers(min_value=0, max_value=(1 << 15) - 1))
def test_plru_select_in_range_when_overprovisioned(bits):
    assert 0 <= rp.tree_plru_select(bits, 14) < 14


def test_oldest_way_ties_go_low():
    assert rp.oldest_way([5, 2, 2, 9]) == 1
    assert rp.oldest_way([0, 0, 0, 0]) == 0
    assert rp.oldest_way(np.array([7, 1, 3], dtype=np.uint64)) == 1


def test_srrip_basic():
    row = [rp.SRRIP_MAX, 0, 1, 2]
    assert rp.srrip_select(row) == 0
    assert row == [3, 0, 1, 2]  # direct hit at max ages nothing


def test_srrip_ages_until_max():
    row = np.array([2, 2, 0, 2], dtype=np.int64)
    assert rp.srrip_select(row) == 0
    assert row.tolist() == [3, 3, 1, 3]


def test_srrip_prefers_lowest_index():
    row = [1, 2, 2, 1]
    assert rp.srrip_select(row) == 1
    assert row == [2, 3, 3, 2]
