import itertools
from math import comb

import pytest
from hypothesis import given, strategies as st

from mvdarboux.graded_basis import (
    CapacityError,
    GradedBasis,
    block_size,
    compare,
    cumulative_dim,
    homogeneous_indices,
    window_size,
)


def brute_block(dim, k):
    """Independent enumeration: all exponent vectors of degree k, lexicographically decreasing."""
    return sorted((a for a in itertools.product(range(k + 1), repeat=dim) if sum(a) == k), reverse=True)


@pytest.mark.parametrize("dim,k,expected", [(2, 3, 4), (1, 7, 1), (3, 2, 6)])
def test_block_size(dim, k, expected):
    assert block_size(dim, k) == expected


@pytest.mark.parametrize("dim,k,expected", [(2, 3, 10), (2, -1, 0), (4, 2, 15)])
def test_cumulative_dim(dim, k, expected):
    assert cumulative_dim(dim, k) == expected


@pytest.mark.parametrize("dim,k,m,expected", [(2, 0, 2, 3), (2, 1, 2, 5), (3, 2, 1, 6)])
def test_window_size(dim, k, m, expected):
    assert window_size(dim, k, m) == expected


def test_compare_examples():
    block = brute_block(2, 1)
    assert block == [(1, 0), (0, 1)]
    assert compare((1, 0), (0, 1)) == -1
    assert compare((0, 1), (1, 0)) == 1
    assert compare((0, 2), (1, 0)) == 1
    assert compare((2, 1), (2, 1)) == 0


def test_compare_dimension_mismatch():
    with pytest.raises(ValueError):
        compare((1, 0), (1, 0, 0))


def test_shifted_position_examples():
    b2 = GradedBasis(2, 4)
    assert b2.shifted_position((0, 0), 0) == b2.position((1, 0)) == 1
    # enumeration: 1 | x y | x2 xy y2 | x3 x2y xy2 y3
    assert b2.shifted_position((1, 1), 1) == 8
    b3 = GradedBasis(3, 3)
    flat = [a for k in range(4) for a in brute_block(3, k)]
    assert b3.shifted_position((0, 0, 2), 2) == flat.index((0, 0, 3))


def test_shift_overflow():
    b = GradedBasis(2, 2)
    with pytest.raises(IndexError):
        b.shifted_position((1, 1), 0)


def test_layout_matches_enumeration():
    for dim in range(1, 5):
        for k in range(6):
            assert list(homogeneous_indices(dim, k)) == brute_block(dim, k)


def test_capacity_refused():
    with pytest.raises(CapacityError):
        GradedBasis(12, 40)


@given(st.integers(1, 4), st.integers(0, 8))
def test_block_sizes_sum_to_cumulative(dim, k):
    assert sum(block_size(dim, j) for j in range(k + 1)) == cumulative_dim(dim, k)
    assert cumulative_dim(dim, k) == comb(dim + k, dim)


@given(st.integers(1, 4), st.integers(0, 6), st.integers(0, 6))
def test_window_size_both_ways(dim, k, m):
    direct = sum(block_size(dim, j) for j in range(k, k + m))
    assert window_size(dim, k, m) == direct == cumulative_dim(dim, k + m - 1) - cumulative_dim(dim, k - 1)


@given(st.integers(1, 4), st.integers(0, 5))
def test_position_bijection_and_offsets(dim, L):
    b = GradedBasis(dim, L)
    assert all(b.index_of[b.multiindex_at[i]] == i for i in range(len(b)))
    for k in range(L + 1):
        assert b.block_offsets[k] == cumulative_dim(dim, k - 1)
        assert b.block_offsets[k + 1] - b.block_offsets[k] == block_size(dim, k)
        assert all(sum(a) == k for a in b.block(k))


@given(st.integers(1, 3), st.integers(0, 4), st.data())
def test_compare_agrees_with_positions(dim, L, data):
    b = GradedBasis(dim, L)
    i = data.draw(st.integers(0, len(b) - 1))
    j = data.draw(st.integers(0, len(b) - 1))
    l = data.draw(st.integers(0, len(b) - 1))
    a, c, e = b.multiindex_at[i], b.multiindex_at[j], b.multiindex_at[l]
    assert compare(a, c) == (i > j) - (i < j)
    assert compare(a, c) == -compare(c, a)
    if compare(a, c) <= 0 and compare(c, e) <= 0:
        assert compare(a, e) <= 0
