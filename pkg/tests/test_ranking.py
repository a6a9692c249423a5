import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from conftest import TABLE4, hand_rank
from fairbench.stats import Direction, InvalidInputError, average_ranks, count_wins, rank_rows


def test_full_tie_gets_mean_rank():
    np.testing.assert_array_equal(rank_rows([[5, 5, 5]]).ranks, [[2, 2, 2]])


def test_table4_row_f2_ordering():
    np.testing.assert_array_equal(rank_rows([[1.00e03, 1.26e03, 1.40e03, 1.27e03]]).ranks, [[1, 2, 4, 3]])


def test_sorted_row_lower_is_better():
    np.testing.assert_array_equal(rank_rows([[1, 2, 3]]).ranks, [[1, 2, 3]])


def test_higher_is_better_reverses():
    np.testing.assert_array_equal(rank_rows([[1, 2, 3]], Direction.HIGHER_IS_BETTER).ranks, [[3, 2, 1]])


def test_non_finite_entry_names_position():
    with pytest.raises(InvalidInputError, match=r"row 1.*column 2"):
        rank_rows([[1, 2, 3], [1, 2, np.nan]])


def test_average_ranks_all_tied():
    np.testing.assert_array_equal(average_ranks(rank_rows(np.ones((15, 4)))), [2.5] * 4)


def test_average_ranks_table4_against_hand_ranking():
    avg = average_ranks(rank_rows(TABLE4))
    hand = np.array([hand_rank(r) for r in TABLE4])
    assert hand.sum() == 150
    np.testing.assert_allclose(avg, hand.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(avg, [1.400, 2.300, 2.933, 3.367], atol=5e-4)


def test_average_ranks_single_row():
    np.testing.assert_array_equal(average_ranks(rank_rows([[1, 2]])), [1.0, 2.0])


def test_count_wins_table4():
    np.testing.assert_array_equal(count_wins(TABLE4), [12, 1, 0, 2])


def test_count_wins_identical_columns_all_credited():
    np.testing.assert_array_equal(count_wins(np.ones((7, 3))), [7, 7, 7])


def test_count_wins_single_row():
    np.testing.assert_array_equal(count_wins([[3, 1, 2]]), [0, 1, 0])


matrices = hnp.arrays(
    np.float64,
    st.tuples(st.integers(1, 8), st.integers(2, 6)),
    elements=st.integers(-5, 5).map(float),
)


@given(matrices)
def test_row_sums_and_bounds(m):
    r = rank_rows(m).ranks
    k = m.shape[1]
    np.testing.assert_array_equal(r.sum(axis=1), np.full(m.shape[0], k * (k + 1) / 2))
    assert r.min() >= 1 and r.max() <= k
    np.testing.assert_array_equal(r, [hand_rank(row) for row in m])


@given(matrices)
def test_monotone_transform_keeps_ranks(m):
    np.testing.assert_array_equal(rank_rows(m).ranks, rank_rows(np.exp(m) * 3 + 1).ranks)
