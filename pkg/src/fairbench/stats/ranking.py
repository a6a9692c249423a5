"""Row-wise ranking of an algorithms-by-problems results table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._base import Direction, InvalidInputError, as_matrix


@dataclass(frozen=True)
class RankMatrix:
    ranks: np.ndarray
    direction: Direction = Direction.LOWER_IS_BETTER

    @property
    def n_subjects(self) -> int:
        return self.ranks.shape[0]

    @property
    def k(self) -> int:
        return self.ranks.shape[1]


def _oriented(values, direction, min_columns=2) -> np.ndarray:
    m = as_matrix(values)
    if m.shape[1] < min_columns:
        raise InvalidInputError(f"need at least {min_columns} columns")
    direction = Direction(direction)
    return m if direction is Direction.LOWER_IS_BETTER else -m


def rank_rows(values, direction=Direction.LOWER_IS_BETTER) -> RankMatrix:
    """Rank each row; rank 1 is the best entry, ties share their mean rank."""
    m = _oriented(values, direction)
    return RankMatrix(rankdata(m, method="average", axis=1), Direction(direction))


def average_ranks(ranks: RankMatrix) -> np.ndarray:
    return ranks.ranks.mean(axis=0)


def count_wins(values, direction=Direction.LOWER_IS_BETTER) -> np.ndarray:
    """Per column, the number of rows in which it is (tied-)best.

    Every column sharing the best value of a row is credited, so the total
    can exceed the number of rows.
    """
    m = _oriented(values, direction, min_columns=1)
    best = m.min(axis=1, keepdims=True)
    return (m == best).sum(axis=0).astype(int)
