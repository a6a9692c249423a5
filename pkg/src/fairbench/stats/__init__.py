"""Statistical kernel: ranking, hypothesis tests and multiple-comparison corrections."""

from ._base import (
    DegenerateSampleError,
    Direction,
    InvalidInputError,
    SampleSizeError,
    StatsError,
    TestResult,
    UnsupportedDesignError,
)
from .assumptions import ks_normality, levene, shapiro_wilk, shapiro_wilk_coefficients
from .correction import CorrectionMethod, adjust_pvalues
from .friedman import friedman
from .pairwise import t_test_paired, welch_t, wilcoxon_exact_pvalue, wilcoxon_signed_rank
from .ranking import RankMatrix, average_ranks, count_wins, rank_rows

__all__ = [
    "CorrectionMethod",
    "DegenerateSampleError",
    "Direction",
    "InvalidInputError",
    "RankMatrix",
    "SampleSizeError",
    "StatsError",
    "TestResult",
    "UnsupportedDesignError",
    "adjust_pvalues",
    "average_ranks",
    "count_wins",
    "friedman",
    "ks_normality",
    "levene",
    "rank_rows",
    "shapiro_wilk",
    "shapiro_wilk_coefficients",
    "t_test_paired",
    "welch_t",
    "wilcoxon_exact_pvalue",
    "wilcoxon_signed_rank",
]
