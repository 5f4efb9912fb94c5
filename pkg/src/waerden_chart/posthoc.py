"""Conover-Iman pairwise comparisons on normal scores, and one-way ANOVA."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .adjust import adjust_p
from .errors import DegenerateSampleError, DomainError
from .numerics import f_sf, t_quantile, t_sf
from .scores import WAERDEN_OFFSET, GroupedSample, inverse_normal_scores
from .waerden import WaerdenOutcome, waerden_test


@dataclass(frozen=True)
class PairComparison:
    i: int
    j: int
    label_i: str
    label_j: str
    statistic: float
    threshold: float
    t_value: float
    raw_p: float
    adjusted_p: float
    significant: bool


@dataclass(frozen=True)
class PosthocTable:
    rows: tuple[PairComparison, ...]
    alpha: float
    df: int
    adjust_method: str
    omnibus_reject: bool

    def lookup(self, a: str, b: str) -> PairComparison:
        for row in self.rows:
            if {row.label_i, row.label_j} == {a, b}:
                return row
        raise KeyError((a, b))


@dataclass(frozen=True)
class AnovaOutcome:
    F: float
    df1: int
    df2: int
    p: float


def conover_iman(sample: GroupedSample, outcome: WaerdenOutcome | None = None,
                 alpha: float = 0.05, adjust_method: str = "bh",
                 offset_c: float = WAERDEN_OFFSET) -> PosthocTable:
    """All-pairs comparison of group score means with a pooled t reference.

    Pair (i, j) differs when |mean_i - mean_j| exceeds
    t(1 - alpha/2; n - g) * sqrt(S^2 (n - 1 - W) / (n - g) * (1/n_i + 1/n_j)).
    The two-sided raw p-value comes from the same t statistic; significance
    is judged on the adjusted p-value (BH by default). Rows are produced even
    when the omnibus test does not reject; ``omnibus_reject`` records that.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if outcome is None:
        outcome = waerden_test(sample, offset_c)
    scores = inverse_normal_scores(sample, offset_c)
    n, g = sample.n, sample.g
    if n <= g:
        raise DomainError(f"post-hoc comparisons need n > g, got n={n}, g={g}")
    df = n - g
    radicand_base = scores.pooled_variance * (n - 1 - outcome.W) / df
    if not radicand_base > 0.0:
        raise DegenerateSampleError(
            f"W = {outcome.W:.6g} >= n - 1 = {n - 1}; pooled post-hoc variance is not positive")
    t_crit = t_quantile(1.0 - alpha / 2.0, df)
    means = scores.group_means
    sizes = sample.sizes
    pairs = list(combinations(range(g), 2))
    stats, thresholds, tvals, raw = [], [], [], []
    for i, j in pairs:
        se = math.sqrt(radicand_base * (1.0 / sizes[i] + 1.0 / sizes[j]))
        diff = abs(float(means[i] - means[j]))
        t = diff / se
        stats.append(diff)
        thresholds.append(t_crit * se)
        tvals.append(t)
        raw.append(min(1.0, 2.0 * t_sf(t, df)))
    adjusted = adjust_p(raw, adjust_method)
    rows = tuple(
        PairComparison(i, j, sample.labels[i], sample.labels[j], s, thr, t, rp, ap, ap < alpha)
        for (i, j), s, thr, t, rp, ap in zip(pairs, stats, thresholds, tvals, raw, adjusted)
    )
    return PosthocTable(rows, float(alpha), df, adjust_method, outcome.p_chisq < alpha)


def anova_arrays(values: np.ndarray, sizes: Sequence[int]) -> AnovaOutcome:
    n, g = values.size, len(sizes)
    if not n > g >= 2:
        raise DomainError(f"ANOVA needs n > g >= 2, got n={n}, g={g}")
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    sizes_f = np.asarray(sizes, dtype=float)
    means = np.add.reduceat(values, starts) / sizes_f
    grand = values.mean()
    ss_between = float(np.dot(sizes_f, (means - grand) ** 2))
    ss_within = float(np.sum((values - np.repeat(means, sizes)) ** 2))
    if not ss_within > 0.0:
        raise DegenerateSampleError("zero within-group variance; F is undefined")
    df1, df2 = g - 1, n - g
    f = (ss_between / df1) / (ss_within / df2)
    return AnovaOutcome(f, df1, df2, f_sf(f, df1, df2))


def anova_f(sample: GroupedSample) -> AnovaOutcome:
    """Classical one-way ANOVA F test."""
    return anova_arrays(sample.pooled(), sample.sizes)
