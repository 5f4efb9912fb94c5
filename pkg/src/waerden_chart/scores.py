"""Grouped samples, midranks and rank-based inverse normal scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSampleError, DomainError
from .numerics import normal_quantile

WAERDEN_OFFSET = 0.0
BLOM_OFFSET = 3.0 / 8.0


@dataclass(frozen=True)
class GroupedSample:
    """A one-factor layout: ``groups[k]`` holds the responses of ``labels[k]``."""

    labels: tuple[str, ...]
    groups: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.labels) != len(self.groups):
            raise DomainError("labels and groups differ in length")
        if len(self.labels) < 2:
            raise DomainError(f"need at least two groups, got {len(self.labels)}")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError(f"group labels must be distinct: {self.labels}")
        for label, values in zip(self.labels, self.groups):
            if len(values) == 0:
                raise DomainError(f"group {label!r} is empty")
            if not all(math.isfinite(v) for v in values):
                raise DomainError(f"group {label!r} contains a non-finite value")

    @classmethod
    def from_groups(cls, groups: Sequence[Iterable[float]],
                    labels: Sequence[str] | None = None) -> "GroupedSample":
        groups = [tuple(float(v) for v in grp) for grp in groups]
        if labels is None:
            labels = [_default_label(k) for k in range(len(groups))]
        return cls(tuple(str(lab) for lab in labels), tuple(groups))

    @classmethod
    def from_mapping(cls, data: dict[str, Iterable[float]]) -> "GroupedSample":
        return cls.from_groups(list(data.values()), list(data.keys()))

    @property
    def g(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(grp) for grp in self.groups)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def observations(self) -> list[tuple[int, float]]:
        """(1-based group index, value) pairs in group order."""
        return [(k + 1, v) for k, grp in enumerate(self.groups) for v in grp]

    def pooled(self) -> np.ndarray:
        return np.fromiter((v for grp in self.groups for v in grp), dtype=float, count=self.n)


def _default_label(k: int) -> str:
    letters = ""
    k += 1
    while k:
        k, rem = divmod(k - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def midranks(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Ranks 1..n, tied values sharing the mean of the positions they span."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("midranks needs a nonempty 1-d sequence")
    if not np.all(np.isfinite(x)):
        raise DomainError("midranks needs finite values")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(x.size, dtype=float)
    if x.size == 1 or np.all(xs[1:] != xs[:-1]):
        ranks[order] = np.arange(1, x.size + 1, dtype=float)
        return ranks
    _, first, counts = np.unique(xs, return_index=True, return_counts=True)
    # positions first+1 .. first+count averaged
    tied = first + (counts + 1) / 2.0
    ranks[order] = np.repeat(tied, counts)
    return ranks


@lru_cache(maxsize=8192)
def _score(twice_rank: int, n: int, offset_c: float) -> float:
    # upper ranks mirror lower ones so that scores are exactly antisymmetric
    twice_mirror = 2 * (n + 1) - twice_rank
    if twice_rank > twice_mirror:
        return -_score(twice_mirror, n, offset_c)
    return normal_quantile((twice_rank / 2.0 - offset_c) / (n - 2.0 * offset_c + 1.0))


@lru_cache(maxsize=256)
def _integer_rank_scores(n: int, offset_c: float) -> np.ndarray:
    table = np.array([_score(2 * r, n, offset_c) for r in range(1, n + 1)])
    table.setflags(write=False)
    return table


def rank_scores(ranks: np.ndarray, offset_c: float = WAERDEN_OFFSET) -> np.ndarray:
    """Map (mid)ranks among n pooled values to inverse normal scores."""
    n = ranks.size
    idx = ranks.astype(np.int64)
    if np.all(idx == ranks):
        return _integer_rank_scores(n, float(offset_c))[idx - 1]
    twice = np.rint(2.0 * ranks).astype(np.int64)
    return np.array([_score(int(t), n, float(offset_c)) for t in twice])


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Pooled midranks and normal scores, plus per-group score means.

    ``ranks`` and ``scores`` follow the pooled order of the sample (group by
    group). ``pooled_variance`` is the uncentred mean square
    sum(V^2) / (n - 1). ``mean_of_means`` is the unweighted average of the
    group means; no test statistic uses it.
    """

    ranks: np.ndarray
    scores: np.ndarray
    sizes: tuple[int, ...]
    group_means: np.ndarray
    pooled_variance: float
    offset_c: float

    @property
    def n(self) -> int:
        return int(self.ranks.size)

    @property
    def mean_of_means(self) -> float:
        return float(np.mean(self.group_means))

    @property
    def group_sums(self) -> np.ndarray:
        return self.group_means * np.asarray(self.sizes)


def _check_offset(offset_c: float) -> None:
    if not (math.isfinite(offset_c) and 0.0 <= offset_c < 0.5):
        raise DomainError(f"offset_c must lie in [0, 0.5), got {offset_c!r}")


def score_arrays(values: np.ndarray, sizes: Sequence[int],
                 offset_c: float = WAERDEN_OFFSET) -> ScoreSet:
    """Array-level core of :func:`inverse_normal_scores` (no label handling)."""
    ranks = midranks(values)
    scores = rank_scores(ranks, offset_c)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    sums = np.add.reduceat(scores, starts)
    means = sums / np.asarray(sizes, dtype=float)
    s2 = float(np.dot(scores, scores)) / (ranks.size - 1)
    if not s2 > 0.0:
        raise DegenerateSampleError("all pooled values are identical; score variance is zero")
    for arr in (ranks, scores, means):
        arr.setflags(write=False)
    return ScoreSet(ranks, scores, tuple(int(s) for s in sizes), means, s2, float(offset_c))


def inverse_normal_scores(sample: GroupedSample, offset_c: float = WAERDEN_OFFSET) -> ScoreSet:
    """Scores Phi^-1((R - c) / (n - 2c + 1)) from pooled midranks R.

    ``offset_c = 0`` gives van der Waerden scores, ``3/8`` the Blom variant.
    Ties are decided by exact float equality; round the data beforehand if
    near-equal values should tie.
    """
    _check_offset(offset_c)
    return score_arrays(sample.pooled(), sample.sizes, offset_c)
