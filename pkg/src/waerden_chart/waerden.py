"""Van der Waerden test and its additive per-group decomposition.

W = sum_g n_g * mean_g^2 / S^2 splits into per-group terms
E_g = n_g * mean_g^2 / S^2. Under the null each E_g is approximately
((n - n_g) / n) * chi2(1), i.e. gamma with shape 1/2 and rate
n / (2 (n - n_g)); the upper tail of that law gives an initial p-value per
group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .numerics import GammaParams, chisq_sf, gamma_sf
from .scores import WAERDEN_OFFSET, GroupedSample, ScoreSet, inverse_normal_scores


@dataclass(frozen=True)
class EgRecord:
    group_label: str
    n_g: int
    e_value: float
    null_dist: GammaParams
    p_initial: float
    share: float


@dataclass(frozen=True)
class WaerdenOutcome:
    W: float
    df: int
    p_chisq: float
    records: tuple[EgRecord, ...]
    shares_defined: bool = True

    @property
    def e_values(self) -> tuple[float, ...]:
        return tuple(r.e_value for r in self.records)

    @property
    def p_initial(self) -> tuple[float, ...]:
        return tuple(r.p_initial for r in self.records)


@dataclass(frozen=True)
class EgMoments:
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def eg_null_dist(n: int, n_g: int) -> GammaParams:
    if not 1 <= n_g < n:
        raise DomainError(f"need 1 <= n_g < n, got n_g={n_g}, n={n}")
    return GammaParams(0.5, n / (2.0 * (n - n_g)))


def eg_null_moments(n: int, n_g: int) -> EgMoments:
    """Closed-form moments of the gamma null of E_g (kurtosis non-excess)."""
    dist = eg_null_dist(n, n_g)
    mean = dist.shape / dist.rate
    variance = dist.shape / dist.rate ** 2
    skew = 2.0 / math.sqrt(dist.shape)
    kurt = 3.0 + 6.0 / dist.shape
    return EgMoments(mean, variance, skew, kurt)


def _check_layout(sizes: Sequence[int]) -> None:
    if len(sizes) < 2:
        raise DomainError("need at least two groups")
    n = sum(sizes)
    if any(s < 1 or s >= n for s in sizes):
        raise DomainError(f"every group needs 1 <= n_g < n, got sizes {tuple(sizes)}")


def e_values(scores: ScoreSet) -> np.ndarray:
    sizes = np.asarray(scores.sizes, dtype=float)
    return sizes * scores.group_means ** 2 / scores.pooled_variance


def statistic(scores: ScoreSet) -> float:
    sizes = np.asarray(scores.sizes, dtype=float)
    return float(np.dot(sizes, scores.group_means ** 2)) / scores.pooled_variance


def initial_p_values(e: Sequence[float], sizes: Sequence[int]) -> list[float]:
    n = sum(sizes)
    return [gamma_sf(float(ev), eg_null_dist(n, int(s))) for ev, s in zip(e, sizes)]


def _records(labels: Sequence[str], scores: ScoreSet) -> tuple[tuple[EgRecord, ...], bool]:
    e = e_values(scores)
    total = float(e.sum())
    n = scores.n
    defined = total > 0.0
    records = []
    for label, n_g, ev in zip(labels, scores.sizes, e):
        dist = eg_null_dist(n, n_g)
        share = float(ev) / total if defined else 1.0 / len(labels)
        records.append(EgRecord(label, int(n_g), float(ev), dist, gamma_sf(float(ev), dist), share))
    return tuple(records), defined


def eg_decompose(sample: GroupedSample, offset_c: float = WAERDEN_OFFSET) -> list[EgRecord]:
    """Per-group contributions E_g with their initial (upper-tail) p-values.

    When every group score mean is zero the shares fall back to 1/g.
    """
    _check_layout(sample.sizes)
    records, _ = _records(sample.labels, inverse_normal_scores(sample, offset_c))
    return list(records)


def waerden_test(sample: GroupedSample, offset_c: float = WAERDEN_OFFSET) -> WaerdenOutcome:
    _check_layout(sample.sizes)
    scores = inverse_normal_scores(sample, offset_c)
    return outcome_from_scores(sample.labels, scores)


def outcome_from_scores(labels: Sequence[str], scores: ScoreSet) -> WaerdenOutcome:
    w = statistic(scores)
    df = len(scores.sizes) - 1
    records, defined = _records(labels, scores)
    return WaerdenOutcome(w, df, chisq_sf(w, df), records, defined)
