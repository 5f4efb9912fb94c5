"""Multiplicity adjustment of p-values and the reject/accept decision.

Method names follow R's ``p.adjust``: bonferroni, holm, hochberg, hommel and
bh (Benjamini-Hochberg). Sorting is stable, so tied p-values keep their input
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

METHODS = ("bonferroni", "holm", "hochberg", "hommel", "bh")


@dataclass(frozen=True)
class AdjustmentResult:
    method: str
    raw: tuple[float, ...]
    adjusted: tuple[float, ...]
    alpha_nominal: float
    reject_flags: tuple[bool, ...]

    @property
    def overall_reject(self) -> bool:
        return any(self.reject_flags)


def _check_alpha(alpha: float, name: str = "alpha") -> None:
    if not (math.isfinite(alpha) and 0.0 <= alpha <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {alpha!r}")


def alpha_per_test(alpha_pf: float, G: int) -> float:
    """Per-test level giving family-wise level ``alpha_pf`` over G independent tests."""
    if not (math.isfinite(alpha_pf) and 0.0 < alpha_pf < 1.0):
        raise DomainError(f"alpha_pf must lie in (0, 1), got {alpha_pf!r}")
    if G < 1:
        raise DomainError(f"G must be >= 1, got {G!r}")
    if G == 1:
        return alpha_pf
    return -math.expm1(math.log1p(-alpha_pf) / G)


def alpha_per_family(alpha_pt: float, G: int) -> float:
    if not (math.isfinite(alpha_pt) and 0.0 < alpha_pt < 1.0):
        raise DomainError(f"alpha_pt must lie in (0, 1), got {alpha_pt!r}")
    if G < 1:
        raise DomainError(f"G must be >= 1, got {G!r}")
    return -math.expm1(G * math.log1p(-alpha_pt))


def _as_pvalues(raw: Sequence[float]) -> np.ndarray:
    p = np.asarray(raw, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("need a nonempty 1-d sequence of p-values")
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise DomainError("p-values must lie in [0, 1]")
    return p


def _bonferroni(p: np.ndarray) -> np.ndarray:
    return np.minimum(1.0, p.size * p)


def _holm(p: np.ndarray) -> np.ndarray:
    m = p.size
    order = np.argsort(p, kind="stable")
    steps = (m - np.arange(m)) * p[order]
    out = np.empty(m)
    out[order] = np.minimum(1.0, np.maximum.accumulate(steps))
    return out


def _hochberg(p: np.ndarray) -> np.ndarray:
    m = p.size
    order = np.argsort(p, kind="stable")
    steps = (m - np.arange(m)) * p[order]
    out = np.empty(m)
    out[order] = np.minimum(1.0, np.minimum.accumulate(steps[::-1])[::-1])
    return out


def _bh(p: np.ndarray) -> np.ndarray:
    m = p.size
    order = np.argsort(p, kind="stable")
    steps = m / np.arange(1, m + 1) * p[order]
    out = np.empty(m)
    out[order] = np.minimum(1.0, np.minimum.accumulate(steps[::-1])[::-1])
    return out


def _hommel(p: np.ndarray) -> np.ndarray:
    # Wright's (1992) O(m^2) formulation, as in R's p.adjust
    m = p.size
    if m == 1:
        return p.copy()
    order = np.argsort(p, kind="stable")
    ps = p[order]
    i = np.arange(1, m + 1)
    q = np.full(m, np.min(m * ps / i))
    pa = q.copy()
    for k in range(m - 1, 1, -1):
        n1 = m - k + 1
        q1 = np.min(k * ps[n1:] / np.arange(2, k + 1))
        q[:n1] = np.minimum(k * ps[:n1], q1)
        q[n1:] = q[n1 - 1]
        pa = np.maximum(pa, q)
    out = np.empty(m)
    out[order] = np.maximum(pa, ps)
    return out


_ADJUSTERS = {
    "bonferroni": _bonferroni,
    "holm": _holm,
    "hochberg": _hochberg,
    "hommel": _hommel,
    "bh": _bh,
}


def adjust_p(raw: Sequence[float], method: str = "bh") -> list[float]:
    """Adjusted p-values, aligned with ``raw``."""
    try:
        fn = _ADJUSTERS[method]
    except KeyError:
        raise DomainError(f"unknown adjustment method {method!r}; choose from {METHODS}") from None
    return fn(_as_pvalues(raw)).tolist()


def decide(adjusted: Sequence[float], alpha: float) -> tuple[bool, list[bool]]:
    """Flag every adjusted p strictly below alpha; reject overall if any is flagged."""
    _check_alpha(alpha)
    flags = [float(p) < alpha for p in adjusted]
    return any(flags), flags


def adjust(raw: Sequence[float], method: str = "bh", alpha: float = 0.05) -> AdjustmentResult:
    adjusted = adjust_p(raw, method)
    _, flags = decide(adjusted, alpha)
    return AdjustmentResult(method, tuple(float(p) for p in raw), tuple(adjusted),
                            float(alpha), tuple(flags))
