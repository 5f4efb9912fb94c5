"""Monte Carlo studies: null moments of E_g, type I error and power.

Every replication draws from its own generator, seeded by
``SeedSequence(seed, spawn_key=(stream, replication))``. Results therefore
do not depend on how replications are split across worker processes, and
aggregation happens in replication order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .adjust import adjust_p
from .errors import DegenerateSampleError, DomainError
from .numerics import chisq_sf
from .posthoc import anova_arrays
from .scores import score_arrays
from .waerden import EgMoments, eg_null_moments, initial_p_values

FAMILIES = {
    "normal": ("mean", "sd"),
    "student_t": ("df",),
    "chi_square": ("df",),
    "laplace": ("location", "scale"),
    "lognormal": ("meanlog", "sdlog"),
}
METHODS = ("eg_bonf", "eg_bh", "waerden", "anova")


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        names = FAMILIES[self.family]
        if len(self.params) != len(names):
            raise DomainError(f"{self.family} takes parameters {names}, got {self.params}")
        if not all(math.isfinite(p) for p in self.params):
            raise DomainError(f"non-finite parameter in {self}")
        for name, value in zip(names, self.params):
            if name in ("sd", "scale", "df", "sdlog") and value <= 0:
                raise DomainError(f"{self.family} {name} must be positive, got {value}")

    @classmethod
    def normal(cls, mean: float = 0.0, sd: float = 1.0) -> "DistributionSpec":
        return cls("normal", (float(mean), float(sd)))

    @classmethod
    def student_t(cls, df: float) -> "DistributionSpec":
        return cls("student_t", (float(df),))

    @classmethod
    def chi_square(cls, df: float) -> "DistributionSpec":
        return cls("chi_square", (float(df),))

    @classmethod
    def laplace(cls, location: float = 0.0, scale: float = 1.0) -> "DistributionSpec":
        return cls("laplace", (float(location), float(scale)))

    @classmethod
    def lognormal(cls, meanlog: float = 0.0, sdlog: float = 1.0) -> "DistributionSpec":
        return cls("lognormal", (float(meanlog), float(sdlog)))

    def describe(self) -> str:
        args = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.family}({args})"

    def to_dict(self) -> dict:
        return {"family": self.family, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        return cls(d["family"], tuple(float(p) for p in d["params"]))


def sample_distribution(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. values from ``spec`` using ``rng``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    fam, p = spec.family, spec.params
    if fam == "normal":
        return p[0] + p[1] * rng.standard_normal(n)
    if fam == "student_t":
        z = rng.standard_normal(n)
        chi2 = 2.0 * rng.standard_gamma(p[0] / 2.0, n)
        return z / np.sqrt(chi2 / p[0])
    if fam == "chi_square":
        return 2.0 * rng.standard_gamma(p[0] / 2.0, n)
    if fam == "laplace":
        u = rng.random(n) - 0.5
        return p[0] - p[1] * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    # lognormal
    return np.exp(p[0] + p[1] * rng.standard_normal(n))


@dataclass(frozen=True)
class SimulationSpec:
    sizes: tuple[int, ...]
    distributions: tuple[DistributionSpec, ...]
    alphas: tuple[float, ...] = (0.05, 0.01)
    replications: int = 10000
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    stream: int = 0
    name: str = ""

    def __post_init__(self):
        if len(self.sizes) < 2:
            raise DomainError("need at least two groups")
        if len(self.distributions) != len(self.sizes):
            raise DomainError("one distribution per group is required")
        if any(s < 1 for s in self.sizes):
            raise DomainError(f"group sizes must be positive, got {self.sizes}")
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise DomainError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise DomainError(f"alphas must lie in [0, 1], got {self.alphas}")
        if self.seed < 0 or self.stream < 0:
            raise DomainError("seed and stream must be nonnegative")

    @property
    def g(self) -> int:
        return len(self.sizes)

    @classmethod
    def balanced(cls, g: int, n_g: int, distributions: Sequence[DistributionSpec] | DistributionSpec,
                 **kwargs) -> "SimulationSpec":
        if isinstance(distributions, DistributionSpec):
            distributions = [distributions] * g
        return cls(sizes=(n_g,) * g, distributions=tuple(distributions), **kwargs)

    def with_run(self, replications: int | None = None, seed: int | None = None) -> "SimulationSpec":
        return replace(self, replications=self.replications if replications is None else replications,
                       seed=self.seed if seed is None else seed)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sizes": list(self.sizes),
            "distributions": [d.to_dict() for d in self.distributions],
            "alphas": list(self.alphas),
            "replications": self.replications,
            "seed": self.seed,
            "stream": self.stream,
            "methods": list(self.methods),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationSpec":
        dists = [DistributionSpec.from_dict(x) for x in d["distributions"]]
        sizes = d["sizes"]
        if isinstance(sizes, int):
            sizes = [sizes] * len(dists)
        if len(dists) == 1 and len(sizes) > 1:
            dists = dists * len(sizes)
        return cls(
            sizes=tuple(int(s) for s in sizes),
            distributions=tuple(dists),
            alphas=tuple(float(a) for a in d.get("alphas", (0.05, 0.01))),
            replications=int(d.get("replications", 10000)),
            seed=int(d.get("seed", 0)),
            methods=tuple(d.get("methods", METHODS)),
            stream=int(d.get("stream", 0)),
            name=str(d.get("name", "")),
        )


def replication_rng(seed: int, stream: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, rep)))


def draw_sample(spec: SimulationSpec, rng: np.random.Generator) -> np.ndarray:
    return np.concatenate([sample_distribution(d, n, rng)
                           for d, n in zip(spec.distributions, spec.sizes)])


# ---------------------------------------------------------------------------
# Per-replication kernels. Each returns one row of floats.


def _decision_row(spec: SimulationSpec, values: np.ndarray) -> np.ndarray:
    """Smallest p-value driving each method's overall decision.

    A method rejects at level alpha iff its entry is < alpha.
    """
    out = np.full(len(spec.methods), np.nan)
    sizes = spec.sizes
    try:
        sc = score_arrays(values, sizes)
    except DegenerateSampleError:
        sc = None
    if sc is not None:
        size_arr = np.asarray(sizes, dtype=float)
        e = size_arr * sc.group_means ** 2 / sc.pooled_variance
        w = float(np.dot(size_arr, sc.group_means ** 2)) / sc.pooled_variance
        p_init = None
    for k, method in enumerate(spec.methods):
        if method == "anova":
            try:
                out[k] = anova_arrays(values, sizes).p
            except DegenerateSampleError:
                pass
            continue
        if sc is None:
            continue
        if method == "waerden":
            out[k] = chisq_sf(w, spec.g - 1)
            continue
        if p_init is None:
            p_init = initial_p_values(e, sizes)
        adj_method = "bonferroni" if method == "eg_bonf" else "bh"
        out[k] = min(adjust_p(p_init, adj_method))
    return out


def _moment_row(spec: SimulationSpec, values: np.ndarray) -> np.ndarray:
    try:
        sc = score_arrays(values, spec.sizes)
    except DegenerateSampleError:
        return np.full(spec.g, np.nan)
    return np.asarray(spec.sizes, dtype=float) * sc.group_means ** 2 / sc.pooled_variance


_KERNELS = {"decisions": _decision_row, "moments": _moment_row}


def _run_chunk(args: tuple[SimulationSpec, str, int, int]) -> np.ndarray:
    spec, kernel_name, start, stop = args
    kernel = _KERNELS[kernel_name]
    rows = []
    for rep in range(start, stop):
        rng = replication_rng(spec.seed, spec.stream, rep)
        rows.append(kernel(spec, draw_sample(spec, rng)))
    return np.vstack(rows) if rows else np.empty((0, 0))


def run_replications(spec: SimulationSpec, kernel: str, workers: int = 1) -> np.ndarray:
    """Matrix with one row per replication, in replication order."""
    R = spec.replications
    if workers <= 1:
        return _run_chunk((spec, kernel, 0, R))
    n_chunks = min(R, workers * 4)
    bounds = np.linspace(0, R, n_chunks + 1).astype(int)
    jobs = [(spec, kernel, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, jobs))
    return np.vstack(parts)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class RateEstimate:
    method: str
    alpha: float
    rate: float
    se: float
    valid: int


@dataclass(frozen=True)
class SimulationReport:
    kind: str
    spec: SimulationSpec
    rates: tuple[RateEstimate, ...]
    wall_time: float = field(default=0.0, compare=False)

    def rate(self, method: str, alpha: float) -> float:
        return self.estimate(method, alpha).rate

    def estimate(self, method: str, alpha: float) -> RateEstimate:
        for est in self.rates:
            if est.method == method and est.alpha == alpha:
                return est
        raise KeyError((method, alpha))

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "kind": self.kind,
            "spec": self.spec.to_dict(),
            "rates": [asdict(r) for r in self.rates],
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


def rates_from_decisions(spec: SimulationSpec, decisions: np.ndarray) -> tuple[RateEstimate, ...]:
    out = []
    for k, method in enumerate(spec.methods):
        col = decisions[:, k]
        col = col[~np.isnan(col)]
        for alpha in spec.alphas:
            m = col.size
            rate = float(np.count_nonzero(col < alpha)) / m if m else float("nan")
            se = math.sqrt(rate * (1.0 - rate) / m) if m else float("nan")
            out.append(RateEstimate(method, float(alpha), rate, se, int(m)))
    return tuple(out)


def _check_identical(spec: SimulationSpec) -> None:
    if len(set(spec.distributions)) != 1:
        raise DomainError("a null study needs the same distribution in every group")


def run_type1(spec: SimulationSpec, workers: int = 1) -> SimulationReport:
    """Empirical type I error: every group drawn from one common law."""
    _check_identical(spec)
    return _run_rates("type1", spec, workers)


def run_power(spec: SimulationSpec, workers: int = 1) -> SimulationReport:
    """Empirical power: groups drawn from laws that differ."""
    if len(set(spec.distributions)) == 1:
        raise DomainError("a power study needs at least two distinct group distributions")
    return _run_rates("power", spec, workers)


def _run_rates(kind: str, spec: SimulationSpec, workers: int) -> SimulationReport:
    t0 = time.perf_counter()
    decisions = run_replications(spec, "decisions", workers)
    rates = rates_from_decisions(spec, decisions)
    return SimulationReport(kind, spec, rates, time.perf_counter() - t0)


@dataclass(frozen=True)
class EmpiricalMoments:
    mean: float
    variance: float
    skewness: float | None
    kurtosis: float | None
    degenerate: bool = False


def empirical_moments(values: Sequence[float] | np.ndarray) -> EmpiricalMoments:
    """Mean, unbiased variance, and plain moment-ratio skewness/kurtosis.

    Central moments for skewness and kurtosis use divisor len(values);
    kurtosis is non-excess (3 for the normal). With zero variance the
    shape moments are None and ``degenerate`` is set.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 4:
        raise DomainError("empirical_moments needs at least 4 values")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    variance = float(np.sum(d * d)) / (x.size - 1)
    if m2 <= 1e-300 or np.all(x == x[0]):
        return EmpiricalMoments(mean, 0.0 if np.all(x == x[0]) else variance, None, None, True)
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    return EmpiricalMoments(mean, variance, m3 / m2 ** 1.5, m4 / (m2 * m2))


@dataclass(frozen=True)
class GroupMoments:
    group: int
    n_g: int
    empirical: EmpiricalMoments
    theoretical: EgMoments


@dataclass(frozen=True)
class MomentReport:
    spec: SimulationSpec
    groups: tuple[GroupMoments, ...]
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "kind": "moments",
            "spec": self.spec.to_dict(),
            "groups": [
                {"group": gm.group, "n_g": gm.n_g,
                 "empirical": asdict(gm.empirical), "theoretical": asdict(gm.theoretical)}
                for gm in self.groups
            ],
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


def run_moment_study(spec: SimulationSpec, workers: int = 1) -> MomentReport:
    """Empirical first four moments of each E_g under a common null law."""
    _check_identical(spec)
    t0 = time.perf_counter()
    e = run_replications(spec, "moments", workers)
    n = sum(spec.sizes)
    groups = []
    for k, n_g in enumerate(spec.sizes):
        col = e[:, k]
        groups.append(GroupMoments(k + 1, n_g, empirical_moments(col[~np.isnan(col)]),
                                   eg_null_moments(n, n_g)))
    return MomentReport(spec, tuple(groups), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Presets


@dataclass(frozen=True)
class StudyCell:
    kind: str
    block: str
    spec: SimulationSpec


def _locations(family: str, locs: Sequence[float], spread: float) -> list[DistributionSpec]:
    return [DistributionSpec(family, (float(m), float(spread))) for m in locs]


def preset_cells(name: str, replications: int = 10000, seed: int = 0) -> list[StudyCell]:
    """Simulation grids for the moment, type I error and power studies."""
    cells: list[StudyCell] = []

    def add(kind, block, g, n_g, dists, alphas=(0.05, 0.01)):
        spec = SimulationSpec.balanced(g, n_g, dists, alphas=alphas, replications=replications,
                                       seed=seed, stream=len(cells), name=f"{block} g={g} n_g={n_g}")
        cells.append(StudyCell(kind, block, spec))

    if name == "table1":
        families = [("normal", DistributionSpec.normal(0, 1)),
                    ("Laplace", DistributionSpec.laplace(0, 1)),
                    ("chi2(2)", DistributionSpec.chi_square(2))]
        for g in (3, 5):
            for n_g in (10, 25):
                for block, dist in families:
                    add("moments", block, g, n_g, dist, alphas=())
    elif name == "table2":
        families = [("N(0,1)", DistributionSpec.normal(0, 1)),
                    ("chisq(1)", DistributionSpec.chi_square(1)),
                    ("t(df=1)", DistributionSpec.student_t(1)),
                    ("LN(0,1)", DistributionSpec.lognormal(0, 1))]
        for block, dist in families:
            for g in (3, 6):
                for n_g in (10, 20, 50):
                    add("type1", block, g, n_g, dist)
    elif name == "table3":
        blocks = {
            3: [("N((1,2,3),2)", _locations("normal", (1, 2, 3), 2)),
                ("chisq(df=1,2,3)", [DistributionSpec.chi_square(d) for d in (1, 2, 3)]),
                ("Laplace((0,1,2),1)", _locations("laplace", (0, 1, 2), 1)),
                ("Lognormal((0,1,2),2)", _locations("lognormal", (0, 1, 2), 2))],
            6: [("N((0,...,5),3)", _locations("normal", range(6), 3)),
                ("chisq(df=1,...,6)", [DistributionSpec.chi_square(d) for d in range(1, 7)]),
                ("Laplace((0,...,5),3)", _locations("laplace", range(6), 3)),
                ("Lognormal((0,...,5),3)", _locations("lognormal", range(6), 3))],
        }
        for g, fams in blocks.items():
            for block, dists in fams:
                for n_g in (10, 20, 50):
                    add("power", block, g, n_g, dists)
    else:
        raise DomainError(f"unknown preset {name!r}; choose table1, table2 or table3")
    return cells


PRESETS = ("table1", "table2", "table3")


@dataclass(frozen=True)
class StudyReport:
    preset: str
    seed: int
    replications: int
    cells: tuple[tuple[StudyCell, SimulationReport | MomentReport], ...]
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema_version": 1,
            "preset": self.preset,
            "seed": self.seed,
            "replications": self.replications,
            "cells": [dict(block=cell.block, **report.to_dict(include_timing))
                      for cell, report in self.cells],
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


def run_cell(cell: StudyCell, workers: int = 1) -> SimulationReport | MomentReport:
    if cell.kind == "moments":
        return run_moment_study(cell.spec, workers)
    if cell.kind == "type1":
        return run_type1(cell.spec, workers)
    return run_power(cell.spec, workers)


def run_preset(name: str, replications: int = 10000, seed: int = 0, workers: int = 1,
               progress=None) -> StudyReport:
    t0 = time.perf_counter()
    results = []
    for cell in preset_cells(name, replications, seed):
        results.append((cell, run_cell(cell, workers)))
        if progress is not None:
            progress(cell)
    return StudyReport(name, seed, replications, tuple(results), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Text tables


_METHOD_HEAD = {"eg_bonf": "Eg Bonf.", "eg_bh": "Eg BH", "waerden": "W", "anova": "ANOVA"}


def format_study(report: StudyReport) -> str:
    if all(cell.kind == "moments" for cell, _ in report.cells):
        return _format_moments(report)
    return _format_rates(report)


def _size_text(spec: SimulationSpec) -> str:
    if len(set(spec.sizes)) == 1:
        return str(spec.sizes[0])
    return "/".join(str(s) for s in spec.sizes)


def _fmt(x: float | None, width: int, prec: int) -> str:
    return f"{'-':>{width}}" if x is None or x != x else f"{x:>{width}.{prec}f}"


def _format_rates(report: StudyReport) -> str:
    kinds = {cell.kind for cell, _ in report.cells}
    title = "empirical type I error" if kinds == {"type1"} else "empirical power"
    lines = [f"{title}, R = {report.replications}, seed = {report.seed}"]
    block = None
    for cell, rep in report.cells:
        if cell.block != block:
            block = cell.block
            heads = "".join(f"{_METHOD_HEAD[m]:>10}" for m in cell.spec.methods)
            lines += ["", f"  {block}", f"{'g':>3}{'n_g':>5}{'alpha':>7}{heads}"]
        for i, alpha in enumerate(cell.spec.alphas):
            lead = f"{cell.spec.g:>3}{_size_text(cell.spec):>5}" if i == 0 else " " * 8
            vals = "".join(_fmt(rep.rate(m, alpha), 10, 4) for m in cell.spec.methods)
            lines.append(f"{lead}{alpha:>7g}{vals}")
    return "\n".join(lines) + "\n"


def _format_moments(report: StudyReport) -> str:
    lines = [f"moments of E_g under the null, R = {report.replications}, seed = {report.seed}"]
    for cell, rep in report.cells:
        lines += ["", f"  {cell.block}  g={cell.spec.g}  n_g={_size_text(cell.spec)}",
                  f"{'':>8}{'mean':>9}{'var':>9}{'skew':>9}{'kurt':>9}"]
        for gm in rep.groups:
            em = gm.empirical
            lines.append(f"{'E_' + str(gm.group):>8}{_fmt(em.mean, 9, 3)}{_fmt(em.variance, 9, 3)}"
                         f"{_fmt(em.skewness, 9, 2)}{_fmt(em.kurtosis, 9, 2)}")
        th = rep.groups[0].theoretical
        lines.append(f"{'Theo.':>8}{th.mean:>9.3f}{th.variance:>9.3f}{th.skewness:>9.2f}{th.kurtosis:>9.2f}")
    return "\n".join(lines) + "\n"
