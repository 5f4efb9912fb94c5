"""End-to-end analysis of one sample and its JSON representation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .adjust import AdjustmentResult, adjust
from .errors import DomainError, ParseError
from .numerics import GammaParams
from .posthoc import PairComparison, PosthocTable, conover_iman
from .scores import WAERDEN_OFFSET, GroupedSample
from .waerden import EgRecord, WaerdenOutcome, waerden_test

SCHEMA_VERSION = 1
DISPLAY_FLOOR = 1e-12


@dataclass(frozen=True)
class SampleSummary:
    labels: tuple[str, ...]
    sizes: tuple[int, ...]

    @property
    def g(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class Provenance:
    source: str | None
    alpha: float
    offset_c: float


@dataclass(frozen=True)
class AnalysisReport:
    sample: SampleSummary
    outcome: WaerdenOutcome
    adjustments: tuple[AdjustmentResult, ...]
    posthoc: PosthocTable | None
    provenance: Provenance

    def adjustment(self, method: str) -> AdjustmentResult:
        for adj in self.adjustments:
            if adj.method == method:
                return adj
        raise KeyError(method)

    def flagged(self, method: str) -> list[str]:
        adj = self.adjustment(method)
        return [lab for lab, f in zip(self.sample.labels, adj.reject_flags) if f]

    def contribution_order(self) -> list[str]:
        """Group labels by decreasing share of W (stable for ties)."""
        recs = sorted(enumerate(self.outcome.records), key=lambda kv: (-kv[1].e_value, kv[0]))
        return [r.group_label for _, r in recs]

    def narrative(self) -> list[str]:
        lines = []
        for adj in self.adjustments:
            flagged = self.flagged(adj.method)
            if flagged:
                lines.append(f"{adj.method}: reject at alpha={adj.alpha_nominal:g}; "
                             f"shift located in {', '.join(flagged)}")
            else:
                lines.append(f"{adj.method}: no adjusted p-value below alpha={adj.alpha_nominal:g}")
        if self.outcome.shares_defined:
            parts = [f"{r.group_label} {100 * r.share:.1f}%"
                     for r in sorted(self.outcome.records, key=lambda r: -r.e_value)]
            lines.append("contribution to W: " + ", ".join(parts))
        else:
            lines.append("W = 0: contributions undefined, shares set to 1/g")
        return lines


def analyze(sample: GroupedSample, alpha: float = 0.05, offset_c: float = WAERDEN_OFFSET,
            methods: Sequence[str] = ("bh", "bonferroni"), posthoc: bool = False,
            source: str | None = None) -> AnalysisReport:
    """Statistic, per-group p-values, their adjustments and (optionally) post-hoc pairs."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not methods:
        raise DomainError("at least one adjustment method is required")
    outcome = waerden_test(sample, offset_c)
    adjustments = tuple(adjust(outcome.p_initial, m, alpha) for m in methods)
    table = conover_iman(sample, outcome, alpha, offset_c=offset_c) if posthoc else None
    return AnalysisReport(SampleSummary(sample.labels, sample.sizes), outcome, adjustments,
                          table, Provenance(source, float(alpha), float(offset_c)))


# ---------------------------------------------------------------------------
# JSON


def report_to_dict(report: AnalysisReport) -> dict:
    out = report.outcome
    d = {
        "schema_version": SCHEMA_VERSION,
        "provenance": {
            "source": report.provenance.source,
            "alpha": report.provenance.alpha,
            "offset_c": report.provenance.offset_c,
        },
        "sample": {
            "g": report.sample.g,
            "n": report.sample.n,
            "labels": list(report.sample.labels),
            "sizes": list(report.sample.sizes),
        },
        "waerden": {
            "W": out.W,
            "df": out.df,
            "p_chisq": out.p_chisq,
            "shares_defined": out.shares_defined,
            "records": [
                {
                    "group": r.group_label,
                    "n_g": r.n_g,
                    "E": r.e_value,
                    "null_shape": r.null_dist.shape,
                    "null_rate": r.null_dist.rate,
                    "p_initial": r.p_initial,
                    "share": r.share,
                }
                for r in out.records
            ],
        },
        "adjustments": [
            {
                "method": a.method,
                "alpha": a.alpha_nominal,
                "raw": list(a.raw),
                "adjusted": list(a.adjusted),
                "reject_flags": list(a.reject_flags),
                "overall_reject": a.overall_reject,
            }
            for a in report.adjustments
        ],
        "posthoc": None,
        "decision": {
            "flagged": {a.method: report.flagged(a.method) for a in report.adjustments},
            "contribution_order": report.contribution_order(),
            "narrative": report.narrative(),
        },
    }
    if report.posthoc is not None:
        t = report.posthoc
        d["posthoc"] = {
            "alpha": t.alpha,
            "df": t.df,
            "adjust_method": t.adjust_method,
            "omnibus_reject": t.omnibus_reject,
            "pairs": [
                {
                    "i": r.i, "j": r.j, "group_i": r.label_i, "group_j": r.label_j,
                    "statistic": r.statistic, "threshold": r.threshold, "t": r.t_value,
                    "raw_p": r.raw_p, "adjusted_p": r.adjusted_p, "significant": r.significant,
                }
                for r in t.rows
            ],
        }
    return d


def emit_report(report: AnalysisReport) -> str:
    """Deterministic JSON text; floats use the shortest exact round-trip form."""
    return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"


def report_from_dict(d: dict) -> AnalysisReport:
    try:
        version = d["schema_version"]
        if version != SCHEMA_VERSION:
            raise ParseError(f"unsupported schema_version {version!r}")
        prov = Provenance(d["provenance"]["source"], float(d["provenance"]["alpha"]),
                          float(d["provenance"]["offset_c"]))
        sample = SampleSummary(tuple(d["sample"]["labels"]), tuple(int(s) for s in d["sample"]["sizes"]))
        w = d["waerden"]
        records = tuple(
            EgRecord(r["group"], int(r["n_g"]), float(r["E"]),
                     GammaParams(float(r["null_shape"]), float(r["null_rate"])),
                     float(r["p_initial"]), float(r["share"]))
            for r in w["records"]
        )
        outcome = WaerdenOutcome(float(w["W"]), int(w["df"]), float(w["p_chisq"]), records,
                                 bool(w["shares_defined"]))
        adjustments = tuple(
            AdjustmentResult(a["method"], tuple(float(x) for x in a["raw"]),
                             tuple(float(x) for x in a["adjusted"]), float(a["alpha"]),
                             tuple(bool(x) for x in a["reject_flags"]))
            for a in d["adjustments"]
        )
        table = None
        if d.get("posthoc") is not None:
            t = d["posthoc"]
            rows = tuple(
                PairComparison(int(r["i"]), int(r["j"]), r["group_i"], r["group_j"],
                               float(r["statistic"]), float(r["threshold"]), float(r["t"]),
                               float(r["raw_p"]), float(r["adjusted_p"]), bool(r["significant"]))
                for r in t["pairs"]
            )
            table = PosthocTable(rows, float(t["alpha"]), int(t["df"]), t["adjust_method"],
                                 bool(t["omnibus_reject"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed report: missing or invalid field {exc}") from None
    return AnalysisReport(sample, outcome, adjustments, table, prov)


def parse_report(text: str) -> AnalysisReport:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    return report_from_dict(d)


# ---------------------------------------------------------------------------
# Terminal summary


def format_p(p: float) -> str:
    if p < DISPLAY_FLOOR:
        return "<1e-12"
    if p < 1e-4:
        return f"{p:.2e}"
    return f"{p:.4f}"


def format_report(report: AnalysisReport) -> str:
    out = report.outcome
    lines = [
        f"Van der Waerden test: W = {out.W:.4f}, df = {out.df}, p = {format_p(out.p_chisq)}",
        f"groups: {report.sample.g}, n = {report.sample.n}, alpha = {report.provenance.alpha:g}",
        "",
    ]
    methods = [a.method for a in report.adjustments]
    head = f"{'group':<8}{'n_g':>5}{'E_g':>10}{'share':>8}{'p_init':>10}" + "".join(
        f"{m:>12}" for m in methods)
    lines.append(head)
    for k, rec in enumerate(out.records):
        adj = "".join(
            f"{format_p(a.adjusted[k]) + ('*' if a.reject_flags[k] else ' '):>12}"
            for a in report.adjustments)
        lines.append(f"{rec.group_label:<8}{rec.n_g:>5}{rec.e_value:>10.4f}{100 * rec.share:>7.1f}%"
                     f"{format_p(rec.p_initial):>10}{adj}")
    lines.append("")
    lines.extend(report.narrative())
    if report.posthoc is not None:
        t = report.posthoc
        lines += ["", f"Conover-Iman pairwise comparisons ({t.adjust_method}-adjusted, df = {t.df})"]
        if not t.omnibus_reject:
            lines.append("note: the omnibus test does not reject at this alpha")
        for r in t.rows:
            mark = "*" if r.significant else " "
            lines.append(f"  {r.label_i:>6} - {r.label_j:<6} diff {r.statistic:8.4f}  "
                         f"thr {r.threshold:8.4f}  p_adj {format_p(r.adjusted_p):>9}{mark}")
    return "\n".join(lines) + "\n"
