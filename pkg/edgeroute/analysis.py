"""
Statistical reporting: paired t-tests on per-image loss differences,
univariate regressions of the performance difference on each meta-feature,
per-modality performance tables with an image-count weighted aggregate, and
directional checks of the "higher sigma / higher entropy favours edges"
hypotheses.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from edgeroute.errors import DegenerateRegressionError, ReportError, SampleError
from edgeroute.features import Feature
from edgeroute.router import EvalRecord, oracle_performance
from edgeroute.utils.artifacts import write_csv, write_json

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05
CONFIDENCE = 0.95
AGGREGATE = "Aggregated"


def significance_stars(p_value: Optional[float]) -> str:
    if p_value is None or math.isnan(p_value):
        return ""
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


# ── Paired t-test ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TTestResult:
    mean_diff: float
    ci_low: float
    ci_high: float
    p_value: float
    n: int
    statistic: float

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)


def paired_ttest(diffs: Sequence[float], confidence: float = CONFIDENCE) -> TTestResult:
    """
    Two-sided paired t-test on per-image differences, with a t-based CI of
    the mean difference (n - 1 degrees of freedom).

    Identical differences have no variance: p is 1 when they are all zero and
    0 otherwise, and the CI collapses onto the mean.
    """
    d = np.asarray(diffs, dtype=np.float64)
    n = int(d.size)
    if n < 2:
        raise SampleError(f"paired t-test needs at least 2 differences, got {n}")
    mean = float(d.mean())
    if np.ptp(d) == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 0.0, 0.0, 1.0, n, 0.0)
        return TTestResult(mean, mean, mean, 0.0, n, math.copysign(math.inf, mean))
    result = stats.ttest_1samp(d, 0.0)
    ci = result.confidence_interval(confidence_level=confidence)
    return TTestResult(mean, float(ci.low), float(ci.high), float(result.pvalue), n, float(result.statistic))


# ── Regression ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class RegressionResult:
    feature: Feature
    coefficient: float
    intercept: float
    p_value: float
    r_value: float
    n: int

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)


def regress_feature(records: Sequence[EvalRecord], feature) -> RegressionResult:
    """OLS of the performance difference on one feature; p-value of the slope with n - 2 df."""
    feature = Feature(feature)
    if len(records) < 3:
        raise SampleError(f"regression needs at least 3 records, got {len(records)}")
    x = np.array([r.features.get(feature) for r in records], dtype=np.float64)
    y = np.array([r.delta for r in records], dtype=np.float64)
    if np.ptp(x) == 0.0:
        raise DegenerateRegressionError(f"feature '{feature.value}' is constant across {len(records)} records")
    fit = stats.linregress(x, y)
    p_value = float(fit.pvalue)
    if math.isnan(p_value):
        p_value = 1.0
    return RegressionResult(
        feature=feature,
        coefficient=float(fit.slope),
        intercept=float(fit.intercept),
        p_value=min(max(p_value, 0.0), 1.0),
        r_value=float(fit.rvalue),
        n=len(records),
    )


# ── Modality report ──────────────────────────────────────────────────────


def _relative(numerator: float, denominator: float) -> Optional[float]:
    return None if denominator == 0 else 100.0 * numerator / denominator


@dataclass(frozen=True)
class ModalityReport:
    modality: str
    perf_raw: float
    perf_edge: float
    perf_meta: float
    delta: float
    delta_rel: Optional[float]
    delta_meta: float
    delta_rel_meta: Optional[float]
    gain_over_raw_rel: Optional[float]
    n_images: int

    @classmethod
    def from_means(
        cls, modality: str, perf_raw: float, perf_edge: float, perf_meta: float, n_images: int
    ) -> "ModalityReport":
        best = max(perf_raw, perf_edge)
        delta = perf_edge - perf_raw
        delta_meta = perf_meta - best
        return cls(
            modality=modality,
            perf_raw=perf_raw,
            perf_edge=perf_edge,
            perf_meta=perf_meta,
            delta=delta,
            delta_rel=_relative(delta, perf_raw),
            delta_meta=delta_meta,
            delta_rel_meta=_relative(delta_meta, best),
            gain_over_raw_rel=_relative(perf_meta - perf_raw, perf_raw),
            n_images=n_images,
        )


@dataclass(frozen=True)
class PerformanceTable:
    rows: Tuple[ModalityReport, ...]
    aggregate: ModalityReport


def _weighted(values: Sequence[Tuple[float, int]]) -> float:
    total = sum(n for _, n in values)
    return math.fsum(v * n for v, n in values) / total


def report_from_means(rows: Sequence[Tuple[str, float, float, float, int]]) -> PerformanceTable:
    """Table from per-modality (modality, perf_raw, perf_edge, perf_meta, n_images) means."""
    if not rows:
        raise ReportError("no modality rows to report")
    reports = tuple(ModalityReport.from_means(*row) for row in rows)
    if any(r.n_images < 1 for r in reports):
        raise ReportError("every modality needs at least one image")
    aggregate = ModalityReport.from_means(
        AGGREGATE,
        _weighted([(r.perf_raw, r.n_images) for r in reports]),
        _weighted([(r.perf_edge, r.n_images) for r in reports]),
        _weighted([(r.perf_meta, r.n_images) for r in reports]),
        sum(r.n_images for r in reports),
    )
    return PerformanceTable(reports, aggregate)


def modality_report(records: Sequence[EvalRecord], meta_perfs: Sequence[float]) -> PerformanceTable:
    """Per-modality means of the three pipelines plus the image-weighted aggregate row."""
    if not records:
        raise ReportError("no records to report")
    if len(meta_perfs) != len(records):
        raise ReportError(f"{len(records)} records but {len(meta_perfs)} meta performances")
    groups: Dict[str, List[Tuple[EvalRecord, float]]] = {}
    for record, meta in zip(records, meta_perfs):
        groups.setdefault(record.modality, []).append((record, meta))
    rows = []
    for modality in sorted(groups):
        pairs = groups[modality]
        n = len(pairs)
        rows.append(
            (
                modality,
                math.fsum(r.perf_raw for r, _ in pairs) / n,
                math.fsum(r.perf_edge for r, _ in pairs) / n,
                math.fsum(m for _, m in pairs) / n,
                n,
            )
        )
    return report_from_means(rows)


# ── Hypotheses ───────────────────────────────────────────────────────────


class Verdict(str, Enum):
    SUPPORTED = "supported"
    CONTRADICTED = "contradicted"
    INCONCLUSIVE = "inconclusive"
    UNTESTABLE = "untestable"


@dataclass(frozen=True)
class HypothesisFinding:
    modality: str
    feature: Feature
    verdict: Verdict
    coefficient: Optional[float] = None
    p_value: Optional[float] = None


@dataclass
class HypothesisSummary:
    findings: List[HypothesisFinding] = field(default_factory=list)
    divergent: Dict[str, bool] = field(default_factory=dict)
    most_discriminative: Dict[str, Optional[str]] = field(default_factory=dict)

    def verdict(self, modality: str, feature) -> Verdict:
        feature = Feature(feature)
        for finding in self.findings:
            if finding.modality == modality and finding.feature is feature:
                return finding.verdict
        raise KeyError(f"no finding for {modality}/{feature.value}")


def _group(records: Sequence[EvalRecord]) -> Dict[str, List[EvalRecord]]:
    groups: Dict[str, List[EvalRecord]] = {}
    for record in records:
        groups.setdefault(record.modality, []).append(record)
    return dict(sorted(groups.items()))


def hypothesis_check(records: Sequence[EvalRecord], alpha: float = DEFAULT_ALPHA) -> HypothesisSummary:
    """
    For each modality and feature: does a higher feature value significantly
    favour the edge pipeline (supported), the raw pipeline (contradicted), or
    neither (inconclusive)?
    """
    summary = HypothesisSummary()
    for modality, group in _group(records).items():
        best_feature, best_p = None, math.inf
        for feature in Feature:
            try:
                fit = regress_feature(group, feature)
            except (SampleError, DegenerateRegressionError) as e:
                logger.debug("Skipping %s/%s: %s", modality, feature.value, e)
                summary.findings.append(HypothesisFinding(modality, feature, Verdict.UNTESTABLE))
                continue
            if fit.p_value >= alpha:
                verdict = Verdict.INCONCLUSIVE
            elif fit.coefficient > 0:
                verdict = Verdict.SUPPORTED
            else:
                verdict = Verdict.CONTRADICTED
            summary.findings.append(HypothesisFinding(modality, feature, verdict, fit.coefficient, fit.p_value))
            if fit.p_value < best_p:
                best_feature, best_p = feature.value, fit.p_value
        summary.most_discriminative[modality] = best_feature
    for feature in Feature:
        verdicts = {f.verdict for f in summary.findings if f.feature is feature}
        summary.divergent[feature.value] = Verdict.SUPPORTED in verdicts and Verdict.CONTRADICTED in verdicts
    return summary


# ── Loss comparison ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class LossComparison:
    modality: str
    mean_loss_raw: float
    mean_loss_edge: float
    ttest: TTestResult


def loss_ttests(records: Sequence[EvalRecord]) -> List[LossComparison]:
    """Per modality, paired t-test on loss_edge - loss_raw."""
    comparisons = []
    for modality, group in _group(records).items():
        pairs = [(r.loss_raw, r.loss_edge) for r in group if r.loss_raw is not None and r.loss_edge is not None]
        if len(pairs) < 2:
            logger.warning("Skipping loss t-test for %s: %d paired losses", modality, len(pairs))
            continue
        raw, edge = (np.array(v, dtype=np.float64) for v in zip(*pairs))
        comparisons.append(LossComparison(modality, float(raw.mean()), float(edge.mean()), paired_ttest(edge - raw)))
    return comparisons


def regression_table(records: Sequence[EvalRecord]) -> List[Tuple[str, Feature, Optional[RegressionResult]]]:
    rows = []
    for modality, group in _group(records).items():
        for feature in Feature:
            try:
                rows.append((modality, feature, regress_feature(group, feature)))
            except (SampleError, DegenerateRegressionError):
                rows.append((modality, feature, None))
    return rows


# ── Full analysis and writers ────────────────────────────────────────────


@dataclass
class AnalysisReport:
    table: PerformanceTable
    losses: List[LossComparison]
    regressions: List[Tuple[str, Feature, Optional[RegressionResult]]]
    hypotheses: HypothesisSummary
    policies: Dict[str, float]


def analyze(
    records: Sequence[EvalRecord], meta_perfs: Sequence[float], alpha: float = DEFAULT_ALPHA
) -> AnalysisReport:
    table = modality_report(records, meta_perfs)
    policies = {
        "always_raw": table.aggregate.perf_raw,
        "always_edge": table.aggregate.perf_edge,
        "meta": table.aggregate.perf_meta,
        "oracle": oracle_performance(records),
    }
    return AnalysisReport(
        table=table,
        losses=loss_ttests(records),
        regressions=regression_table(records),
        hypotheses=hypothesis_check(records, alpha),
        policies=policies,
    )


TABLE_HEADER = (
    "modality",
    "perf_raw",
    "perf_edge",
    "delta",
    "delta_rel_pct",
    "perf_meta",
    "delta_meta",
    "delta_rel_meta_pct",
    "gain_over_raw_pct",
    "n_images",
)


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.2f}"


def table_rows(table: PerformanceTable) -> List[List[str]]:
    rows = []
    for r in (*table.rows, table.aggregate):
        rows.append(
            [
                r.modality,
                _fmt(r.perf_raw),
                _fmt(r.perf_edge),
                _fmt(r.delta),
                _fmt(r.delta_rel),
                _fmt(r.perf_meta),
                _fmt(r.delta_meta),
                _fmt(r.delta_rel_meta),
                _fmt(r.gain_over_raw_rel),
                str(r.n_images),
            ]
        )
    return rows


def _ttest_dict(t: TTestResult) -> Dict[str, object]:
    return {**asdict(t), "stars": t.stars}


def _regression_dict(modality: str, feature: Feature, fit: Optional[RegressionResult]) -> Dict[str, object]:
    data: Dict[str, object] = {"modality": modality, "feature": feature.value}
    if fit is not None:
        data.update(
            coefficient=fit.coefficient,
            intercept=fit.intercept,
            p_value=fit.p_value,
            r_value=fit.r_value,
            n=fit.n,
            stars=fit.stars,
        )
    return data


def write_reports(report: AnalysisReport, out_dir: Path) -> List[Path]:
    """Write report.json (full precision), report.csv, ttests.csv and regression.csv."""
    out_dir = Path(out_dir)
    written = [write_csv(out_dir / "report.csv", TABLE_HEADER, table_rows(report.table))]
    written.append(
        write_csv(
            out_dir / "ttests.csv",
            ("modality", "mean_loss_raw", "mean_loss_edge", "mean_diff", "ci_low", "ci_high", "p_value", "stars", "n"),
            (
                [c.modality, c.mean_loss_raw, c.mean_loss_edge, c.ttest.mean_diff, c.ttest.ci_low, c.ttest.ci_high,
                 c.ttest.p_value, c.ttest.stars, c.ttest.n]
                for c in report.losses
            ),
        )
    )
    written.append(
        write_csv(
            out_dir / "regression.csv",
            ("modality", "feature", "coefficient", "intercept", "p_value", "stars", "n"),
            (
                [m, f.value, None, None, None, "", None]
                if fit is None
                else [m, f.value, fit.coefficient, fit.intercept, fit.p_value, fit.stars, fit.n]
                for m, f, fit in report.regressions
            ),
        )
    )
    payload = {
        "modalities": [asdict(r) for r in report.table.rows],
        "aggregate": asdict(report.table.aggregate),
        "policies": report.policies,
        "loss_ttests": [
            {"modality": c.modality, "mean_loss_raw": c.mean_loss_raw, "mean_loss_edge": c.mean_loss_edge,
             "ttest": _ttest_dict(c.ttest)}
            for c in report.losses
        ],
        "regressions": [_regression_dict(m, f, fit) for m, f, fit in report.regressions],
        "hypotheses": {
            "findings": [
                {"modality": h.modality, "feature": h.feature.value, "verdict": h.verdict.value,
                 "coefficient": h.coefficient, "p_value": h.p_value}
                for h in report.hypotheses.findings
            ],
            "divergent": report.hypotheses.divergent,
            "most_discriminative": report.hypotheses.most_discriminative,
        },
    }
    written.append(write_json(out_dir / "report.json", payload))
    logger.info("Wrote %d report files to %s", len(written), out_dir)
    return written
