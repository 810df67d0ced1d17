"""
Routing meta-classifier.

Per modality, a rule picks the raw-input predictor (0) or the edge-input
predictor (1) from the raw image's meta-features. Training is an exhaustive
search over constant rules and single-feature threshold stumps that maximises
the mean realized performance on the training records.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from edgeroute.errors import DataError, PredictionError, ReportError, RuleFormatError, TrainingError
from edgeroute.features import Feature, FeatureVector, extract_features
from edgeroute.imaging import DatasetManifest, Image, ManifestEntry, Mask, check_same_shape, load_image, load_mask
from edgeroute.metrics import DEFAULT_TAU, loss, perf
from edgeroute.predictors import Predictor
from edgeroute.utils.artifacts import read_csv, read_json, write_csv, write_json

logger = logging.getLogger(__name__)

RAW = 0
EDGE = 1

RULE_FORMAT = "edgeroute.routing-rule"
RECORD_COLUMNS = (
    "image",
    "modality",
    "sigma",
    "entropy",
    "perf_raw",
    "perf_edge",
    "delta",
    "label",
    "loss_raw",
    "loss_edge",
)


@dataclass(frozen=True)
class EvalRecord:
    image_id: str
    modality: str
    features: FeatureVector
    perf_raw: float
    perf_edge: float
    loss_raw: Optional[float] = None
    loss_edge: Optional[float] = None

    @property
    def delta(self) -> float:
        return self.perf_edge - self.perf_raw

    @property
    def label(self) -> int:
        """1 iff the edge pipeline is strictly better; ties go to raw."""
        return EDGE if self.delta > 0 else RAW

    def perf_of(self, choice: int) -> float:
        return self.perf_edge if choice == EDGE else self.perf_raw


def _score_entry(entry: ManifestEntry, raw_pred: Predictor, edge_pred: Predictor, tau: float) -> EvalRecord:
    image_id = entry.image_id
    try:
        image = load_image(entry.image)
        gt = load_mask(entry.gt)
        check_same_shape(image, gt)
        raw_mask = raw_pred.predict(image)
        edge_mask = edge_pred.predict(image)
        return EvalRecord(
            image_id=image_id,
            modality=entry.modality,
            features=extract_features(image),
            perf_raw=perf(raw_mask, gt, tau).perf,
            perf_edge=perf(edge_mask, gt, tau).perf,
            loss_raw=loss(raw_mask, gt).total,
            loss_edge=loss(edge_mask, gt).total,
        )
    except PredictionError:
        raise
    except (DataError, OSError) as e:
        raise PredictionError(image_id, str(e)) from e


def build_eval_records(
    manifest: DatasetManifest,
    raw_pred: Predictor,
    edge_pred: Predictor,
    tau: float = DEFAULT_TAU,
    workers: int = 1,
) -> List[EvalRecord]:
    """Score both predictors on every manifest entry; features come from the raw image."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda e: _score_entry(e, raw_pred, edge_pred, tau), manifest.entries))
    else:
        records = [_score_entry(e, raw_pred, edge_pred, tau) for e in manifest.entries]
    logger.info("Built %d evaluation records", len(records))
    return records


# ── Rules ────────────────────────────────────────────────────────────────


class RuleKind(str, Enum):
    ALWAYS_RAW = "always-raw"
    ALWAYS_EDGE = "always-edge"
    THRESHOLD = "threshold"


class Direction(str, Enum):
    EDGE_ABOVE = "edge-above"  # feature >= cutoff selects the edge pipeline
    RAW_ABOVE = "raw-above"  # feature >= cutoff selects the raw pipeline


@dataclass(frozen=True)
class ModalityRule:
    kind: RuleKind
    feature: Optional[Feature] = None
    cutoff: Optional[float] = None
    direction: Optional[Direction] = None

    def __post_init__(self):
        if self.kind is RuleKind.THRESHOLD and None in (self.feature, self.cutoff, self.direction):
            raise ValueError("threshold rules need feature, cutoff and direction")

    def decide(self, features: FeatureVector) -> int:
        if self.kind is RuleKind.ALWAYS_RAW:
            return RAW
        if self.kind is RuleKind.ALWAYS_EDGE:
            return EDGE
        above = features.get(self.feature) >= self.cutoff
        if self.direction is Direction.EDGE_ABOVE:
            return EDGE if above else RAW
        return RAW if above else EDGE

    def describe(self) -> str:
        if self.kind is not RuleKind.THRESHOLD:
            return self.kind.value
        above, below = ("edge", "raw") if self.direction is Direction.EDGE_ABOVE else ("raw", "edge")
        return f"{self.feature.value} >= {self.cutoff:.6g} -> {above}, else {below}"

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {"kind": self.kind.value}
        if self.kind is RuleKind.THRESHOLD:
            data.update(feature=self.feature.value, cutoff=self.cutoff, direction=self.direction.value)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ModalityRule":
        kind = RuleKind(data["kind"])
        if kind is not RuleKind.THRESHOLD:
            return cls(kind)
        return cls(kind, Feature(data["feature"]), float(data["cutoff"]), Direction(data["direction"]))


ALWAYS_RAW = ModalityRule(RuleKind.ALWAYS_RAW)
ALWAYS_EDGE = ModalityRule(RuleKind.ALWAYS_EDGE)


@dataclass(frozen=True)
class RoutingRule:
    """Per-modality rules; unknown modalities fall back to always-raw."""

    rules: Dict[str, ModalityRule] = field(default_factory=dict, hash=False)
    fallback: ModalityRule = ALWAYS_RAW

    def rule_for(self, modality: str) -> ModalityRule:
        return self.rules.get(modality, self.fallback)

    def route(self, modality: str, features: FeatureVector) -> int:
        return self.rule_for(modality).decide(features)


def route(rule: RoutingRule, modality: str, features: FeatureVector) -> int:
    """0 selects the raw-input predictor, 1 the edge-input predictor."""
    return rule.route(modality, features)


def route_image(rule: RoutingRule, image: Image, modality: str) -> Tuple[int, FeatureVector]:
    """Meta-features of the raw image and the pipeline they select."""
    features = extract_features(image)
    return route(rule, modality, features), features


def meta_predict(
    rule: RoutingRule, raw_pred: Predictor, edge_pred: Predictor, image: Image, modality: str
) -> Mask:
    """Extract features, route, and run exactly one predictor."""
    choice, _ = route_image(rule, image, modality)
    return (edge_pred if choice == EDGE else raw_pred).predict(image)


# ── Training ─────────────────────────────────────────────────────────────


def realized_performance(rule: ModalityRule, records: Sequence[EvalRecord]) -> float:
    """Mean performance obtained when rule picks the pipeline for each record."""
    if not records:
        return 0.0
    return math.fsum(r.perf_of(rule.decide(r.features)) for r in records) / len(records)


def oracle_performance(records: Sequence[EvalRecord]) -> float:
    """Upper bound: mean of the per-record better pipeline."""
    if not records:
        return 0.0
    return math.fsum(max(r.perf_raw, r.perf_edge) for r in records) / len(records)


def _midpoints(values: Iterable[float]) -> List[float]:
    distinct = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]


def candidate_rules(records: Sequence[EvalRecord]) -> List[ModalityRule]:
    """
    Candidates in tie-break order: always-raw, always-edge, then thresholds at
    feature midpoints by ascending cutoff (sigma before entropy, edge-above
    before raw-above at equal cutoffs).
    """
    thresholds = []
    for f_index, feature in enumerate(Feature):
        for cutoff in _midpoints(r.features.get(feature) for r in records):
            for d_index, direction in enumerate(Direction):
                rule = ModalityRule(RuleKind.THRESHOLD, feature, cutoff, direction)
                thresholds.append(((cutoff, f_index, d_index), rule))
    thresholds.sort(key=lambda item: item[0])
    return [ALWAYS_RAW, ALWAYS_EDGE] + [rule for _, rule in thresholds]


def train_modality(records: Sequence[EvalRecord]) -> ModalityRule:
    """Best candidate by mean realized performance; earlier candidates win ties."""
    best, best_score = None, -math.inf
    for candidate in candidate_rules(records):
        score = realized_performance(candidate, records)
        if score > best_score:
            best, best_score = candidate, score
    return best


def train_router(records: Sequence[EvalRecord]) -> RoutingRule:
    """One rule per modality present in records."""
    if not records:
        raise TrainingError("cannot train a router on an empty record set")
    groups: Dict[str, List[EvalRecord]] = {}
    for record in records:
        groups.setdefault(record.modality, []).append(record)
    rules = {}
    for modality in sorted(groups):
        rules[modality] = train_modality(groups[modality])
        logger.info("Router rule for %s: %s", modality, rules[modality].describe())
    return RoutingRule(rules)


def meta_performances(rule: RoutingRule, records: Sequence[EvalRecord]) -> List[float]:
    """Per-record performance of the routed pipeline."""
    return [r.perf_of(rule.route(r.modality, r.features)) for r in records]


# ── Persistence ──────────────────────────────────────────────────────────


def save_rule(rule: RoutingRule, path: Path) -> Path:
    """Write rule as tagged JSON with modalities in sorted order."""
    payload = {
        "format": RULE_FORMAT,
        "fallback": rule.fallback.to_dict(),
        "rules": {modality: r.to_dict() for modality, r in sorted(rule.rules.items())},
    }
    return write_json(path, payload)


def load_rule(path: Path) -> RoutingRule:
    try:
        data = read_json(path)
    except ValueError as e:
        raise RuleFormatError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(data, dict) or data.get("format") != RULE_FORMAT:
        raise RuleFormatError(f"{path}: missing format tag '{RULE_FORMAT}'")
    try:
        rules = {m: ModalityRule.from_dict(r) for m, r in data.get("rules", {}).items()}
        fallback = ModalityRule.from_dict(data.get("fallback", ALWAYS_RAW.to_dict()))
    except (KeyError, ValueError, TypeError) as e:
        raise RuleFormatError(f"{path}: malformed rule ({e})") from e
    return RoutingRule(rules, fallback)


def write_records(records: Sequence[EvalRecord], path: Path) -> Path:
    rows = (
        [
            r.image_id,
            r.modality,
            r.features.sigma,
            r.features.entropy,
            r.perf_raw,
            r.perf_edge,
            r.delta,
            r.label,
            r.loss_raw,
            r.loss_edge,
        ]
        for r in records
    )
    return write_csv(path, RECORD_COLUMNS, rows)


def _optional_float(value: Optional[str]) -> Optional[float]:
    return float(value) if value not in (None, "") else None


def read_records(path: Path) -> List[EvalRecord]:
    header, rows = read_csv(path)
    required = ("image", "modality", "sigma", "entropy", "perf_raw", "perf_edge")
    missing = [c for c in required if c not in header]
    if missing:
        raise ReportError(f"{path}: missing column(s) {', '.join(missing)}")
    records = []
    for index, row in enumerate(rows, start=2):
        try:
            records.append(
                EvalRecord(
                    image_id=row["image"],
                    modality=row["modality"],
                    features=FeatureVector(float(row["sigma"]), float(row["entropy"])),
                    perf_raw=float(row["perf_raw"]),
                    perf_edge=float(row["perf_edge"]),
                    loss_raw=_optional_float(row.get("loss_raw")),
                    loss_edge=_optional_float(row.get("loss_edge")),
                )
            )
        except (TypeError, ValueError) as e:
            raise ReportError(f"{path}: row {index}: {e}") from e
    return records
