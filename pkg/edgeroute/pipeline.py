"""
End-to-end routing experiment.

Stages run strictly in order and each only reads what earlier stages wrote:

    ingest       load or synthesise the dataset, split it for the router
    records      score both predictors on both splits
    route-train  fit the routing rule on the router split
    route-apply  route every held-out image
    analyze      per-modality report, loss t-tests, regressions

A .partial marker sits in the output directory until every stage succeeds.
"""

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional

from edgeroute.analysis import AnalysisReport, analyze, write_reports
from edgeroute.config import PipelineConfig, PredictorConfig
from edgeroute.errors import SplitError, StageError
from edgeroute.imaging import DatasetManifest, load_manifest, stratified_split, write_manifest
from edgeroute.predictors import (
    EdgeAssistedThreshold,
    PrecomputedMasks,
    Predictor,
    PredictorKind,
    ThresholdOtsu,
)
from edgeroute.router import (
    EvalRecord,
    RoutingRule,
    build_eval_records,
    meta_performances,
    oracle_performance,
    save_rule,
    train_router,
    write_records,
)
from edgeroute.synth import generate_populations

logger = logging.getLogger(__name__)

PARTIAL_MARKER = ".partial"


@dataclass
class PipelineResult:
    output_dir: Path
    rule: RoutingRule
    report: AnalysisReport
    router_records: List[EvalRecord]
    holdout_records: List[EvalRecord]
    router_policies: Dict[str, float] = field(default_factory=dict)
    artifacts: List[Path] = field(default_factory=list)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any failure raised inside the block with the stage name."""
    logger.info("Stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as e:  # pylint: disable=broad-except
        raise StageError(name, e) from e


def build_predictor(pconf: PredictorConfig, config: PipelineConfig, manifest: DatasetManifest) -> Predictor:
    if pconf.kind is PredictorKind.OTSU:
        return ThresholdOtsu()
    if pconf.kind is PredictorKind.EDGE_OTSU:
        return EdgeAssistedThreshold(operator=config.edge.operator, scale=config.edge.scale)
    if pconf.dir is not None:
        return PrecomputedMasks(directory=pconf.dir, predictor_id=f"masks:{pconf.dir}")
    return PrecomputedMasks.from_manifest(manifest, pconf.column)


def ingest(config: PipelineConfig) -> DatasetManifest:
    if config.data.synth is not None:
        synth = config.data.synth
        generate_populations(synth.populations, synth.out_dir)
        return load_manifest(synth.out_dir / "manifest.csv", config.modalities)
    return load_manifest(config.data.manifest, config.modalities)


def _policies(rule: RoutingRule, records: List[EvalRecord]) -> Dict[str, float]:
    n = len(records)
    meta = meta_performances(rule, records)
    return {
        "always_raw": math.fsum(r.perf_raw for r in records) / n,
        "always_edge": math.fsum(r.perf_edge for r in records) / n,
        "meta": math.fsum(meta) / n,
        "oracle": oracle_performance(records),
    }


def run_pipeline(config: PipelineConfig, output_dir: Optional[Path] = None) -> PipelineResult:
    out = Path(output_dir or config.output_dir)
    artifacts: List[Path] = []

    with stage("ingest"):
        out.mkdir(parents=True, exist_ok=True)
        marker = out / PARTIAL_MARKER
        marker.touch()
        manifest = ingest(config)
        router_split, holdout_split = stratified_split(manifest, config.split.router_fraction, config.split.seed)
        for name, split in (("router", router_split), ("held-out", holdout_split)):
            if len(split) == 0:
                raise SplitError(
                    f"{name} split is empty: router_fraction {config.split.router_fraction} over {len(manifest)} images"
                )
        artifacts.append(write_manifest(router_split, out / "router_split.csv"))
        artifacts.append(write_manifest(holdout_split, out / "holdout_split.csv"))
        raw_pred = build_predictor(config.raw, config, manifest)
        edge_pred = build_predictor(config.edge_predictor, config, manifest)
        logger.info("Split %d images: %d router, %d held out", len(manifest), len(router_split), len(holdout_split))

    with stage("records"):
        router_records = build_eval_records(router_split, raw_pred, edge_pred, config.tau, config.workers)
        holdout_records = build_eval_records(holdout_split, raw_pred, edge_pred, config.tau, config.workers)
        artifacts.append(write_records(router_records, out / "records_router.csv"))
        artifacts.append(write_records(holdout_records, out / "records_holdout.csv"))

    with stage("route-train"):
        rule = train_router(router_records)
        artifacts.append(save_rule(rule, out / "rule.json"))

    with stage("route-apply"):
        meta_perfs = meta_performances(rule, holdout_records)
        logger.info(
            "Held-out realized performance %.4f (raw-only %.4f)",
            sum(meta_perfs) / len(meta_perfs),
            sum(r.perf_raw for r in holdout_records) / len(holdout_records),
        )

    with stage("analyze"):
        report = analyze(holdout_records, meta_perfs, config.alpha)
        artifacts.extend(write_reports(report, out))

    marker.unlink()
    return PipelineResult(
        output_dir=out,
        rule=rule,
        report=report,
        router_records=router_records,
        holdout_records=holdout_records,
        router_policies=_policies(rule, router_records),
        artifacts=artifacts,
    )
