"""
Train and apply the routing rule.

route-train fits one rule per modality from a records CSV; route-apply routes
every manifest image to exactly one predictor and writes the chosen masks.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import typer
from rich.console import Console
from rich.table import Table

from edgeroute.edges import EdgeOperatorKind
from edgeroute.errors import EdgeRouteError, PredictionError
from edgeroute.imaging import DatasetManifest, ManifestEntry, load_image, load_manifest, save_mask
from edgeroute.predictors import parse_predictor, predict_batch
from edgeroute.router import (
    EDGE,
    RAW,
    EvalRecord,
    RoutingRule,
    load_rule,
    oracle_performance,
    read_records,
    realized_performance,
    route_image,
    save_rule,
    train_router,
)
from edgeroute.utils.artifacts import write_csv
from edgeroute.utils.console import fail, spinner

console = Console()

ROUTING_COLUMNS = ("image", "modality", "sigma", "entropy", "choice", "pipeline")


def rule_table(rule: RoutingRule, records: Sequence[EvalRecord] = ()) -> Table:
    """Rules per modality, with realized and oracle performance when records are given."""
    table = Table(title="Routing Rule")
    table.add_column("Modality", style="cyan")
    table.add_column("Rule")
    if records:
        table.add_column("Routed", justify="right")
        table.add_column("Oracle", justify="right")
    for modality, modality_rule in sorted(rule.rules.items()):
        row = [modality, modality_rule.describe()]
        if records:
            group = [r for r in records if r.modality == modality]
            row += [f"{realized_performance(modality_rule, group):.2f}", f"{oracle_performance(group):.2f}"]
        table.add_row(*row)
    return table


def route_train_command(
    records_path: Path = typer.Option(..., "--records", "-r", help="Records CSV from 'edgeroute records'"),
    out: Path = typer.Option(Path("rule.json"), "--out", "-o", help="Output rule file"),
) -> None:
    """
    Fit the per-modality routing rule that maximises realized performance.

    \b
    Example:
        edgeroute route-train --records records.csv --out rule.json
    """
    try:
        records = read_records(records_path)
        rule = train_router(records)
        save_rule(rule, out)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    console.print(rule_table(rule, records))
    console.print(f"\n[green]Success! Wrote {out}[/green]")


def route_apply_command(
    rule_path: Path = typer.Option(..., "--rule", help="Rule file from 'edgeroute route-train'"),
    manifest_path: Path = typer.Option(..., "--in", "-i", help="Manifest CSV"),
    raw: str = typer.Option("otsu", "--raw", help="Raw-input predictor spec"),
    edge: str = typer.Option("edge-otsu", "--edge", help="Edge-input predictor spec"),
    op: EdgeOperatorKind = typer.Option(EdgeOperatorKind.KIRSCH, "--op", help="Operator for edge-otsu"),
    scale: Optional[float] = typer.Option(None, "--scale", help="Operator scale for edge-otsu"),
    workers: int = typer.Option(1, "--workers", "-w", min=1, help="Threads used for prediction"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
) -> None:
    """
    Route each image to one predictor and write its mask.

    Writes <out>/masks/<image>.png and <out>/routing.csv. Images whose
    predictor fails are listed and the command exits with a data error
    after writing everything else.

    \b
    Example:
        edgeroute route-apply --rule rule.json --in holdout.csv --out routed/
    """
    try:
        rule = load_rule(rule_path)
        manifest = load_manifest(manifest_path, modalities=None)
        predictors = {
            RAW: parse_predictor(raw, manifest, op, scale),
            EDGE: parse_predictor(edge, manifest, op, scale),
        }
        rows = []
        groups: Dict[int, List[ManifestEntry]] = {RAW: [], EDGE: []}
        failures = []
        with spinner(console) as progress:
            task = progress.add_task(f"Routing {len(manifest)} images...", total=len(manifest))
            for entry in manifest:
                choice, fv = route_image(rule, load_image(entry.image), entry.modality)
                groups[choice].append(entry)
                rows.append(
                    [entry.image_id, entry.modality, fv.sigma, fv.entropy, choice, "edge" if choice == EDGE else "raw"]
                )
                progress.advance(task)
            for choice, entries in groups.items():
                if not entries:
                    continue
                progress.update(task, description=f"Predicting {len(entries)} images...")
                batch = predict_batch(predictors[choice], DatasetManifest(tuple(entries)), workers)
                for image_id, mask in batch.masks:
                    save_mask(mask, out / "masks" / f"{image_id}.png")
                failures.extend(batch.failures)
        write_csv(out / "routing.csv", ROUTING_COLUMNS, rows)
        if failures:
            table = Table(title="Prediction Failures")
            table.add_column("Image", style="cyan")
            table.add_column("Error", style="red")
            for image_id, message in failures:
                table.add_row(image_id, message)
            console.print(table)
            raise PredictionError(failures[0][0], f"{len(failures)} of {len(rows)} routed images have no mask")
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    to_edge = len(groups[EDGE])
    console.print(f"[green]Success! Routed {len(rows)} images ({to_edge} to the edge pipeline) -> {out}[/green]")
