"""Build per-image evaluation records for a raw/edge predictor pair."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from edgeroute.edges import EdgeOperatorKind
from edgeroute.errors import EdgeRouteError
from edgeroute.imaging import load_manifest
from edgeroute.metrics import DEFAULT_TAU
from edgeroute.predictors import parse_predictor
from edgeroute.router import build_eval_records, write_records
from edgeroute.utils.console import fail, spinner

console = Console()


def records_command(
    manifest_path: Path = typer.Option(..., "--in", "-i", help="Manifest CSV"),
    raw: str = typer.Option("otsu", "--raw", help="Raw-input predictor spec"),
    edge: str = typer.Option("edge-otsu", "--edge", help="Edge-input predictor spec"),
    op: EdgeOperatorKind = typer.Option(EdgeOperatorKind.KIRSCH, "--op", help="Operator for edge-otsu"),
    scale: Optional[float] = typer.Option(None, "--scale", help="Operator scale for edge-otsu"),
    tau: float = typer.Option(DEFAULT_TAU, "--tau", min=0.0, help="NSD tolerance in pixels"),
    workers: int = typer.Option(1, "--workers", "-w", min=1, help="Threads used for scoring"),
    out: Path = typer.Option(Path("records.csv"), "--out", "-o", help="Output records CSV"),
) -> None:
    """
    Score both pipelines on every image and record meta-features, performance and loss.

    \b
    Predictor specs:
        otsu | edge-otsu | masks:<dir> | column:<pred_raw|pred_edge> | <dir>

    \b
    Example:
        edgeroute records --in data/manifest.csv --raw column:pred_raw --edge column:pred_edge
    """
    try:
        manifest = load_manifest(manifest_path, modalities=None)
        raw_pred = parse_predictor(raw, manifest, op, scale)
        edge_pred = parse_predictor(edge, manifest, op, scale)
        with spinner(console) as progress:
            pair = f"{raw_pred.predictor_id} and {edge_pred.predictor_id}"
            progress.add_task(f"Scoring {pair} on {len(manifest)} images...")
            records = build_eval_records(manifest, raw_pred, edge_pred, tau, workers)
        write_records(records, out)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    wins = sum(r.label for r in records)
    console.print(f"[green]Success! Wrote {len(records)} records to {out}[/green]")
    console.print(f"  Edge pipeline strictly better on {wins} of {len(records)} images")
