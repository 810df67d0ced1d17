"""Score predicted masks against ground truth: DSC, NSD, performance and loss terms."""

from pathlib import Path

import typer
from rich.console import Console

from edgeroute.errors import DataError, EdgeRouteError, PredictionError
from edgeroute.imaging import check_same_shape, load_image, load_manifest, load_mask
from edgeroute.metrics import DEFAULT_TAU, loss, perf
from edgeroute.predictors import parse_predictor
from edgeroute.utils.artifacts import write_csv
from edgeroute.utils.console import fail, spinner

console = Console()

SCORE_COLUMNS = ("image", "modality", "dsc", "nsd", "perf", "bce", "dice_loss", "iou_loss", "total_loss")


def score_command(
    pred: str = typer.Option(
        ..., "--pred", "-p", help="Mask directory, masks:<dir>, column:<pred_raw|pred_edge>, otsu or edge-otsu"
    ),
    gt_manifest: Path = typer.Option(..., "--gt", "-g", help="Manifest CSV with ground-truth masks"),
    tau: float = typer.Option(DEFAULT_TAU, "--tau", min=0.0, help="NSD tolerance in pixels"),
    out: Path = typer.Option(Path("scores.csv"), "--out", "-o", help="Output CSV"),
) -> None:
    """
    Per-image segmentation scores.

    \b
    Examples:
        edgeroute score --pred preds/ --gt data/manifest.csv --out scores.csv
        edgeroute score --pred column:pred_edge --gt data/manifest.csv --tau 1
    """
    try:
        manifest = load_manifest(gt_manifest, modalities=None)
        predictor = parse_predictor(pred, manifest)
        rows = []
        with spinner(console) as progress:
            task = progress.add_task(f"Scoring {len(manifest)} masks...", total=len(manifest))
            for entry in manifest:
                try:
                    image = load_image(entry.image)
                    gt = load_mask(entry.gt)
                    check_same_shape(image, gt)
                    mask = predictor.predict(image)
                except PredictionError:
                    raise
                except (DataError, OSError) as e:
                    raise PredictionError(entry.image_id, str(e)) from e
                score, loss_value = perf(mask, gt, tau), loss(mask, gt)
                rows.append(
                    [
                        entry.image_id,
                        entry.modality,
                        score.dsc,
                        score.nsd,
                        score.perf,
                        loss_value.bce,
                        loss_value.dice,
                        loss_value.iou,
                        loss_value.total,
                    ]
                )
                progress.advance(task)
        write_csv(out, SCORE_COLUMNS, rows)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    console.print(f"[green]Success! Scored {len(rows)} images -> {out}[/green]")
