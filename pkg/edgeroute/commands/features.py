"""Extract the standard deviation and entropy meta-features of raw images."""

from pathlib import Path

import typer
from rich.console import Console

from edgeroute.errors import EdgeRouteError
from edgeroute.features import extract_features
from edgeroute.imaging import iter_images, load_manifest
from edgeroute.utils.artifacts import write_csv
from edgeroute.utils.console import fail, spinner

console = Console()

FEATURE_COLUMNS = ("image", "modality", "sigma", "entropy")


def features_command(
    manifest_path: Path = typer.Option(..., "--in", "-i", help="Manifest CSV"),
    out: Path = typer.Option(Path("features.csv"), "--out", "-o", help="Output CSV"),
) -> None:
    """
    Write image,modality,sigma,entropy for every manifest entry.

    \b
    Example:
        edgeroute features --in data/manifest.csv --out features.csv
    """
    try:
        manifest = load_manifest(manifest_path, modalities=None)
        rows = []
        with spinner(console) as progress:
            task = progress.add_task(f"Extracting features from {len(manifest)} images...", total=len(manifest))
            for entry, image in iter_images(manifest):
                fv = extract_features(image)
                rows.append([entry.image_id, entry.modality, fv.sigma, fv.entropy])
                progress.advance(task)
        write_csv(out, FEATURE_COLUMNS, rows)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    console.print(f"[green]Success! Wrote features for {len(rows)} images to {out}[/green]")
