"""
Edge-enhance images with a fixed-scale Kirsch, Sobel or Prewitt operator.

Input is either a single PGM/PNG file or a manifest; outputs keep the source
file names.
"""

from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console

from edgeroute.edges import EdgeOperatorKind, enhance
from edgeroute.errors import EdgeRouteError
from edgeroute.imaging import load_image, load_manifest, save_image
from edgeroute.utils.console import fail, spinner

console = Console()


def source_images(source: Path) -> List[Path]:
    """A .csv source is a manifest (any modality); anything else is one image file."""
    if source.suffix.lower() == ".csv":
        return [entry.image for entry in load_manifest(source, modalities=None)]
    return [source]


def enhance_command(
    source: Path = typer.Option(..., "--in", "-i", help="Image file or manifest CSV"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
    op: EdgeOperatorKind = typer.Option(EdgeOperatorKind.KIRSCH, "--op", help="Edge operator"),
    scale: Optional[float] = typer.Option(
        None, "--scale", help="Response scale before clamping (default: operator constant)"
    ),
) -> None:
    """
    Write edge-enhanced copies of images.

    \b
    Examples:
        edgeroute enhance --in data/manifest.csv --out edges/
        edgeroute enhance --in scan.pgm --out edges/ --op sobel --scale 0.5
    """
    try:
        paths = source_images(source)
        with spinner(console) as progress:
            task = progress.add_task(f"Enhancing {len(paths)} images...", total=len(paths))
            for path in paths:
                progress.update(task, description=f"Enhancing: {path.name}")
                save_image(enhance(load_image(path), op, scale), out / path.name)
                progress.advance(task)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    console.print(f"[green]Success! Wrote {len(paths)} {op.value} images to {out}[/green]")
