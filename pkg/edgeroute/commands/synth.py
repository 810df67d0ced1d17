"""Generate synthetic image/mask populations with a manifest."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from edgeroute.config import load_populations
from edgeroute.errors import ConfigError, EdgeRouteError
from edgeroute.synth import ShapeFamily, SynthSpec, Texture, generate, generate_populations
from edgeroute.utils.console import fail

console = Console()


def synth_command(
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory (default: out_dir from --config)"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="YAML file with a list of populations"),
    modality: str = typer.Option("Dermoscopy", "--modality", "-m", help="Modality tag"),
    n_images: int = typer.Option(20, "--n-images", "-n", min=1, help="Number of images"),
    shape: ShapeFamily = typer.Option(ShapeFamily.DISKS, "--shape", help="Object shape family"),
    texture: Texture = typer.Option(Texture.FLAT, "--texture", help="Background texture"),
    noise_sigma: float = typer.Option(0.0, "--noise-sigma", min=0.0, help="Gaussian noise standard deviation"),
    gradient_amplitude: float = typer.Option(120.0, "--gradient-amplitude", help="Intensity span of gradients"),
    contrast: float = typer.Option(100.0, "--contrast", help="Object minus background intensity"),
    background: float = typer.Option(60.0, "--background", help="Background intensity"),
    objects: int = typer.Option(1, "--objects", min=1, help="Objects per image"),
    size: int = typer.Option(128, "--size", help="Image side length in pixels"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    name: Optional[str] = typer.Option(None, "--name", help="File name prefix (default: modality)"),
) -> None:
    """
    Write <out>/images/, <out>/gt/ and <out>/manifest.csv.

    Use flags for one population or --config for several.

    \b
    Examples:
        edgeroute synth --out data/ --modality US --texture gradient --noise-sigma 3
        edgeroute synth --config configs/synthetic_demo.yaml
    """
    try:
        if config is not None:
            synth = load_populations(config)
            target = out or synth.out_dir
            specs = synth.populations
            console.print(f"[blue]Generating {sum(s.n_images for s in specs)} images in {len(specs)} populations...[/blue]")
            manifest = generate_populations(specs, target)
        else:
            if out is None:
                raise ConfigError("--out is required without --config")
            spec = SynthSpec(
                modality=modality,
                n_images=n_images,
                shape=shape,
                texture=texture,
                noise_sigma=noise_sigma,
                gradient_amplitude=gradient_amplitude,
                contrast=contrast,
                background=background,
                objects=objects,
                size=size,
                seed=seed,
                name=name,
            )
            target = out
            console.print(f"[blue]Generating {spec.n_images} {spec.modality} images...[/blue]")
            manifest = generate(spec, target)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    for modality_name, count in manifest.counts().items():
        console.print(f"  {modality_name}: {count}")
    console.print(f"\n[green]Success! Wrote {target / 'manifest.csv'}[/green]")
