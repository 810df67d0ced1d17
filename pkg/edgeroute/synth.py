"""
Synthetic image/mask populations with analytic ground truth.

Each population draws objects (disks, rectangles or blobs) onto a flat,
noisy or gradient background. Texture knobs control the spread of the raw
images' standard deviation and entropy, so routing experiments have signal
by construction. The same spec and seed always produce byte-identical files.
"""

import logging
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from edgeroute.errors import ConfigError
from edgeroute.imaging import DatasetManifest, Image, ManifestEntry, Mask, save_image, save_mask, write_manifest

logger = logging.getLogger(__name__)

MARGIN = 4  # objects never touch the border


class ShapeFamily(str, Enum):
    DISKS = "disks"
    RECTANGLES = "rectangles"
    BLOBS = "blobs"


class Texture(str, Enum):
    FLAT = "flat"
    GAUSSIAN_NOISE = "gaussian-noise"
    GRADIENT = "gradient"


@dataclass(frozen=True)
class SynthSpec:
    """
    One population. noise_sigma adds Gaussian noise on top of any texture;
    the gaussian-noise texture is a flat background that requires it.
    """

    modality: str
    n_images: int
    shape: ShapeFamily = ShapeFamily.DISKS
    texture: Texture = Texture.FLAT
    noise_sigma: float = 0.0
    gradient_amplitude: float = 120.0
    contrast: float = 100.0
    background: float = 60.0
    objects: int = 1
    size: int = 128
    seed: int = 0
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "shape", ShapeFamily(self.shape))
        object.__setattr__(self, "texture", Texture(self.texture))
        if self.n_images < 1:
            raise ConfigError(f"n_images must be >= 1, got {self.n_images}")
        if self.size < 4 * MARGIN:
            raise ConfigError(f"size must be >= {4 * MARGIN}, got {self.size}")
        if self.objects < 1:
            raise ConfigError(f"objects must be >= 1, got {self.objects}")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.texture is Texture.GAUSSIAN_NOISE and self.noise_sigma <= 0:
            raise ConfigError("texture 'gaussian-noise' needs noise_sigma > 0")

    @property
    def prefix(self) -> str:
        return self.name or self.modality.lower()

    @classmethod
    def from_dict(cls, data: Dict[str, Any], default_seed: int = 0) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown population key(s): {', '.join(unknown)}")
        for key in ("modality", "n_images"):
            if key not in data:
                raise ConfigError(f"population is missing '{key}'")
        try:
            return cls(**{"seed": default_seed, **data})
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid population {data.get('name') or data['modality']}: {e}") from e


def _draw_objects(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    size = spec.size
    canvas = PILImage.new("L", (size, size), 0)
    draw = ImageDraw.Draw(canvas)
    for _ in range(spec.objects):
        if spec.shape is ShapeFamily.RECTANGLES:
            w, h = rng.integers(size // 8, size // 3, size=2, endpoint=True)
            x0 = int(rng.integers(MARGIN, size - MARGIN - w))
            y0 = int(rng.integers(MARGIN, size - MARGIN - h))
            draw.rectangle((x0, y0, x0 + int(w) - 1, y0 + int(h) - 1), fill=255)
            continue
        r = int(rng.integers(size // 10, size // 5, endpoint=True))
        cx, cy = (int(v) for v in rng.integers(MARGIN + r, size - MARGIN - r, size=2))
        if spec.shape is ShapeFamily.DISKS:
            draw.ellipse((cx - r, cy - r, cx + r, cy + r), fill=255)
            continue
        # blob: overlapping lobes around the centre, each kept inside the margin
        for _ in range(int(rng.integers(3, 5, endpoint=True))):
            lobe = min(max(1, int(r * rng.uniform(0.4, 0.7))), r)
            ox, oy = (int(v) for v in rng.integers(-(r - lobe), r - lobe, size=2, endpoint=True))
            draw.ellipse((cx + ox - lobe, cy + oy - lobe, cx + ox + lobe, cy + oy + lobe), fill=255)
    return np.array(canvas) > 0


def _background(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    size = spec.size
    base = np.full((size, size), spec.background, dtype=np.float64)
    if spec.texture is Texture.GRADIENT:
        ramp = np.linspace(0.0, spec.gradient_amplitude, size)
        if rng.integers(2):
            ramp = ramp[::-1]
        base = base + (ramp[np.newaxis, :] if rng.integers(2) else ramp[:, np.newaxis])
    return base


def render(spec: SynthSpec) -> Iterator[Tuple[str, Image, Mask]]:
    """Yield (name, image, ground truth) for every image of the population."""
    rng = np.random.default_rng(spec.seed)
    for index in range(spec.n_images):
        name = f"{spec.prefix}_{index:04d}"
        mask = _draw_objects(spec, rng)
        values = _background(spec, rng) + spec.contrast * mask
        if spec.noise_sigma > 0:
            values = values + rng.normal(0.0, spec.noise_sigma, size=values.shape)
        pixels = np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)
        yield name, Image(pixels, name), Mask(mask, name)


def generate_populations(specs: Sequence[SynthSpec], out_dir: Path) -> DatasetManifest:
    """Write images/, gt/ and manifest.csv under out_dir for all populations."""
    prefixes = [s.prefix for s in specs]
    duplicates = sorted({p for p in prefixes if prefixes.count(p) > 1})
    if duplicates:
        raise ConfigError(f"population names must be unique: {', '.join(duplicates)}")
    out_dir = Path(out_dir)
    entries: List[ManifestEntry] = []
    for spec in specs:
        for name, image, gt in render(spec):
            image_path = save_image(image, out_dir / "images" / f"{name}.png")
            gt_path = save_mask(gt, out_dir / "gt" / f"{name}.png")
            entries.append(ManifestEntry(image=image_path, gt=gt_path, modality=spec.modality))
        logger.info("Generated %d %s images for %s", spec.n_images, spec.texture.value, spec.modality)
    manifest = DatasetManifest(tuple(entries))
    write_manifest(manifest, out_dir / "manifest.csv")
    return manifest


def generate(spec: SynthSpec, out_dir: Path) -> DatasetManifest:
    """One population; see generate_populations."""
    return generate_populations([spec], out_dir)
