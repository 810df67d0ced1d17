"""
Image and mask representation, PGM/PNG I/O, dataset manifests and
stratified splitting.

Images are 8-bit grayscale numpy arrays (height x width); masks are boolean
arrays of the same shape. Both are frozen after construction.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from edgeroute.errors import DimensionError, ImageFormatError, ManifestError, SplitError
from edgeroute.utils.artifacts import read_csv, write_csv

logger = logging.getLogger(__name__)

MODALITIES = ("Dermoscopy", "Fundus", "Mammography", "Microscopy", "OCT", "US", "XRay")
MASK_THRESHOLD = 127  # intensity > 127 is foreground

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

MANIFEST_COLUMNS = ("image", "gt", "modality")
OPTIONAL_MANIFEST_COLUMNS = ("pred_raw", "pred_edge")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Image:
    """Grayscale intensities in [0, 255], row-major (height, width)."""

    pixels: np.ndarray
    name: str = ""

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionError(f"image must be a non-empty 2-D grid, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise ImageFormatError("intensities must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(pixels))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape

    def renamed(self, name: str) -> "Image":
        return replace(self, name=name)


@dataclass(frozen=True, eq=False)
class EdgeImage(Image):
    """Output of an edge operator; same shape as its source image."""


@dataclass(frozen=True, eq=False)
class Mask:
    """Binary segmentation, True = foreground."""

    bits: np.ndarray
    name: str = ""

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise DimensionError(f"mask must be a non-empty 2-D grid, got shape {bits.shape}")
        if bits.dtype != np.bool_:
            if not np.isin(bits, (0, 1)).all():
                raise ImageFormatError("mask values must be strictly binary")
            bits = bits.astype(np.bool_)
        object.__setattr__(self, "bits", _frozen(bits))

    @classmethod
    def empty(cls, shape: Tuple[int, int], name: str = "") -> "Mask":
        return cls(np.zeros(shape, dtype=np.bool_), name)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.bits.shape

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))

    __hash__ = None


def check_same_shape(a, b) -> None:
    """Raise DimensionError unless a and b have equal (height, width)."""
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


# ── Decoding ─────────────────────────────────────────────────────────────


def to_grayscale(array: np.ndarray) -> np.ndarray:
    """
    Convert an (H, W) or (H, W, 3|4) uint8 array to 8-bit grayscale.

    Colour input uses luma = round(0.299 R + 0.587 G + 0.114 B), halves rounded up.
    Gray input is returned unchanged.
    """
    array = np.asarray(array)
    if array.ndim == 2:
        return array.astype(np.uint8, copy=False)
    if array.ndim != 3 or array.shape[2] not in (3, 4):
        raise ImageFormatError(f"unsupported channel layout {array.shape}")
    rgb = array[..., :3].astype(np.float64)
    luma = rgb @ np.asarray(LUMA_WEIGHTS)
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def _decode(path: Path) -> np.ndarray:
    path = Path(path)
    try:
        with PILImage.open(path) as img:
            mode = img.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise ImageFormatError(f"{path}: unsupported bit depth (mode {mode}); expected 8-bit")
            if mode == "1":
                img = img.convert("L")
            elif mode == "LA":
                img = img.convert("L")
            elif mode in ("P", "PA", "CMYK", "YCbCr"):
                img = img.convert("RGB")
            elif mode not in ("L", "RGB", "RGBA"):
                raise ImageFormatError(f"{path}: unsupported image mode {mode}")
            return np.array(img)
    except UnidentifiedImageError as e:
        raise ImageFormatError(f"{path}: not a decodable PGM/PNG image") from e


def load_image(path: Path) -> Image:
    """Decode a PGM (P5) or 8-bit PNG file; colour is converted to luma."""
    path = Path(path)
    return Image(to_grayscale(_decode(path)), name=path.stem)


def load_mask(path: Path) -> Mask:
    """Decode a single-channel image and binarise at intensity > 127."""
    path = Path(path)
    array = _decode(path)
    if array.ndim != 2:
        raise ImageFormatError(f"{path}: mask must be single-channel")
    return Mask(array > MASK_THRESHOLD, name=path.stem)


def save_image(image: Image, path: Path) -> Path:
    """Write PNG or PGM depending on the suffix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pil = PILImage.fromarray(np.asarray(image.pixels, dtype=np.uint8), mode="L")
    fmt = "PPM" if path.suffix.lower() == ".pgm" else "PNG"
    pil.save(path, format=fmt)
    return path


def save_mask(mask: Mask, path: Path) -> Path:
    """Masks are stored as 0/255 grayscale."""
    return save_image(Image(mask.bits.astype(np.uint8) * 255), path)


# ── Manifests ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ManifestEntry:
    image: Path
    gt: Path
    modality: str
    pred_raw: Optional[Path] = None
    pred_edge: Optional[Path] = None

    @property
    def image_id(self) -> str:
        return self.image.stem


@dataclass(frozen=True)
class DatasetManifest:
    entries: Tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def modalities(self) -> List[str]:
        return sorted({e.modality for e in self.entries})

    def by_modality(self) -> Dict[str, List[ManifestEntry]]:
        groups: Dict[str, List[ManifestEntry]] = {}
        for entry in self.entries:
            groups.setdefault(entry.modality, []).append(entry)
        return groups

    def counts(self) -> Dict[str, int]:
        return {m: len(v) for m, v in sorted(self.by_modality().items())}


def _resolve(base: Path, value: str, column: str, row: int) -> Path:
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise ManifestError(f"row {row}: {column} path does not exist: {path}")
    return path


def load_manifest(path: Path, modalities: Optional[Sequence[str]] = MODALITIES) -> DatasetManifest:
    """
    Read a manifest CSV with header image,gt,modality[,pred_raw,pred_edge].

    Relative paths resolve against the manifest's directory and must exist.
    Pass modalities=None to accept any modality tag.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    header, rows = read_csv(path)
    missing = [c for c in MANIFEST_COLUMNS if c not in header]
    if missing:
        raise ManifestError(f"{path}: missing column(s) {', '.join(missing)}")
    allowed = set(modalities) if modalities is not None else None
    base = path.parent
    entries = []
    for index, row in enumerate(rows, start=2):
        modality = (row.get("modality") or "").strip()
        if not modality or (allowed is not None and modality not in allowed):
            raise ManifestError(f"row {index}: undeclared modality '{modality}'")
        optional = {}
        for column in OPTIONAL_MANIFEST_COLUMNS:
            value = (row.get(column) or "").strip()
            optional[column] = _resolve(base, value, column, index) if value else None
        entries.append(
            ManifestEntry(
                image=_resolve(base, (row.get("image") or "").strip(), "image", index),
                gt=_resolve(base, (row.get("gt") or "").strip(), "gt", index),
                modality=modality,
                **optional,
            )
        )
    logger.debug("Loaded %d manifest entries from %s", len(entries), path)
    return DatasetManifest(tuple(entries))


def _relative(path: Optional[Path], base: Path) -> str:
    if path is None:
        return ""
    try:
        return Path(path).resolve().relative_to(base.resolve()).as_posix()
    except ValueError:
        return Path(path).resolve().as_posix()


def write_manifest(manifest: DatasetManifest, path: Path) -> Path:
    """Write a manifest CSV with paths relative to its directory where possible."""
    path = Path(path)
    base = path.parent
    with_preds = any(e.pred_raw or e.pred_edge for e in manifest.entries)
    header = list(MANIFEST_COLUMNS) + (list(OPTIONAL_MANIFEST_COLUMNS) if with_preds else [])
    rows = []
    for e in manifest.entries:
        row = [_relative(e.image, base), _relative(e.gt, base), e.modality]
        if with_preds:
            row += [_relative(e.pred_raw, base), _relative(e.pred_edge, base)]
        rows.append(row)
    return write_csv(path, header, rows)


def stratified_split(
    manifest: DatasetManifest, fraction: float, seed: int
) -> Tuple[DatasetManifest, DatasetManifest]:
    """
    Partition each modality with a seeded shuffle and prefix take.

    ceil(fraction * count) entries of every modality go to the first split.
    Both outputs keep the input's entry order.
    """
    if not 0.0 < fraction < 1.0:
        raise SplitError(f"fraction must lie in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    groups: Dict[str, List[int]] = {}
    for index, entry in enumerate(manifest.entries):
        groups.setdefault(entry.modality, []).append(index)
    first: List[int] = []
    second: List[int] = []
    for modality, group in sorted(groups.items()):
        if len(group) < 2:
            raise SplitError(f"modality '{modality}' has {len(group)} entry; at least 2 are required")
        # round() guards against products like 0.7 * 10 = 7.000000000000001
        take = math.ceil(round(fraction * len(group), 9))
        order = rng.permutation(len(group))
        first.extend(group[i] for i in order[:take])
        second.extend(group[i] for i in order[take:])
    entries = manifest.entries
    return (
        DatasetManifest(tuple(entries[i] for i in sorted(first))),
        DatasetManifest(tuple(entries[i] for i in sorted(second))),
    )


def iter_images(manifest: DatasetManifest) -> Iterable[Tuple[ManifestEntry, Image]]:
    for entry in manifest.entries:
        yield entry, load_image(entry.image)
