"""
Opaque segmentation predictors.

Trained models are reachable only through their precomputed masks; two toy
segmenters stand in for them so the routing pipeline runs end to end:

- ThresholdOtsu: Otsu threshold on the raw image.
- EdgeAssistedThreshold: Otsu threshold on the edge-enhanced image, then
  hole filling from the border. It consumes edge-enhanced input.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import ClassVar, Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage
from skimage.filters import threshold_otsu

from edgeroute.edges import EdgeOperatorKind, enhance
from edgeroute.errors import DataError, PredictionError, PredictorSpecError
from edgeroute.imaging import DatasetManifest, Image, ManifestEntry, Mask, load_image, load_mask
from edgeroute.metrics import FOUR_CONNECTED

logger = logging.getLogger(__name__)


class PredictorKind(str, Enum):
    PRECOMPUTED = "masks"
    OTSU = "otsu"
    EDGE_OTSU = "edge-otsu"


def otsu_mask(pixels: np.ndarray) -> np.ndarray:
    """Foreground = intensities above the Otsu threshold; constant input gives an empty mask."""
    if pixels.min() == pixels.max():
        return np.zeros(pixels.shape, dtype=np.bool_)
    return pixels > threshold_otsu(pixels)


class Predictor:
    """Base class: predict() maps an Image to a Mask of the same shape."""

    kind: ClassVar[PredictorKind]
    edge_input: ClassVar[bool] = False
    predictor_id: str

    def predict(self, image: Image) -> Mask:
        raise NotImplementedError


@dataclass(frozen=True)
class ThresholdOtsu(Predictor):
    predictor_id: str = "otsu"
    kind: ClassVar[PredictorKind] = PredictorKind.OTSU

    def predict(self, image: Image) -> Mask:
        return Mask(otsu_mask(image.pixels), image.name)


@dataclass(frozen=True)
class EdgeAssistedThreshold(Predictor):
    predictor_id: str = "edge-otsu"
    operator: EdgeOperatorKind = EdgeOperatorKind.KIRSCH
    scale: Optional[float] = None
    kind: ClassVar[PredictorKind] = PredictorKind.EDGE_OTSU
    edge_input: ClassVar[bool] = True

    def predict(self, image: Image) -> Mask:
        edge_image = enhance(image, self.operator, self.scale)
        outline = otsu_mask(edge_image.pixels)
        return Mask(ndimage.binary_fill_holes(outline, structure=FOUR_CONNECTED), image.name)


@dataclass(frozen=True)
class PrecomputedMasks(Predictor):
    """Masks produced elsewhere, looked up as <directory>/<image-stem>.png or by explicit path."""

    directory: Optional[Path] = None
    paths: Dict[str, Path] = field(default_factory=dict, hash=False)
    predictor_id: str = "masks"
    kind: ClassVar[PredictorKind] = PredictorKind.PRECOMPUTED

    @classmethod
    def from_manifest(cls, manifest: DatasetManifest, column: str) -> "PrecomputedMasks":
        if column not in ("pred_raw", "pred_edge"):
            raise PredictorSpecError(f"unknown manifest column '{column}'")
        paths = {e.image_id: getattr(e, column) for e in manifest.entries if getattr(e, column) is not None}
        return cls(paths=paths, predictor_id=f"column:{column}")

    def locate(self, image_id: str) -> Path:
        if image_id in self.paths:
            return self.paths[image_id]
        if self.directory is not None:
            candidate = Path(self.directory) / f"{image_id}.png"
            if candidate.is_file():
                return candidate
        raise PredictionError(image_id, f"no precomputed mask for '{image_id}' in {self.predictor_id}")

    def predict(self, image: Image) -> Mask:
        mask = load_mask(self.locate(image.name))
        if mask.shape != image.shape:
            raise PredictionError(image.name, f"precomputed mask shape {mask.shape} != image shape {image.shape}")
        return Mask(mask.bits, image.name)


def parse_predictor(
    spec: str,
    manifest: Optional[DatasetManifest] = None,
    operator: EdgeOperatorKind = EdgeOperatorKind.KIRSCH,
    scale: Optional[float] = None,
) -> Predictor:
    """
    Build a predictor from a CLI spec: otsu, edge-otsu, masks:<dir>, column:<pred_raw|pred_edge>.
    A bare existing directory is read as masks:<dir>.
    """
    spec = spec.strip()
    if spec == PredictorKind.OTSU.value:
        return ThresholdOtsu()
    if spec == PredictorKind.EDGE_OTSU.value:
        return EdgeAssistedThreshold(operator=EdgeOperatorKind(operator), scale=scale)
    prefix, _, value = spec.partition(":")
    if prefix == PredictorKind.PRECOMPUTED.value and value:
        return PrecomputedMasks(directory=Path(value), predictor_id=spec)
    if prefix == "column" and value:
        if manifest is None:
            raise PredictorSpecError(f"'{spec}' needs a manifest with prediction columns")
        return PrecomputedMasks.from_manifest(manifest, value)
    if Path(spec).is_dir():
        return PrecomputedMasks(directory=Path(spec), predictor_id=f"masks:{spec}")
    raise PredictorSpecError(f"unknown predictor '{spec}' (expected otsu, edge-otsu, masks:<dir>, column:<name>)")


@dataclass
class BatchPrediction:
    masks: List[Tuple[str, Mask]] = field(default_factory=list)
    failures: List[Tuple[str, str]] = field(default_factory=list)


def _predict_entry(predictor: Predictor, entry: ManifestEntry):
    try:
        return entry.image_id, predictor.predict(load_image(entry.image)), None
    except (DataError, OSError) as e:
        return entry.image_id, None, str(e)


def predict_batch(predictor: Predictor, manifest: DatasetManifest, workers: int = 1) -> BatchPrediction:
    """Predict every entry in manifest order; per-image failures are collected, not raised."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda e: _predict_entry(predictor, e), manifest.entries))
    else:
        outcomes = [_predict_entry(predictor, e) for e in manifest.entries]

    result = BatchPrediction()
    for image_id, mask, error in outcomes:
        if error is None:
            result.masks.append((image_id, mask))
        else:
            logger.warning("Prediction failed for %s: %s", image_id, error)
            result.failures.append((image_id, error))
    return result
