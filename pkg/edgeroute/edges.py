"""
Edge-enhancement operators: Kirsch compass filtering plus Sobel and Prewitt
gradient magnitude.

All operators use replicate padding so the response has the input's shape,
accumulate in signed 32-bit integers, then scale by a fixed per-operator
factor and clamp to [0, 255].
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import ndimage

from edgeroute.imaging import EdgeImage, Image

# 3825 (= 5 * 3 * 255) is the largest possible Kirsch response
KIRSCH_SCALE = 1.0 / 15.0
SOBEL_SCALE = 1.0 / 4.0
PREWITT_SCALE = 1.0 / 3.0

KIRSCH_BASE = np.array([[5, 5, 5], [-3, 0, -3], [-3, -3, -3]], dtype=np.int32)

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int32)
PREWITT_X = np.array([[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]], dtype=np.int32)

# Border cells of a 3x3 stencil, clockwise from the top-left corner.
RING = ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0))


class EdgeOperatorKind(str, Enum):
    KIRSCH = "kirsch"
    SOBEL = "sobel"
    PREWITT = "prewitt"


def rotate45(kernel: np.ndarray) -> np.ndarray:
    """Rotate a 3x3 compass stencil by one ring step (45 degrees clockwise)."""
    rotated = kernel.copy()
    values = [kernel[r, c] for r, c in RING]
    for i, (r, c) in enumerate(RING):
        rotated[r, c] = values[i - 1]
    return rotated


def kirsch_kernels() -> Tuple[np.ndarray, ...]:
    """The base kernel and its seven successive 45 degree rotations."""
    kernels = [KIRSCH_BASE]
    for _ in range(7):
        kernels.append(rotate45(kernels[-1]))
    return tuple(kernels)


@dataclass(frozen=True, eq=False)
class EdgeOperator:
    kind: EdgeOperatorKind
    kernels: Tuple[np.ndarray, ...]
    default_scale: float

    def response(self, image: Image) -> np.ndarray:
        """Unscaled response map (int32 for Kirsch, float64 magnitude otherwise)."""
        if self.kind is EdgeOperatorKind.KIRSCH:
            return kirsch_response(image)
        gx, gy = gradient_components(image, self.kind)
        return np.hypot(gx, gy)

    def enhance(self, image: Image, scale: Optional[float] = None) -> EdgeImage:
        scale = self.default_scale if scale is None else scale
        return _to_edge_image(self.response(image), scale, image.name)


OPERATORS: Dict[EdgeOperatorKind, EdgeOperator] = {
    EdgeOperatorKind.KIRSCH: EdgeOperator(EdgeOperatorKind.KIRSCH, kirsch_kernels(), KIRSCH_SCALE),
    EdgeOperatorKind.SOBEL: EdgeOperator(EdgeOperatorKind.SOBEL, (SOBEL_X, SOBEL_X.T.copy()), SOBEL_SCALE),
    EdgeOperatorKind.PREWITT: EdgeOperator(EdgeOperatorKind.PREWITT, (PREWITT_X, PREWITT_X.T.copy()), PREWITT_SCALE),
}


def get_operator(kind) -> EdgeOperator:
    """Operator for an EdgeOperatorKind or its string value."""
    return OPERATORS[EdgeOperatorKind(kind)]


def _to_edge_image(response: np.ndarray, scale: float, name: str) -> EdgeImage:
    scaled = np.floor(response.astype(np.float64) * scale + 0.5)
    return EdgeImage(np.clip(scaled, 0, 255).astype(np.uint8), name=name)


def kirsch_response(image: Image) -> np.ndarray:
    """
    Per-pixel maximum over the eight compass kernels, replicate-padded.

    Each kernel weighs three consecutive ring cells by 5 and the other five by
    -3, so its response is 8 * a_k - 3 * S with a_k the sum of those three
    cells and S the ring sum.
    """
    pixels = image.pixels.astype(np.int32)
    h, w = pixels.shape
    padded = np.pad(pixels, 1, mode="edge")
    ring = [padded[r : r + h, c : c + w] for r, c in RING]
    ring_sum = np.sum(ring, axis=0, dtype=np.int32)
    best = None
    for k in range(8):
        triple = ring[k] + ring[(k + 1) % 8] + ring[(k + 2) % 8]
        best = triple if best is None else np.maximum(best, triple)
    return 8 * best - 3 * ring_sum


def gradient_components(image: Image, kind=EdgeOperatorKind.SOBEL) -> Tuple[np.ndarray, np.ndarray]:
    """Signed (Gx, Gy) for the Sobel or Prewitt stencils, replicate-padded."""
    kind = EdgeOperatorKind(kind)
    if kind is EdgeOperatorKind.KIRSCH:
        raise ValueError("Kirsch is a compass operator and has no gradient components")
    stencil_x, stencil_y = OPERATORS[kind].kernels
    pixels = image.pixels.astype(np.int32)
    gx = ndimage.correlate(pixels, stencil_x, mode="nearest")
    gy = ndimage.correlate(pixels, stencil_y, mode="nearest")
    return gx, gy


def kirsch_enhance(image: Image, scale: float = KIRSCH_SCALE) -> EdgeImage:
    """Kirsch response scaled, rounded half up and clamped to 8 bits."""
    return OPERATORS[EdgeOperatorKind.KIRSCH].enhance(image, scale)


def sobel_enhance(image: Image, scale: float = SOBEL_SCALE) -> EdgeImage:
    """Sobel gradient magnitude as an 8-bit image."""
    return OPERATORS[EdgeOperatorKind.SOBEL].enhance(image, scale)


def prewitt_enhance(image: Image, scale: float = PREWITT_SCALE) -> EdgeImage:
    """Prewitt gradient magnitude as an 8-bit image."""
    return OPERATORS[EdgeOperatorKind.PREWITT].enhance(image, scale)


def enhance(image: Image, kind=EdgeOperatorKind.KIRSCH, scale: Optional[float] = None) -> EdgeImage:
    """
    Edge-enhanced copy of image.

    scale defaults to the operator's fixed factor: 1/15 for Kirsch, 1/4 for
    Sobel and 1/3 for Prewitt.
    """
    return get_operator(kind).enhance(image, scale)
