"""
Raw-image meta-features: intensity standard deviation and histogram entropy.

Features are always taken from raw intensities, never from edge-enhanced images.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from edgeroute.imaging import Image

GRAY_LEVELS = 256


class Feature(str, Enum):
    SIGMA = "sigma"
    ENTROPY = "entropy"


@dataclass(frozen=True)
class FeatureVector:
    sigma: float
    entropy: float

    def get(self, feature) -> float:
        return getattr(self, Feature(feature).value)

    def as_tuple(self):
        return (self.sigma, self.entropy)


def std_dev(image: Image) -> float:
    """Population standard deviation (divisor m*n) of the pixel intensities."""
    return float(np.std(image.pixels, dtype=np.float64))


def entropy(image: Image) -> float:
    """Shannon entropy in bits of the 256-bin intensity histogram."""
    counts = np.bincount(image.pixels.ravel(), minlength=GRAY_LEVELS).astype(np.float64)
    p = counts[counts > 0] / image.pixels.size
    # + 0.0 normalises -0.0 for constant images
    return float(-np.sum(p * np.log2(p))) + 0.0


def extract_features(image: Image) -> FeatureVector:
    return FeatureVector(sigma=std_dev(image), entropy=entropy(image))
