"""
Segmentation quality and loss.

Performance is the mean of DSC and NSD on a 0-100 scale; the loss is the
unweighted sum of binary cross-entropy, dice and IoU losses.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import ndimage

from edgeroute.errors import DimensionError
from edgeroute.imaging import Mask, check_same_shape

DEFAULT_TAU = 2.0
LOSS_SMOOTH = 1.0
PROB_EPS = 1e-7

FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class Score:
    dsc: float
    nsd: float
    perf: float

    @classmethod
    def of(cls, dsc_value: float, nsd_value: float) -> "Score":
        return cls(dsc_value, nsd_value, 100.0 * (dsc_value + nsd_value) / 2.0)


@dataclass(frozen=True)
class LossValue:
    bce: float
    dice: float
    iou: float
    total: float

    @classmethod
    def of(cls, bce: float, dice: float, iou: float) -> "LossValue":
        return cls(bce, dice, iou, bce + dice + iou)


def dsc(pred: Mask, gt: Mask) -> float:
    """Dice coefficient; two empty masks agree perfectly (1.0)."""
    check_same_shape(pred, gt)
    total = pred.area + gt.area
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(pred.bits, gt.bits).sum()) / total


def boundary(mask: Mask) -> np.ndarray:
    """Foreground pixels with at least one background 4-neighbour; outside the grid counts as background."""
    eroded = ndimage.binary_erosion(mask.bits, structure=FOUR_CONNECTED, border_value=0)
    return mask.bits & ~eroded


def nsd(pred: Mask, gt: Mask, tau: float = DEFAULT_TAU) -> float:
    """
    Normalized surface distance: share of both boundaries lying within tau
    (Euclidean, pixels) of the other boundary.
    """
    check_same_shape(pred, gt)
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    pred_empty, gt_empty = pred.area == 0, gt.area == 0
    if pred_empty and gt_empty:
        return 1.0
    if pred_empty or gt_empty:
        return 0.0
    pred_edge, gt_edge = boundary(pred), boundary(gt)
    to_gt = ndimage.distance_transform_edt(~gt_edge)
    to_pred = ndimage.distance_transform_edt(~pred_edge)
    close = int((to_gt[pred_edge] <= tau).sum()) + int((to_pred[gt_edge] <= tau).sum())
    return close / int(pred_edge.sum() + gt_edge.sum())


def perf(pred: Mask, gt: Mask, tau: float = DEFAULT_TAU) -> Score:
    return Score.of(dsc(pred, gt), nsd(pred, gt, tau))


def loss(pred_prob: Union[np.ndarray, Mask], gt: Mask) -> LossValue:
    """BCE + dice + IoU loss of a probability map against a binary mask."""
    prob = pred_prob.bits if isinstance(pred_prob, Mask) else np.asarray(pred_prob)
    if prob.shape != gt.shape:
        raise DimensionError(f"shape mismatch: {prob.shape} vs {gt.shape}")
    p = prob.astype(np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    g = gt.bits.astype(np.float64)

    clamped = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    bce = float(-np.mean(g * np.log(clamped) + (1.0 - g) * np.log(1.0 - clamped)))

    inter, p_sum, g_sum = float((p * g).sum()), float(p.sum()), float(g.sum())
    dice = 1.0 - (2.0 * inter + LOSS_SMOOTH) / (p_sum + g_sum + LOSS_SMOOTH)
    iou = 1.0 - (inter + LOSS_SMOOTH) / (p_sum + g_sum - inter + LOSS_SMOOTH)
    return LossValue.of(bce, max(dice, 0.0), max(iou, 0.0))
