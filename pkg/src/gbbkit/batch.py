"""Vectorized kernels for batch experiments.

Array counterparts of the scalar metric functions, used by the Monte Carlo
drivers where per-pair Python objects would dominate the runtime.  Gaussian
parameter batches are (n, 5) arrays of (x, y, a, b, c); box batches are
(n, 4) arrays of (x, y, w, h).  Consistency with the scalar path is pinned
by tests.
"""

from __future__ import annotations

import numpy as np


def gbb_from_hbb(boxes: np.ndarray) -> np.ndarray:
    """(n, 4) center/size boxes to (n, 5) diagonal Gaussian parameters."""
    boxes = np.asarray(boxes, dtype=float)
    out = np.zeros((len(boxes), 5))
    out[:, 0] = boxes[:, 0]
    out[:, 1] = boxes[:, 1]
    out[:, 2] = boxes[:, 2] ** 2 / 12.0
    out[:, 3] = boxes[:, 3] ** 2 / 12.0
    return out


def bd_pairs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise Bhattacharyya distance between (n, 5) Gaussian batches."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dx = p[:, 0] - q[:, 0]
    dy = p[:, 1] - q[:, 1]
    asum = p[:, 2] + q[:, 2]
    bsum = p[:, 3] + q[:, 3]
    csum = p[:, 4] + q[:, 4]
    denom = asum * bsum - csum**2
    b1 = 0.25 * (asum * dy**2 + bsum * dx**2 - 2.0 * csum * dx * dy) / denom
    det1 = p[:, 2] * p[:, 3] - p[:, 4] ** 2
    det2 = q[:, 2] * q[:, 3] - q[:, 4] ** 2
    b2 = 0.5 * np.log(denom / (4.0 * np.sqrt(det1 * det2)))
    return np.maximum(b1 + b2, 0.0)


def hd_pairs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise Hellinger distance between (n, 5) Gaussian batches."""
    return np.sqrt(np.maximum(-np.expm1(-bd_pairs(p, q)), 0.0))


def prob_iou_pairs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise ProbIoU (1 - Hellinger distance) between Gaussian batches."""
    return 1.0 - hd_pairs(p, q)


def _overlap_1d(c1, s1, c2, s2):
    return np.maximum(
        0.0, np.minimum(c1 + s1 / 2.0, c2 + s2 / 2.0) - np.maximum(c1 - s1 / 2.0, c2 - s2 / 2.0)
    )


def iou_hbb_pairs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise exact IoU between (n, 4) axis-aligned box batches."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    inter = _overlap_1d(a[:, 0], a[:, 2], b[:, 0], b[:, 2]) * _overlap_1d(
        a[:, 1], a[:, 3], b[:, 1], b[:, 3]
    )
    union = a[:, 2] * a[:, 3] + b[:, 2] * b[:, 3] - inter
    return inter / union


def rect_mask_bc_pairs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise uniform-mask Bhattacharyya coefficient for box batches.

    Intersection area over the geometric mean of the areas; always at least
    the IoU of the same pair.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    inter = _overlap_1d(a[:, 0], a[:, 2], b[:, 0], b[:, 2]) * _overlap_1d(
        a[:, 1], a[:, 3], b[:, 1], b[:, 3]
    )
    return np.minimum(inter / np.sqrt(a[:, 2] * a[:, 3] * b[:, 2] * b[:, 3]), 1.0)


def mask_prob_iou_pairs(bc: np.ndarray) -> np.ndarray:
    """ProbIoU from uniform-mask Bhattacharyya coefficients."""
    return 1.0 - np.sqrt(np.maximum(1.0 - np.asarray(bc, dtype=float), 0.0))


__all__ = [
    "gbb_from_hbb",
    "bd_pairs",
    "hd_pairs",
    "prob_iou_pairs",
    "iou_hbb_pairs",
    "rect_mask_bc_pairs",
    "mask_prob_iou_pairs",
]
