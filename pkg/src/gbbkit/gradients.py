"""Analytic gradients of the Gaussian-overlap losses.

Two surfaces: a 4-parameter form for axis-aligned boxes (center, width,
height), chained through the box-to-variance map, and a general
5-parameter form in raw Gaussian coordinates (x, y, a, b, c).  Both are
validated against central finite differences in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import _bd_terms
from .types import GaussBox, Hbb, require_valid_gbb


@dataclass(frozen=True)
class HbbGradient:
    """Loss gradient w.r.t. axis-aligned box parameters (x, y, w, h).

    singular marks the removable singularity of the L1 chain factor at
    p == q, where a zero gradient is returned instead of raising.
    """

    d_x: float
    d_y: float
    d_w: float
    d_h: float
    singular: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.d_x, self.d_y, self.d_w, self.d_h])

    def norm(self) -> float:
        return float(np.hypot(np.hypot(self.d_x, self.d_y), np.hypot(self.d_w, self.d_h)))


def grad_l2_hbb(p: Hbb, q: Hbb) -> HbbGradient:
    """Closed-form gradient of the Bhattacharyya-distance loss for boxes.

    Gradient of the diagonal-covariance loss with respect to p's
    (x, y, w, h); exactly zero iff p == q.
    """
    dx = p.x0 - q.x0
    dy = p.y0 - q.y0
    sw = p.w * p.w + q.w * q.w
    sh = p.h * p.h + q.h * q.h
    return HbbGradient(
        d_x=6.0 * dx / sw,
        d_y=6.0 * dy / sh,
        d_w=(p.w * p.w - q.w * q.w) / (2.0 * p.w * sw) - 6.0 * p.w * dx * dx / (sw * sw),
        d_h=(p.h * p.h - q.h * q.h) / (2.0 * p.h * sh) - 6.0 * p.h * dy * dy / (sh * sh),
    )


def _l1_chain_factor(b_d: float) -> float:
    """d(sqrt(1 - exp(-t)))/dt at t = b_d, via expm1 for tiny t."""
    return math.exp(-b_d) / (2.0 * math.sqrt(-math.expm1(-b_d)))


def _bd_hbb(p: Hbb, q: Hbb) -> float:
    b1, b2 = _bd_terms(
        p.x0, p.y0, p.w * p.w / 12.0, p.h * p.h / 12.0, 0.0,
        q.x0, q.y0, q.w * q.w / 12.0, q.h * q.h / 12.0, 0.0,
    )
    return max(b1 + b2, 0.0)


def grad_l1_hbb(p: Hbb, q: Hbb) -> HbbGradient:
    """Gradient of the Hellinger-distance loss for axis-aligned boxes.

    Chain rule over grad_l2_hbb with factor exp(-B_D)/(2*sqrt(1-exp(-B_D))),
    evaluated at the full Bhattacharyya distance with its constant term: the
    factor is value-sensitive even though the L2 gradient is not.  The
    factor underflows to zero for far-apart boxes and diverges at p == q,
    where a zero gradient with the singular flag is returned.
    """
    b_d = _bd_hbb(p, q)
    if b_d == 0.0:
        return HbbGradient(0.0, 0.0, 0.0, 0.0, singular=True)
    factor = _l1_chain_factor(b_d)
    g = grad_l2_hbb(p, q)
    return HbbGradient(factor * g.d_x, factor * g.d_y, factor * g.d_w, factor * g.d_h)


def grad_general(p: GaussBox, q: GaussBox, which: str = "l2") -> np.ndarray:
    """Analytic gradient of the selected loss w.r.t. (x1, y1, a1, b1, c1).

    which selects "l2" (Bhattacharyya distance) or "l1" (Hellinger
    distance).  The L1 selector rejects p == q, where its chain factor is
    singular.

    Returns:
        (5,) array of partial derivatives with respect to p.
    """
    require_valid_gbb(p)
    require_valid_gbb(q)
    if which not in ("l1", "l2"):
        raise ValueError(f"loss selector must be 'l1' or 'l2', got {which!r}")

    dx = p.x0 - q.x0
    dy = p.y0 - q.y0
    asum = p.a + q.a
    bsum = p.b + q.b
    csum = p.c + q.c
    det_sum = asum * bsum - csum * csum
    num = asum * dy * dy + bsum * dx * dx - 2.0 * csum * dx * dy
    det1 = p.a * p.b - p.c * p.c

    g_x = (bsum * dx - csum * dy) / (2.0 * det_sum)
    g_y = (asum * dy - csum * dx) / (2.0 * det_sum)
    g_a = (
        dy * dy / (4.0 * det_sum)
        - num * bsum / (4.0 * det_sum * det_sum)
        + bsum / (2.0 * det_sum)
        - p.b / (4.0 * det1)
    )
    g_b = (
        dx * dx / (4.0 * det_sum)
        - num * asum / (4.0 * det_sum * det_sum)
        + asum / (2.0 * det_sum)
        - p.a / (4.0 * det1)
    )
    g_c = (
        -dx * dy / (2.0 * det_sum)
        + num * csum / (2.0 * det_sum * det_sum)
        - csum / det_sum
        + p.c / (2.0 * det1)
    )
    grad = np.array([g_x, g_y, g_a, g_b, g_c])

    if which == "l1":
        b1, b2 = _bd_terms(p.x0, p.y0, p.a, p.b, p.c, q.x0, q.y0, q.a, q.b, q.c)
        b_d = max(b1 + b2, 0.0)
        if b_d == 0.0:
            raise ValueError("L1 gradient is singular at p = q")
        grad *= _l1_chain_factor(b_d)
    return grad


__all__ = ["HbbGradient", "grad_l2_hbb", "grad_l1_hbb", "grad_general"]
