"""Conversions between box, polygon, Gaussian, and ellipse representations.

A crisp region maps to the Gaussian whose density matches the uniform
density over the region (same mean and covariance); a Gaussian maps back to
a crisp region through a Mahalanobis level-set ellipse.  A W x H rectangle
has uniform-density variances W**2/12 and H**2/12, which fixes all the
box conversions.
"""

from __future__ import annotations

import math

from .polygons import min_area_rect, polygon_moments
from .types import (
    AngleCov,
    ConstrainedCovParams,
    Ellipse,
    GaussBox,
    Hbb,
    Obb,
    PolygonMask,
    require_valid_gbb,
)

# Level-set radius making the ellipse area equal W*H for box-derived
# Gaussians; covers about 85.2% of the probability mass.
DEFAULT_LEVEL_SET_RADIUS = math.sqrt(12.0 / math.pi)

# Clamp for the exponential covariance parametrization: covers ~26 orders
# of magnitude of variance while staying far from float64 overflow.
EXP_CLAMP = 30.0

_ISOTROPIC_TOL = 1e-12


def hbb_to_gbb(box: Hbb) -> GaussBox:
    """Axis-aligned box to its moment-matched Gaussian (diagonal covariance)."""
    return GaussBox(box.x0, box.y0, box.w * box.w / 12.0, box.h * box.h / 12.0, 0.0)


def cov_from_angles(ac: AngleCov) -> tuple[float, float, float]:
    """Covariance entries (a, b, c) of R_theta @ diag(a', b') @ R_theta.T."""
    cos_t = math.cos(ac.theta)
    sin_t = math.sin(ac.theta)
    a = ac.a_prime * cos_t * cos_t + ac.b_prime * sin_t * sin_t
    b = ac.a_prime * sin_t * sin_t + ac.b_prime * cos_t * cos_t
    c = 0.5 * (ac.a_prime - ac.b_prime) * math.sin(2.0 * ac.theta)
    return a, b, c


def obb_to_gbb(box: Obb) -> GaussBox:
    """Oriented box to its moment-matched Gaussian (rotated covariance)."""
    ac = AngleCov(box.w * box.w / 12.0, box.h * box.h / 12.0, box.theta)
    a, b, c = cov_from_angles(ac)
    return GaussBox(box.x0, box.y0, a, b, c)


def gbb_to_angle_cov(g: GaussBox) -> AngleCov:
    """Unique (a', b', theta) factorization with theta in [-pi/4, pi/4].

    Isotropic covariances (a == b, c == 0 within 1e-12) return theta = 0 by
    convention; the orientation is genuinely undefined there.
    """
    require_valid_gbb(g)
    if abs(g.a - g.b) < _ISOTROPIC_TOL and abs(g.c) < _ISOTROPIC_TOL:
        mean = 0.5 * (g.a + g.b)
        return AngleCov(mean, mean, 0.0)

    theta = 0.5 * math.atan2(2.0 * g.c, g.a - g.b)
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    sin2 = math.sin(2.0 * theta)
    a_prime = g.a * cos_t * cos_t + g.b * sin_t * sin_t + g.c * sin2
    b_prime = g.a * sin_t * sin_t + g.b * cos_t * cos_t - g.c * sin2

    if theta > math.pi / 4.0:
        theta -= math.pi / 2.0
        a_prime, b_prime = b_prime, a_prime
    elif theta < -math.pi / 4.0:
        theta += math.pi / 2.0
        a_prime, b_prime = b_prime, a_prime
    return AngleCov(a_prime, b_prime, theta)


def gbb_to_obb(g: GaussBox) -> Obb:
    """Gaussian back to the oriented box whose moments it matches."""
    ac = gbb_to_angle_cov(g)
    return Obb(g.x0, g.y0, math.sqrt(12.0 * ac.a_prime), math.sqrt(12.0 * ac.b_prime), ac.theta)


def mask_to_gbb(mask: PolygonMask) -> GaussBox:
    """Polygon to the Gaussian matching its exact interior moments."""
    _, mu, cov = polygon_moments(mask.vertices)
    return require_valid_gbb(
        GaussBox(float(mu[0]), float(mu[1]), float(cov[0, 0]), float(cov[1, 1]), float(cov[0, 1]))
    )


def mask_to_hbb(mask: PolygonMask) -> Hbb:
    """Axis-aligned bounding rectangle of the polygon vertices."""
    xmin, ymin = mask.vertices.min(axis=0)
    xmax, ymax = mask.vertices.max(axis=0)
    return Hbb(0.5 * (xmin + xmax), 0.5 * (ymin + ymax), xmax - xmin, ymax - ymin)


def mask_to_obb(mask: PolygonMask) -> Obb:
    """Minimum-area enclosing rotated rectangle of the polygon."""
    center, w, h, theta = min_area_rect(mask.vertices)
    return Obb(float(center[0]), float(center[1]), w, h, theta)


def gbb_to_ellipse(g: GaussBox, r: float = DEFAULT_LEVEL_SET_RADIUS) -> Ellipse:
    """Mahalanobis level set d2(x) = r**2 of the Gaussian, as an ellipse.

    Semi-axes are r times the square roots of the covariance eigenvalues.
    With the default r the ellipse area equals w*h of the matching oriented
    box exactly.
    """
    require_valid_gbb(g)
    if not r > 0:
        raise ValueError(f"level-set radius must be positive, got {r}")
    ac = gbb_to_angle_cov(g)
    major = r * math.sqrt(ac.a_prime)
    minor = r * math.sqrt(ac.b_prime)
    theta = ac.theta
    if minor > major:
        major, minor = minor, major
        theta += math.pi / 2.0
    return Ellipse(g.x0, g.y0, major, minor, theta)


def r_from_tau(tau: float) -> float:
    """Level-set radius covering probability mass tau of the Gaussian.

    Inverts the chi-squared (2 dof) CDF 1 - exp(-r**2 / 2) = tau.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"coverage must lie strictly in (0, 1), got {tau}")
    return math.sqrt(-2.0 * math.log1p(-tau))


def tau_from_r(r: float) -> float:
    """Probability mass inside the level set of radius r (inverse of r_from_tau)."""
    if not r > 0:
        raise ValueError(f"level-set radius must be positive, got {r}")
    return -math.expm1(-0.5 * r * r)


def constrained_to_cov(p: ConstrainedCovParams) -> tuple[float, float, float]:
    """Map unconstrained (alpha, beta, c) to covariance entries (a, b, c).

    a = exp(alpha) and b = exp(-alpha) * c**2 + exp(beta) give
    a*b - c**2 = exp(alpha + beta) > 0 for every input, so the output is
    always positive-definite.  alpha and beta are clamped to +/-EXP_CLAMP
    before exponentiation.
    """
    alpha = min(max(p.alpha, -EXP_CLAMP), EXP_CLAMP)
    beta = min(max(p.beta, -EXP_CLAMP), EXP_CLAMP)
    a = math.exp(alpha)
    b = math.exp(-alpha) * p.c * p.c + math.exp(beta)
    return a, b, p.c


__all__ = [
    "DEFAULT_LEVEL_SET_RADIUS",
    "EXP_CLAMP",
    "hbb_to_gbb",
    "obb_to_gbb",
    "cov_from_angles",
    "gbb_to_angle_cov",
    "gbb_to_obb",
    "mask_to_gbb",
    "mask_to_hbb",
    "mask_to_obb",
    "gbb_to_ellipse",
    "r_from_tau",
    "tau_from_r",
    "constrained_to_cov",
]
