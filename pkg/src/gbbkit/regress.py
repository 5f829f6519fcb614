"""Toy-scale gradient descent on the Gaussian-overlap losses.

Plain clipped gradient descent under a two-stage schedule: the unbounded
Bhattacharyya loss first (long-range pull), the bounded Hellinger loss
after the switch (tight final fit).  No momentum or adaptive steps: the
point is to probe the loss geometry, and the simplest dynamics keep
descent properties testable.  Runs are deterministic: same config, same
trajectory, bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convert import cov_from_angles, gbb_to_angle_cov, gbb_to_ellipse
from .gradients import grad_general
from .metrics import similarity
from .raster import default_cell_size, iou_raster
from .types import AngleCov, GaussBox, require_valid_gbb, validate_gbb

PARAMETRIZATIONS = ("hbb4", "angle5", "constrained5")

# Floor applied to variances after each unconstrained update.
VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class LossSchedule:
    """Two-stage loss configuration.

    Stage 1 minimizes omega2 * L2 for the first switch_fraction of the
    steps; stage 2 minimizes omega1 * L1 for the rest.  The default
    omega2 = 5 * omega1 keeps gradient magnitudes comparable across the
    switch; switch_fraction = 0 gives a pure-L1 run, 1 a pure-L2 run.
    """

    omega1: float = 1.0
    omega2: float = 5.0
    switch_fraction: float = 0.5
    total_steps: int = 400

    def __post_init__(self):
        if not (self.omega1 > 0 and self.omega2 > 0):
            raise ValueError("loss weights must be positive")
        if not 0.0 <= self.switch_fraction <= 1.0:
            raise ValueError(f"switch_fraction must lie in [0, 1], got {self.switch_fraction}")
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be positive, got {self.total_steps}")


@dataclass(frozen=True)
class OptimizerConfig:
    """Step size, per-component gradient clip, and update space."""

    step_size: float = 0.1
    grad_clip: float = 10.0
    parametrization: str = "constrained5"

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if not self.grad_clip > 0:
            raise ValueError(f"grad_clip must be positive, got {self.grad_clip}")
        if self.parametrization not in PARAMETRIZATIONS:
            raise ValueError(
                f"parametrization must be one of {PARAMETRIZATIONS}, got "
                f"{self.parametrization!r}"
            )


@dataclass(frozen=True)
class FitStep:
    """One trajectory record: state plus diagnostics at that state."""

    params: GaussBox
    loss: float
    grad_norm: float
    prob_iou: float
    iou: float


@dataclass(frozen=True)
class FitTrajectory:
    """Per-step records (initial state included); aborted explains truncation."""

    steps: list[FitStep] = field(default_factory=list)
    aborted: str | None = None

    def final(self) -> FitStep:
        return self.steps[-1]


@dataclass(frozen=True)
class GradientProbe:
    """Gradient norms of both losses plus overlap measures for one pair."""

    norm_l2_grad: float
    norm_l1_grad: float
    iou: float
    prob_iou: float
    l1_singular: bool = False


def schedule_loss(step: int, schedule: LossSchedule) -> tuple[str, float]:
    """Loss selector and weight active at a step: ("l2", omega2) before the
    switch point, ("l1", omega1) from it on."""
    if not 0 <= step < schedule.total_steps:
        raise ValueError(
            f"step must lie in [0, {schedule.total_steps}), got {step}"
        )
    if step < schedule.switch_fraction * schedule.total_steps:
        return "l2", schedule.omega2
    return "l1", schedule.omega1


def _ellipse_iou(p: GaussBox, q: GaussBox, cells: int) -> float:
    ep, eq = gbb_to_ellipse(p), gbb_to_ellipse(q)
    try:
        return iou_raster(ep, eq, default_cell_size(ep, eq, cells))
    except ValueError:
        # Shapes below one cell on this grid are far-apart slivers: call it 0.
        return 0.0


class _Parametrization:
    """Maps harness vectors to GaussBoxes and chains gradients back."""

    def __init__(self, kind: str, init: GaussBox):
        self.kind = kind
        if kind == "hbb4":
            if init.c != 0.0:
                raise ValueError("hbb4 parametrization needs a diagonal init (c == 0)")
            self.vec = np.array([init.x0, init.y0, init.a, init.b])
        elif kind == "angle5":
            ac = gbb_to_angle_cov(init)
            self.vec = np.array([init.x0, init.y0, ac.a_prime, ac.b_prime, ac.theta])
        else:
            # b - c^2/a = det/a > 0 for valid inputs, so both logs are defined.
            self.vec = np.array(
                [
                    init.x0,
                    init.y0,
                    math.log(init.a),
                    math.log(init.b - init.c * init.c / init.a),
                    init.c,
                ]
            )

    def gauss_box(self) -> GaussBox:
        v = self.vec
        if self.kind == "hbb4":
            return GaussBox(v[0], v[1], v[2], v[3], 0.0)
        if self.kind == "angle5":
            a, b, c = cov_from_angles(AngleCov(v[2], v[3], v[4]))
            return GaussBox(v[0], v[1], a, b, c)
        alpha, beta, c = v[2], v[3], v[4]
        a = math.exp(alpha)
        return GaussBox(v[0], v[1], a, c * c / a + math.exp(beta), c)

    def chain_gradient(self, grad_abc: np.ndarray) -> np.ndarray:
        """Pull a (x, y, a, b, c) gradient back into this update space."""
        gx, gy, ga, gb, gc = grad_abc
        v = self.vec
        if self.kind == "hbb4":
            return np.array([gx, gy, ga, gb])
        if self.kind == "angle5":
            ap, bp, th = v[2], v[3], v[4]
            cos2 = math.cos(th) ** 2
            sin2 = math.sin(th) ** 2
            s2t = math.sin(2.0 * th)
            c2t = math.cos(2.0 * th)
            return np.array(
                [
                    gx,
                    gy,
                    ga * cos2 + gb * sin2 + 0.5 * gc * s2t,
                    ga * sin2 + gb * cos2 - 0.5 * gc * s2t,
                    (ap - bp) * ((gb - ga) * s2t + gc * c2t),
                ]
            )
        alpha, beta, c = v[2], v[3], v[4]
        ea = math.exp(alpha)
        return np.array(
            [
                gx,
                gy,
                ga * ea - gb * c * c / ea,
                gb * math.exp(beta),
                gb * 2.0 * c / ea + gc,
            ]
        )

    def apply_update(self, delta: np.ndarray) -> None:
        self.vec = self.vec - delta
        if self.kind == "hbb4":
            self.vec[2] = max(self.vec[2], VARIANCE_FLOOR)
            self.vec[3] = max(self.vec[3], VARIANCE_FLOOR)
        elif self.kind == "angle5":
            self.vec[2] = max(self.vec[2], VARIANCE_FLOOR)
            self.vec[3] = max(self.vec[3], VARIANCE_FLOOR)
            # Re-canonicalize the angle each step, swapping axes as needed.
            th = self.vec[4]
            if th > math.pi / 4.0 or th < -math.pi / 4.0:
                th = (th + math.pi / 2.0) % math.pi - math.pi / 2.0
                if th > math.pi / 4.0:
                    th -= math.pi / 2.0
                    self.vec[2], self.vec[3] = self.vec[3], self.vec[2]
                elif th < -math.pi / 4.0:
                    th += math.pi / 2.0
                    self.vec[2], self.vec[3] = self.vec[3], self.vec[2]
                self.vec[4] = th


def _loss_and_grad(current: GaussBox, target: GaussBox, selector: str):
    """Similarity report, unweighted loss, and (x, y, a, b, c) gradient.

    A state outside the positive-definite region (possible when an
    oversized step slams both variances into the floor) reports an infinite
    loss so the caller aborts instead of raising mid-run.
    """
    if not validate_gbb(current)[0]:
        return None, math.inf, np.zeros(5)
    report = similarity(current, target)
    if selector == "l2":
        return report, report.b_d, grad_general(current, target, "l2")
    if report.b_d == 0.0:
        # Exact optimum: the L1 chain factor is singular but the true
        # directional gradient is what an optimizer should see: zero.
        return report, report.h_d, np.zeros(5)
    return report, report.h_d, grad_general(current, target, "l1")


def fit_gbb(
    target: GaussBox,
    init: GaussBox,
    schedule: LossSchedule,
    opt: OptimizerConfig,
    raster_cells: int = 128,
) -> FitTrajectory:
    """Fit a GaussBox to a target by clipped gradient descent.

    Records total_steps + 1 states (initial state first).  Each record
    carries the weighted stage loss and gradient norm at that state, plus
    ProbIoU and rasterized ellipse IoU against the target.  A non-finite
    loss or gradient aborts the run, returning the trajectory so far with
    the abort reason.

    raster_cells controls the (log-only) IoU rasterization resolution.
    """
    require_valid_gbb(target)
    require_valid_gbb(init)
    param = _Parametrization(opt.parametrization, init)

    steps: list[FitStep] = []
    for step in range(schedule.total_steps + 1):
        selector, weight = schedule_loss(min(step, schedule.total_steps - 1), schedule)
        current = param.gauss_box()
        report, loss, grad_abc = _loss_and_grad(current, target, selector)
        grad_vec = weight * param.chain_gradient(grad_abc)
        finite = math.isfinite(loss) and bool(np.all(np.isfinite(grad_vec)))
        if finite:
            record = FitStep(
                params=current,
                loss=weight * loss,
                grad_norm=float(np.linalg.norm(grad_vec)),
                prob_iou=report.prob_iou,
                iou=_ellipse_iou(current, target, raster_cells),
            )
        else:
            record = FitStep(current, math.inf, math.inf, 0.0, 0.0)
        steps.append(record)
        if not finite:
            return FitTrajectory(
                steps,
                aborted=f"non-finite loss or gradient at step {step}; reduce step_size",
            )
        if step == schedule.total_steps:
            break
        clipped = np.clip(grad_vec, -opt.grad_clip, opt.grad_clip)
        param.apply_update(opt.step_size * clipped)
    return FitTrajectory(steps)


def gradient_probe(p: GaussBox, q: GaussBox, raster_cells: int = 1000) -> GradientProbe:
    """Gradient norms of both (unweighted) losses plus IoU and ProbIoU.

    Far-apart pairs show a large L2 norm but an underflowed L1 norm;
    well-overlapping pairs show the opposite ordering.  At p == q the L1
    gradient is reported as zero with the singular flag set.
    """
    require_valid_gbb(p)
    require_valid_gbb(q)
    report = similarity(p, q)
    norm_l2 = float(np.linalg.norm(grad_general(p, q, "l2")))
    if report.b_d == 0.0:
        return GradientProbe(norm_l2, 0.0, _ellipse_iou(p, q, raster_cells), report.prob_iou, True)
    norm_l1 = float(np.linalg.norm(grad_general(p, q, "l1")))
    return GradientProbe(norm_l2, norm_l1, _ellipse_iou(p, q, raster_cells), report.prob_iou)


__all__ = [
    "PARAMETRIZATIONS",
    "VARIANCE_FLOOR",
    "LossSchedule",
    "OptimizerConfig",
    "FitStep",
    "FitTrajectory",
    "GradientProbe",
    "schedule_loss",
    "fit_gbb",
    "gradient_probe",
]
