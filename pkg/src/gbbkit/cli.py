"""gbbkit command line: convert, score, scatter, fidelity, regress.

JSON in, CSV/JSON out.  Shape JSON forms:

    {"type": "hbb", "x": .., "y": .., "w": .., "h": ..}
    {"type": "obb", "x": .., "y": .., "w": .., "h": .., "theta": ..}
    {"type": "gbb", "x": .., "y": .., "a": .., "b": .., "c": ..}
    {"type": "polygon", "vertices": [[x, y], ...]}
    {"type": "ellipse", "x": .., "y": .., "semi_major": .., "semi_minor": .., "theta": ..}

CSV output uses a header row, '.' decimals, and '\\n' line ends; identical
invocations (same seed) produce byte-identical files.  Exit codes: 0
success, 1 runtime error (I/O, empty results), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import batch
from .annotations import SYNTHETIC_PRESETS, generate_synthetic, ingest_annotations
from .convert import (
    DEFAULT_LEVEL_SET_RADIUS,
    cov_from_angles,
    gbb_to_ellipse,
    gbb_to_obb,
    hbb_to_gbb,
    mask_to_gbb,
    mask_to_hbb,
    mask_to_obb,
    obb_to_gbb,
)
from .metrics import similarity
from .raster import default_cell_size, hbb_corners, iou_between, iou_raster, obb_corners
from .regress import FitTrajectory, LossSchedule, OptimizerConfig, fit_gbb
from .types import AngleCov, Ellipse, GaussBox, Hbb, Obb, PolygonMask, require_valid_gbb

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

# Cells along the larger extent for fidelity-study rasterization; coarser
# than the library default because the study medians move in the second
# decimal at most.
FIDELITY_CELLS = 256

_SCATTER_DIM_EPS = 1e-6


class UsageError(ValueError):
    """Bad user input: maps to exit code 2."""


def _num(obj, key) -> float:
    try:
        v = float(obj[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"shape field {key!r} missing or not a number") from exc
    if not math.isfinite(v):
        raise UsageError(f"shape field {key!r} must be finite, got {v}")
    return v


def parse_shape(obj):
    """Shape JSON object to a typed shape; raises UsageError on bad input."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise UsageError("shape must be a JSON object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "hbb":
            return Hbb(_num(obj, "x"), _num(obj, "y"), _num(obj, "w"), _num(obj, "h"))
        if kind == "obb":
            return Obb(
                _num(obj, "x"), _num(obj, "y"), _num(obj, "w"), _num(obj, "h"),
                _num(obj, "theta"),
            )
        if kind == "gbb":
            return require_valid_gbb(
                GaussBox(_num(obj, "x"), _num(obj, "y"), _num(obj, "a"), _num(obj, "b"),
                         _num(obj, "c"))
            )
        if kind == "polygon":
            verts = obj.get("vertices")
            if not isinstance(verts, list):
                raise UsageError("polygon needs a 'vertices' list of [x, y] pairs")
            return PolygonMask(np.asarray(verts, dtype=float))
        if kind == "ellipse":
            return Ellipse(
                _num(obj, "x"), _num(obj, "y"), _num(obj, "semi_major"),
                _num(obj, "semi_minor"), _num(obj, "theta"),
            )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown shape type {kind!r}")


def shape_to_json(shape) -> dict:
    if isinstance(shape, Hbb):
        return {"type": "hbb", "x": shape.x0, "y": shape.y0, "w": shape.w, "h": shape.h}
    if isinstance(shape, Obb):
        return {
            "type": "obb", "x": shape.x0, "y": shape.y0, "w": shape.w, "h": shape.h,
            "theta": shape.theta,
        }
    if isinstance(shape, GaussBox):
        return {
            "type": "gbb", "x": shape.x0, "y": shape.y0, "a": shape.a, "b": shape.b,
            "c": shape.c,
        }
    if isinstance(shape, Ellipse):
        return {
            "type": "ellipse", "x": shape.x0, "y": shape.y0,
            "semi_major": shape.semi_major, "semi_minor": shape.semi_minor,
            "theta": shape.theta,
        }
    if isinstance(shape, PolygonMask):
        return {"type": "polygon", "vertices": shape.vertices.tolist()}
    raise TypeError(f"cannot serialize {type(shape).__name__}")


def shape_to_gbb(shape) -> GaussBox:
    """Moment-matched Gaussian of any supported shape."""
    if isinstance(shape, GaussBox):
        return shape
    if isinstance(shape, Hbb):
        return hbb_to_gbb(shape)
    if isinstance(shape, Obb):
        return obb_to_gbb(shape)
    if isinstance(shape, PolygonMask):
        return mask_to_gbb(shape)
    if isinstance(shape, Ellipse):
        r2 = DEFAULT_LEVEL_SET_RADIUS * DEFAULT_LEVEL_SET_RADIUS
        a, b, c = cov_from_angles(
            AngleCov(shape.semi_major**2 / r2, shape.semi_minor**2 / r2, shape.theta)
        )
        return GaussBox(shape.x0, shape.y0, a, b, c)
    raise UsageError(f"cannot interpret {type(shape).__name__} as a Gaussian")


def to_crisp(shape):
    """Crisp region used for IoU: Gaussians become default-radius ellipses."""
    return gbb_to_ellipse(shape) if isinstance(shape, GaussBox) else shape


def convert_shape(shape, target: str):
    """Apply the conversion from a parsed shape to the named representation."""
    if target == "gbb":
        return shape_to_gbb(shape)
    if target == "ellipse":
        return gbb_to_ellipse(shape_to_gbb(shape))
    if target == "obb":
        if isinstance(shape, Obb):
            return shape
        if isinstance(shape, Hbb):
            return Obb(shape.x0, shape.y0, shape.w, shape.h, 0.0)
        if isinstance(shape, PolygonMask):
            return mask_to_obb(shape)
        return gbb_to_obb(shape_to_gbb(shape))
    if target == "hbb":
        if isinstance(shape, Hbb):
            return shape
        if isinstance(shape, PolygonMask):
            return mask_to_hbb(shape)
        g = shape_to_gbb(shape)
        if g.c != 0.0:
            raise UsageError("only diagonal Gaussians convert to hbb; use obb instead")
        return Hbb(g.x0, g.y0, math.sqrt(12.0 * g.a), math.sqrt(12.0 * g.b))
    if target == "polygon":
        if isinstance(shape, PolygonMask):
            return shape
        if isinstance(shape, Hbb):
            return PolygonMask(hbb_corners(shape))
        if isinstance(shape, Obb):
            return PolygonMask(obb_corners(shape))
        raise UsageError(
            "polygon output needs a box or polygon input; fuzzy shapes convert to ellipse"
        )
    raise UsageError(f"unknown target representation {target!r}")


def _fmt(v) -> str:
    return repr(float(v))


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_csv(path: str | None, header: list[str], rows) -> None:
    out, close = _open_out(path)
    try:
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")
    finally:
        if close:
            out.close()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_convert(args) -> int:
    text = sys.stdin.read() if args.shape == "-" else args.shape
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"shape is not valid JSON: {exc}") from exc
    result = convert_shape(parse_shape(obj), args.target)
    out, close = _open_out(args.out)
    try:
        json.dump(shape_to_json(result), out)
        out.write("\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def _parse_pair(line: str):
    obj = json.loads(line)
    if isinstance(obj, list) and len(obj) == 2:
        return parse_shape(obj[0]), parse_shape(obj[1])
    if isinstance(obj, dict) and "a" in obj and "b" in obj:
        return parse_shape(obj["a"]), parse_shape(obj["b"])
    raise UsageError("each line must be a [shape, shape] array or {'a':…, 'b':…}")


def cmd_score(args) -> int:
    try:
        with open(args.pairs, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    rows = []
    skipped = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            shape_a, shape_b = _parse_pair(line)
            report = similarity(shape_to_gbb(shape_a), shape_to_gbb(shape_b))
            iou = iou_between(to_crisp(shape_a), to_crisp(shape_b), args.cell_size)
        except (UsageError, ValueError, json.JSONDecodeError) as exc:
            print(f"line {lineno}: skipped ({exc})", file=sys.stderr)
            skipped += 1
            continue
        rows.append(
            [_fmt(report.b_d), _fmt(report.b_c), _fmt(report.h_d),
             _fmt(report.prob_iou), _fmt(iou)]
        )
    _write_csv(args.out, ["b_d", "b_c", "h_d", "prob_iou", "iou"], rows)
    print(f"scored {len(rows)} pairs, skipped {skipped}", file=sys.stderr)
    return EXIT_OK


def _sample_boxes(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random boxes: centers uniform on [0, 1], dimensions on (eps, 1]."""
    u = rng.random((n, 4))
    u[:, 2:] = 1.0 - (1.0 - _SCATTER_DIM_EPS) * u[:, 2:]
    return u


def cmd_scatter(args) -> int:
    rng = np.random.default_rng(args.seed)
    boxes_a = _sample_boxes(rng, args.n)
    boxes_b = _sample_boxes(rng, args.n)
    iou = batch.iou_hbb_pairs(boxes_a, boxes_b)
    if args.mode == "gbb":
        prob_iou = batch.prob_iou_pairs(batch.gbb_from_hbb(boxes_a), batch.gbb_from_hbb(boxes_b))
    else:
        prob_iou = batch.mask_prob_iou_pairs(batch.rect_mask_bc_pairs(boxes_a, boxes_b))
    rows = ([_fmt(i), _fmt(p), args.mode] for i, p in zip(iou, prob_iou))
    _write_csv(args.out, ["iou", "prob_iou", "mode"], rows)
    return EXIT_OK


@dataclass
class _FidelityAccumulator:
    hbb: list
    obb: list
    ellipse: list


def cmd_fidelity(args) -> int:
    if args.annotations is not None:
        try:
            result = ingest_annotations(args.annotations)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        records = result.records
        if result.skipped_multipart or result.skipped_malformed:
            print(
                f"skipped {result.skipped_multipart} multi-part and "
                f"{result.skipped_malformed} malformed annotations",
                file=sys.stderr,
            )
    else:
        records = generate_synthetic(args.synthetic, args.n, args.seed)
    if not records:
        print("error: no usable annotations", file=sys.stderr)
        return EXIT_RUNTIME

    per_category: dict[str, _FidelityAccumulator] = {}
    for rec in records:
        poly = rec.polygon
        reps = {
            "hbb": mask_to_hbb(poly),
            "obb": mask_to_obb(poly),
            "ellipse": gbb_to_ellipse(mask_to_gbb(poly)),
        }
        acc = per_category.setdefault(rec.category, _FidelityAccumulator([], [], []))
        for name, rep in reps.items():
            cell = args.cell_size or default_cell_size(rep, poly, FIDELITY_CELLS)
            getattr(acc, name).append(iou_raster(rep, poly, cell))

    def median_row(name: str, acc: _FidelityAccumulator) -> list[str]:
        return [
            name,
            _fmt(float(np.median(acc.hbb))),
            _fmt(float(np.median(acc.obb))),
            _fmt(float(np.median(acc.ellipse))),
            str(len(acc.hbb)),
        ]

    rows = [median_row(name, per_category[name]) for name in sorted(per_category)]
    overall = _FidelityAccumulator(
        [v for acc in per_category.values() for v in acc.hbb],
        [v for acc in per_category.values() for v in acc.obb],
        [v for acc in per_category.values() for v in acc.ellipse],
    )
    rows.append(median_row("overall", overall))
    _write_csv(
        args.out,
        ["category", "median_iou_hbb", "median_iou_obb", "median_iou_ellipse", "count"],
        rows,
    )
    return EXIT_OK


def _config_section(cfg: dict, key: str, cls, allowed: tuple[str, ...]):
    section = cfg.get(key, {})
    if not isinstance(section, dict):
        raise UsageError(f"config field {key!r} must be an object")
    unknown = set(section) - set(allowed)
    if unknown:
        raise UsageError(f"config field {key!r} has unknown keys: {sorted(unknown)}")
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config field {key!r}: {exc}") from exc


def _regress_summary(traj: FitTrajectory) -> dict:
    prob = [s.prob_iou for s in traj.steps]
    steps_to_09 = next((i for i, v in enumerate(prob) if v >= 0.9), None)
    stalled = None
    if all(s.grad_norm < 1e-8 for s in traj.steps) and traj.steps[-1].prob_iou < 0.9:
        stalled = "stalled: gradient underflow"
    return {
        "final_prob_iou": traj.steps[-1].prob_iou,
        "steps_to_0_9": steps_to_09,
        "stalled": stalled,
        "aborted": traj.aborted,
    }


def cmd_regress(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict) or "target" not in cfg or "init" not in cfg:
        raise UsageError("config must be an object with 'target' and 'init' shapes")

    target = shape_to_gbb(parse_shape(cfg["target"]))
    init = shape_to_gbb(parse_shape(cfg["init"]))
    schedule = _config_section(
        cfg, "schedule", LossSchedule, ("omega1", "omega2", "switch_fraction", "total_steps")
    )
    opt = _config_section(
        cfg, "optimizer", OptimizerConfig, ("step_size", "grad_clip", "parametrization")
    )

    traj = fit_gbb(target, init, schedule, opt)
    rows = (
        [str(i), _fmt(s.loss), _fmt(s.grad_norm), _fmt(s.prob_iou), _fmt(s.iou)]
        for i, s in enumerate(traj.steps)
    )
    _write_csv(args.out, ["step", "loss", "grad_norm", "prob_iou", "iou"], rows)
    json.dump(_regress_summary(traj), sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbbkit",
        description="Gaussian bounding boxes: conversions, overlap scores, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert one shape between representations")
    p.add_argument("shape", help="shape JSON (or '-' to read stdin)")
    p.add_argument("target", choices=["hbb", "obb", "gbb", "ellipse", "polygon"])
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("score", help="score JSON-lines shape pairs to CSV")
    p.add_argument("pairs", help="JSON-lines file, one shape pair per line")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--cell-size", type=float, help="raster cell size for IoU fallback")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("scatter", help="random-box IoU vs ProbIoU scatter CSV")
    p.add_argument("--n", type=int, default=100000, help="number of box pairs")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--mode", choices=["gbb", "uniform_mask"], default="gbb")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("fidelity", help="representation-fidelity medians per category")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--annotations", help="COCO-style annotation JSON path")
    src.add_argument(
        "--synthetic",
        choices=list(SYNTHETIC_PRESETS),
        default="default",
        help="synthetic corpus preset (used when --annotations is absent)",
    )
    p.add_argument("--n", type=int, default=1000, help="synthetic shapes per category")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--cell-size", type=float, help="fixed raster cell size")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("regress", help="run a two-stage fit from a JSON config")
    p.add_argument("--config", required=True, help="fit configuration JSON path")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(func=cmd_regress)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
