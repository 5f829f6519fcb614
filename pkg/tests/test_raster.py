import math

import numpy as np
import pytest

from gbbkit import Ellipse, Hbb, Obb, PolygonMask
from gbbkit.polygons import points_in_polygon
from gbbkit.raster import (
    RasterGrid,
    default_cell_size,
    hbb_corners,
    iou_between,
    iou_convex,
    iou_hbb,
    iou_raster,
    mask_bc_raster,
    obb_corners,
    rasterize,
    shared_grid,
)

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def rotated_square(phi, center=(0.5, 0.5)):
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])
    ctr = np.asarray(center)
    return (UNIT_SQUARE - ctr) @ rot.T + ctr


class TestRasterGrid:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            RasterGrid((0, 0), 1.0, 3, 2, np.zeros((3, 3), dtype=bool))
        with pytest.raises(ValueError):
            RasterGrid((0, 0), 0.0, 3, 2, np.zeros((2, 3), dtype=bool))

    def test_centers(self):
        g = RasterGrid.empty((1.0, 2.0), 0.5, 4, 2)
        np.testing.assert_allclose(g.x_centers(), [1.25, 1.75, 2.25, 2.75])
        np.testing.assert_allclose(g.y_centers(), [2.25, 2.75])


class TestRasterize:
    def test_half_plane_split_exact_columns(self):
        # Rectangle covering the left half marks exactly width/2 columns.
        grid = RasterGrid.empty((0.0, 0.0), 0.1, 10, 4)
        left = Hbb(0.25, 0.2, 0.5, 0.4)
        bits = rasterize(left, grid).bits
        assert bits.sum() == 5 * 4
        assert bits[:, :5].all()
        assert not bits[:, 5:].any()

    def test_full_grid_rectangle(self):
        grid = RasterGrid.empty((0.0, 0.0), 0.1, 8, 6)
        big = Hbb(0.4, 0.3, 10.0, 10.0)
        assert rasterize(big, grid).bits.all()

    def test_tiny_shape_marks_no_cells(self):
        grid = RasterGrid.empty((0.0, 0.0), 1.0, 4, 4)
        tiny = Hbb(0.1, 0.1, 0.05, 0.05)
        assert rasterize(tiny, grid).cell_count() == 0

    def test_polygon_matches_point_test_bit_for_bit(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = rng.integers(5, 11)
            angles = np.sort(rng.uniform(0, 2 * math.pi, size=n))
            radii = rng.uniform(0.3, 2.0, size=n)
            poly = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
            mask = PolygonMask(poly)
            grid = shared_grid(mask, mask, rng.uniform(0.05, 0.3))
            bits = rasterize(mask, grid).bits
            xs, ys = np.meshgrid(grid.x_centers(), grid.y_centers())
            pts = np.column_stack([xs.ravel(), ys.ravel()])
            expected = points_in_polygon(pts, poly).reshape(bits.shape)
            np.testing.assert_array_equal(bits, expected)

    def test_ellipse_matches_quadratic_form(self):
        e = Ellipse(0.3, -0.2, 2.0, 1.0, 0.7)
        grid = shared_grid(e, e, 0.05)
        bits = rasterize(e, grid).bits
        c, s = math.cos(e.theta), math.sin(e.theta)
        for r in range(0, grid.height, 7):
            for k in range(0, grid.width, 7):
                x = grid.x_centers()[k] - e.x0
                y = grid.y_centers()[r] - e.y0
                u = x * c + y * s
                w = -x * s + y * c
                inside = (u / e.semi_major) ** 2 + (w / e.semi_minor) ** 2 <= 1.0
                assert bits[r, k] == inside

    def test_obb_equals_equivalent_polygon(self):
        obb = Obb(0.5, 0.2, 2.0, 1.0, 0.4)
        grid = shared_grid(obb, obb, 0.04)
        np.testing.assert_array_equal(
            rasterize(obb, grid).bits,
            rasterize(PolygonMask(obb_corners(obb)), grid).bits,
        )


class TestIouHbb:
    def test_identical(self):
        a = Hbb(1, 2, 3, 4)
        assert iou_hbb(a, a) == 1.0

    def test_disjoint(self):
        assert iou_hbb(Hbb(0, 0, 1, 1), Hbb(5, 0, 1, 1)) == 0.0

    def test_half_offset_unit_squares(self):
        assert iou_hbb(Hbb(0, 0, 1, 1), Hbb(0.5, 0, 1, 1)) == pytest.approx(1 / 3, rel=1e-12)

    def test_containment_is_area_ratio(self):
        outer = Hbb(0, 0, 4, 4)
        inner = Hbb(0.5, -0.5, 2, 1)
        assert iou_hbb(inner, outer) == pytest.approx(2.0 / 16.0, rel=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a = Hbb(*rng.uniform(0, 1, 2), *rng.uniform(0.1, 1, 2))
            b = Hbb(*rng.uniform(0, 1, 2), *rng.uniform(0.1, 1, 2))
            assert iou_hbb(a, b) == iou_hbb(b, a)


class TestIouConvex:
    def test_identical(self):
        assert iou_convex(UNIT_SQUARE, UNIT_SQUARE) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint(self):
        assert iou_convex(UNIT_SQUARE, UNIT_SQUARE + [3.0, 0.0]) == 0.0

    def test_square_vs_rotated_square(self):
        # Intersection is the regular octagon of area 2*sqrt(2)-2, so
        # IoU = (2*sqrt(2)-2) / (4-2*sqrt(2)) = sqrt(2)/2.
        got = iou_convex(UNIT_SQUARE, rotated_square(math.pi / 4))
        assert got == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
        # Cross-check with the independent rasterized route at a fine cell.
        approx = iou_raster(
            PolygonMask(UNIT_SQUARE), PolygonMask(rotated_square(math.pi / 4)), 1e-3
        )
        assert abs(approx - got) < 0.005

    def test_rejects_nonconvex(self):
        ell = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
        with pytest.raises(ValueError):
            iou_convex(ell, UNIT_SQUARE)

    def test_rejects_degenerate(self):
        line = np.array([[0, 0], [1, 1], [2, 2]], dtype=float)
        with pytest.raises(ValueError):
            iou_convex(line, UNIT_SQUARE)

    def test_symmetry_within_roundoff(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = rotated_square(rng.uniform(0, math.pi)) * rng.uniform(0.5, 2)
            b = rotated_square(rng.uniform(0, math.pi)) + rng.uniform(-0.5, 0.5, 2)
            assert iou_convex(a, b) == pytest.approx(iou_convex(b, a), abs=1e-12)


class TestIouRaster:
    def test_identity_is_exact(self):
        e = Ellipse(0, 0, 2, 1, 0.3)
        assert iou_raster(e, e, 0.05) == 1.0

    def test_converges_to_analytic_hbb(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = Hbb(*rng.uniform(0, 1, 2), *rng.uniform(0.2, 1, 2))
            b = Hbb(*rng.uniform(0, 1, 2), *rng.uniform(0.2, 1, 2))
            cell = default_cell_size(a, b, 1000)
            assert abs(iou_raster(a, b, cell) - iou_hbb(a, b)) < 0.005

    def test_error_shrinks_as_cells_halve(self):
        rng = np.random.default_rng(4)
        pairs = []
        while len(pairs) < 30:
            a = Hbb(*rng.uniform(0, 1, 2), *rng.uniform(0.3, 1, 2))
            b = Hbb(*rng.uniform(0, 1, 2), *rng.uniform(0.3, 1, 2))
            if iou_hbb(a, b) > 0:
                pairs.append((a, b))
        mean_err = []
        for cells in (125, 250, 500, 1000):
            errs = [
                abs(iou_raster(a, b, default_cell_size(a, b, cells)) - iou_hbb(a, b))
                for a, b in pairs
            ]
            mean_err.append(np.mean(errs))
        assert mean_err[0] > mean_err[-1]
        assert mean_err[-1] < 0.005

    def test_circle_inscribed_in_square(self):
        circle = Ellipse(0, 0, 1.0, 1.0, 0.0)
        square = Hbb(0, 0, 2.0, 2.0)
        got = iou_raster(circle, square, default_cell_size(circle, square, 1000))
        assert abs(got - math.pi / 4) < 0.005

    def test_raises_on_empty_rasterization(self):
        tiny = Hbb(0, 0, 0.01, 0.01)
        far = Hbb(100, 0, 1, 1)
        with pytest.raises(ValueError, match="cell_size"):
            iou_raster(tiny, far, 5.0)

    def test_symmetry_exact(self):
        a = Ellipse(0.2, 0.1, 1.5, 0.7, 0.5)
        b = Hbb(0.5, 0.0, 1.0, 2.0)
        assert iou_raster(a, b, 0.01) == iou_raster(b, a, 0.01)


class TestIouBetween:
    def test_dispatches_hbb_to_analytic(self):
        a, b = Hbb(0, 0, 1, 1), Hbb(0.5, 0, 1, 1)
        assert iou_between(a, b) == iou_hbb(a, b)

    def test_obb_pair_uses_exact_clipping(self):
        a = Obb(0, 0, 2, 1, 0.0)
        b = Obb(0, 0, 2, 1, math.pi / 2)
        got = iou_between(a, b)
        # Cross shape: intersection 1, union 3.
        assert got == pytest.approx(1 / 3, rel=1e-9)

    def test_ellipse_falls_back_to_raster(self):
        e = Ellipse(0, 0, 1, 1, 0)
        sq = Hbb(0, 0, 2, 2)
        assert abs(iou_between(e, sq) - math.pi / 4) < 0.005

    def test_matches_hbb_corners_route(self):
        a, b = Hbb(0, 0, 2, 1), Hbb(0.4, 0.2, 1, 1)
        assert iou_convex(hbb_corners(a), hbb_corners(b)) == pytest.approx(
            iou_hbb(a, b), rel=1e-12
        )


class TestMaskBcRaster:
    def test_identical_is_one(self):
        sq = PolygonMask(UNIT_SQUARE)
        assert mask_bc_raster(sq, sq, 0.01) == 1.0

    def test_matches_exact_on_rect_overlap(self):
        from gbbkit import mask_bc

        a = PolygonMask(UNIT_SQUARE)
        b = PolygonMask(UNIT_SQUARE + [0.5, 0.0])
        assert mask_bc_raster(a, b, 0.002) == pytest.approx(mask_bc(a, b), abs=0.01)
