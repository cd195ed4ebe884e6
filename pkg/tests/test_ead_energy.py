import math

import numpy as np
import pytest

from lvdisc.ead import (
    DiscParams,
    DiscTemplate,
    boundary_points,
    contour,
    default_n_samples,
    energy,
    energy_pixelsum,
    rasterize,
)
from lvdisc.errors import DegenerateDiscError
from lvdisc.imaging import GrayImage
from lvdisc.phantoms import blurred_noise_image, ellipse_coverage
from oracles import (
    count_lattice_inside,
    polyline_length,
    ramanujan_perimeter,
    region_sums_bruteforce,
    smooth_blob_scene,
)

SQRT2 = math.sqrt(2.0)


class TestBoundaryPoints:
    def test_inner_ring_at_t0(self):
        p = DiscParams(1.0, 1.0, 0.0, 10.0, 20.0)
        x, y, t = boundary_points(p, "inner", 16)
        assert (x[0], y[0]) == pytest.approx((11.0, 20.0))
        assert t[0] == 0.0

    def test_outer_ring_quarter_turn(self):
        p = DiscParams(2.0, 1.0, 0.0, 5.0, 5.0)
        x, y, t = boundary_points(p, "outer", 8)
        # t = pi/2 leaves only the B sin(t) term, scaled by sqrt(2)
        assert t[2] == pytest.approx(math.pi / 2.0)
        assert x[2] == pytest.approx(5.0, abs=1e-12)
        assert y[2] == pytest.approx(5.0 + SQRT2, abs=1e-12)

    def test_central_symmetry(self):
        p = DiscParams(7.0, 3.0, 0.77, 31.0, 24.0)
        x, y, _ = boundary_points(p, "outer", 64)
        assert np.allclose(x + np.roll(x, 32), 2 * p.xc, atol=1e-9)
        assert np.allclose(y + np.roll(y, 32), 2 * p.yc, atol=1e-9)

    def test_minimum_samples(self):
        with pytest.raises(ValueError):
            boundary_points(DiscParams(3, 3, 0, 0, 0), "inner", 4)

    def test_ring_names(self):
        with pytest.raises(ValueError):
            boundary_points(DiscParams(3, 3, 0, 0, 0), "middle", 16)


class TestDiscTemplate:
    def test_radius_ratio_enforced(self):
        DiscTemplate()  # default sqrt(2) : 1 is fine
        with pytest.raises(ValueError):
            DiscTemplate(r1=1.5, r2=1.0)


class TestEnergy:
    def test_uniform_image_zero_energy(self):
        img = GrayImage(np.full((64, 64), 0.37))
        p = DiscParams(12.0, 9.0, 0.4, 31.0, 33.0)
        eb = energy(img, p)
        assert eb.e == pytest.approx(0.0, abs=1e-6)
        # region integrals hit the analytic areas times the constant
        assert eb.e1 == pytest.approx(2.0 * math.pi * 12 * 9 * 0.37, rel=1e-9)
        assert eb.e2 == pytest.approx(math.pi * 12 * 9 * 0.37, rel=1e-9)

    def test_identity_e_times_ab(self):
        rng = np.random.default_rng(0)
        img = blurred_noise_image((96, 96), sigma=3.0, rng=rng)
        for _ in range(5):
            p = DiscParams(float(rng.uniform(5, 20)), float(rng.uniform(5, 20)),
                           float(rng.uniform(0, math.pi)),
                           float(rng.uniform(30, 66)), float(rng.uniform(30, 66)))
            eb = energy(img, p)
            assert eb.e * p.a * p.b == pytest.approx(eb.e1 - 2.0 * eb.e2, abs=1e-9)

    def test_indicator_reaches_minus_pi(self):
        # bias of the boundary path scales with perimeter/area, so the
        # ground-truth disc is large
        p = DiscParams(88.0, 88.0, 0.0, 127.5, 127.5)
        img = GrayImage(np.clip(ellipse_coverage((256, 256), p, supersample=4), 0, 1))
        assert energy(img, p).e == pytest.approx(-math.pi, abs=0.05)
        assert energy_pixelsum(img, p).e == pytest.approx(-math.pi, abs=0.05)

    def test_annulus_reaches_plus_pi(self):
        p = DiscParams(120.0, 120.0, 0.0, 175.5, 175.5)
        inner = ellipse_coverage((352, 352), p, supersample=4)
        outer = ellipse_coverage(
            (352, 352), DiscParams(p.a * SQRT2, p.b * SQRT2, 0.0, p.xc, p.yc), supersample=4
        )
        img = GrayImage(np.clip(outer - inner, 0, 1))
        assert energy(img, p).e == pytest.approx(math.pi, abs=0.05)

    def test_degenerate_disc_rejected(self):
        img = GrayImage(np.zeros((32, 32)))
        with pytest.raises(DegenerateDiscError):
            energy(img, DiscParams(1e-4, 1e-4, 0.0, 16.0, 16.0))

    def test_rotation_invariance_circle_same_samples(self):
        # with A == B a rotation by a whole grid step permutes the exact
        # sample set, so the quadrature is unchanged to machine precision
        rng = np.random.default_rng(1)
        img = blurred_noise_image((96, 96), sigma=4.0, rng=rng)
        n = 256
        p0 = DiscParams(14.0, 14.0, 0.0, 47.0, 45.0)
        e0 = energy(img, p0, n).e
        for k in (3, 17, 64):
            pk = DiscParams(14.0, 14.0, 2.0 * math.pi * k / n, 47.0, 45.0)
            assert energy(img, pk, n).e == pytest.approx(e0, abs=1e-6)

    def test_rotation_stability_circle_arbitrary_angle(self):
        rng = np.random.default_rng(2)
        img = blurred_noise_image((96, 96), sigma=4.0, rng=rng)
        p0 = DiscParams(14.0, 14.0, 0.0, 47.0, 45.0)
        p1 = DiscParams(14.0, 14.0, 1.234, 47.0, 45.0)
        assert energy(img, p1).e == pytest.approx(energy(img, p0).e, abs=1e-3)

    def test_energy_bounds_on_unit_images(self):
        rng = np.random.default_rng(3)
        for trial in range(20):
            img = blurred_noise_image((128, 128), sigma=float(rng.uniform(2, 6)), rng=rng)
            p = DiscParams(float(rng.uniform(10, 30)), float(rng.uniform(10, 30)),
                           float(rng.uniform(0, math.pi)),
                           float(rng.uniform(40, 88)), float(rng.uniform(40, 88)))
            e = energy(img, p).e
            assert -math.pi - 0.05 <= e <= 2.0 * math.pi + 0.05


class TestEnergyPixelsum:
    def test_matches_bruteforce_loop(self):
        rng = np.random.default_rng(4)
        img = blurred_noise_image((64, 64), sigma=2.0, rng=rng)
        p = DiscParams(9.0, 7.0, 0.6, 30.0, 28.0)
        eb = energy_pixelsum(img, p)
        e1, e2 = region_sums_bruteforce(img, p)
        assert eb.e1 == pytest.approx(e1, abs=1e-9)
        assert eb.e2 == pytest.approx(e2, abs=1e-9)

    def test_uniform_near_zero(self):
        img = GrayImage(np.full((80, 80), 0.5))
        p = DiscParams(15.0, 15.0, 0.0, 40.0, 40.0)
        # only boundary-pixel count asymmetry contributes
        assert abs(energy_pixelsum(img, p).e) < 0.05

    def test_disc_off_image_is_finite(self):
        rng = np.random.default_rng(5)
        img = blurred_noise_image((64, 64), sigma=3.0, rng=rng)
        p = DiscParams(12.0, 10.0, 0.3, -5.0, 70.0)
        eb = energy_pixelsum(img, p)
        assert math.isfinite(eb.e)
        el = energy(img, p)
        assert math.isfinite(el.e)

    def test_green_equivalence_smooth_blobs(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = float(rng.uniform(10, 40))
            b = float(rng.uniform(10, 40))
            ext = SQRT2 * max(a, b) + 4
            p = DiscParams(a, b, float(rng.uniform(0, math.pi)),
                           float(rng.uniform(ext, 159 - ext)),
                           float(rng.uniform(ext, 159 - ext)))
            img = smooth_blob_scene((160, 160), p, rng)
            e_line = energy(img, p).e
            e_pix = energy_pixelsum(img, p).e
            assert abs(e_line - e_pix) / max(abs(e_pix), 0.1) <= 0.02


class TestRasterizeContour:
    def test_five_by_five_count_is_13(self):
        mask = rasterize(DiscParams(2.0, 2.0, 0.0, 2.0, 2.0), 5, 5)
        assert mask.area_px() == count_lattice_inside(2, 2, 0, 2, 2, 5, 5) == 13

    def test_random_cases_match_loop_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = float(rng.uniform(0.4, 9))
            b = float(rng.uniform(0.4, 9))
            th = float(rng.uniform(0, math.pi))
            xc = float(rng.uniform(0, 24))
            yc = float(rng.uniform(0, 24))
            mask = rasterize(DiscParams(a, b, th, xc, yc), 25, 25)
            assert mask.area_px() == count_lattice_inside(a, b, th, xc, yc, 25, 25)

    def test_subpixel_disc_may_be_empty(self):
        mask = rasterize(DiscParams(0.4, 0.4, 0.0, 2.5, 2.5), 5, 5)
        assert mask.area_px() == 0

    def test_circle_rotation_invariant(self):
        base = rasterize(DiscParams(5.0, 5.0, 0.0, 10.2, 9.7), 21, 21)
        for th in (0.3, 1.1, 2.9):
            assert np.array_equal(
                rasterize(DiscParams(5.0, 5.0, th, 10.2, 9.7), 21, 21).bits, base.bits
            )

    def test_contour_vertices_on_inner_ellipse(self):
        p = DiscParams(8.0, 5.0, 1.1, 40.0, 41.0)
        pts = contour(p, 64)
        assert len(pts) == 65
        assert np.allclose(pts[0], pts[-1])
        ca, sa = math.cos(p.theta), math.sin(p.theta)
        for x, y in pts:
            u = ((x - p.xc) * ca - (y - p.yc) * sa) / p.a
            v = ((x - p.xc) * sa + (y - p.yc) * ca) / p.b
            assert u * u + v * v == pytest.approx(1.0, abs=1e-9)

    def test_contour_axis_points_unit_circle(self):
        # the axis crossings (+-1, 0), (0, +-1) land on every 2nd vertex at n=8
        pts = contour(DiscParams(1.0, 1.0, 0.0, 0.0, 0.0), 8)
        assert len(pts) == 9
        expect = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        assert np.allclose(pts[::2][:4], expect, atol=1e-12)

    def test_perimeter_against_ramanujan(self):
        for a, b in [(20.0, 12.0), (15.0, 15.0), (30.0, 8.0)]:
            pts = contour(DiscParams(a, b, 0.7, 50.0, 50.0), 256)
            num = polyline_length(pts)
            assert num == pytest.approx(ramanujan_perimeter(a, b), rel=0.01)


class TestSamplePolicy:
    def test_perimeter_adaptive_floor(self):
        assert default_n_samples(DiscParams(2.0, 2.0, 0.0, 0, 0)) == 64
        n = default_n_samples(DiscParams(30.0, 10.0, 0.0, 0, 0))
        assert n == math.ceil(2.0 * math.pi * SQRT2 * 30.0)
