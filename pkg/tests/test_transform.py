import math

import numpy as np
import pytest

from grushin3d import AlphaParam, DomainError, QuadratureConfig, reference_ball
from grushin3d.shapes import ball, ball_sector
from grushin3d.transform import (
    PolarTriple,
    flatten_point,
    flatten_shape,
    polar_to_flat_point,
    polar_to_point,
    pushforward_perimeter_check,
    pushforward_volume_check,
    unflatten_point,
)


def small_sector_ball(alpha):
    """Euclidean ball strictly inside the first sector, away from the axis."""
    ap = AlphaParam(alpha)
    width = ap.sector_width
    ctr = (math.cos(width / 2), math.sin(width / 2), 0.0)
    return ball(0.3 * math.sin(width / 2), center=ctr)


class TestPolarMaps:
    def test_cartesian_map(self):
        p = polar_to_point(PolarTriple(1.0, math.pi / 4, 0.0).validate(1.0))
        assert np.allclose(p, [math.sqrt(2) / 2, math.sqrt(2) / 2, 0.0], atol=1e-15)

    def test_flat_map_quarter_turn(self):
        # alpha = 1: angle doubles, radius becomes r^2/2
        p = polar_to_flat_point(PolarTriple(1.0, math.pi / 4, 0.0), 1.0)
        assert np.allclose(p, [0.0, 0.5, 0.0], atol=1e-15)

    def test_flat_map_radius(self):
        p = polar_to_flat_point(PolarTriple(2.0, 1e-9, 3.0), 1.0)
        assert p[0] == pytest.approx(2.0, rel=1e-12)
        assert p[2] == 3.0

    def test_validate_rejects_walls(self):
        with pytest.raises(DomainError):
            PolarTriple(1.0, 0.0, 0.0).validate(1.0)
        with pytest.raises(DomainError):
            PolarTriple(0.0, 0.3, 0.0).validate(1.0)


class TestFlattenRoundTrip:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_roundtrip_random_points(self, alpha):
        ap = AlphaParam(alpha)
        rng = np.random.default_rng(11)
        th = rng.uniform(1e-6, ap.sector_width - 1e-6, 1000)
        r = rng.uniform(0.05, 4.0, 1000)
        y = rng.uniform(-3.0, 3.0, 1000)
        pts = np.column_stack([r * np.cos(th), r * np.sin(th), y])
        back = unflatten_point(flatten_point(pts, ap), ap)
        assert np.abs(back - pts).max() <= 1e-10

    def test_angle_dilation(self):
        ap = AlphaParam(1.0)
        rng = np.random.default_rng(5)
        th = rng.uniform(1e-4, ap.sector_width - 1e-4, 200)
        pts = np.column_stack([np.cos(th), np.sin(th), np.zeros_like(th)])
        image = flatten_point(pts, ap)
        assert np.abs(np.arctan2(image[:, 1], image[:, 0]) - 2 * th).max() <= 1e-12

    def test_radius_map(self):
        # alpha = 1: |x| = sqrt(2) at 45 degrees maps to radius |x|^2/2 = 1
        p = flatten_point(np.array([1.0, 1.0, 0.0]), 1.0)
        assert np.hypot(p[0], p[1]) == pytest.approx(1.0, abs=1e-14)

    def test_rejects_outside_sector(self):
        with pytest.raises(DomainError):
            flatten_point(np.array([-1.0, -1.0, 0.0]), 1.0)
        with pytest.raises(DomainError):
            flatten_point(np.array([1.0, 0.0, 0.0]), 1.0)  # on a wall


class TestReferenceBallImage:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_cap_maps_to_unit_sphere(self, alpha):
        shape, _ = reference_ball(alpha, 1)
        cap = shape.patches[0]
        st, _ = cap.midpoint_nodes(40)
        pts = cap.param(st)
        image = flatten_point(pts, alpha, check_sector=False)
        radii = np.linalg.norm(image, axis=1)
        assert np.abs(radii - 1.0).max() <= 1e-10

    def test_image_wedge_angle(self):
        ap = AlphaParam(2.0)
        shape, _ = reference_ball(ap, 1)
        cap = shape.patches[0]
        st, _ = cap.midpoint_nodes(60)
        image = flatten_point(cap.param(st), ap, check_sector=False)
        ang = np.arctan2(image[:, 1], image[:, 0])
        width = (ap.alpha + 1.0) * ap.sector_width
        assert ang.min() > 0 and ang.max() < width


class TestPushforward:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_reference_sector_volume(self, alpha):
        cfg = QuadratureConfig(volume_resolution=96, surface_resolution=128, refine_depth=2)
        shape, vals = reference_ball(alpha, 1)
        rep = pushforward_volume_check(shape, alpha, cfg)
        assert rep.rel_gap <= 1e-3
        assert rep.weighted == pytest.approx(vals.volume, rel=5e-3)

    def test_reference_sector_perimeter(self):
        cfg = QuadratureConfig(volume_resolution=64, surface_resolution=160, refine_depth=2)
        shape, vals = reference_ball(1.0, 1)
        rep = pushforward_perimeter_check(shape, 1.0, cfg)
        assert rep.rel_gap <= 1e-2
        assert rep.weighted == pytest.approx(vals.sector_perimeter, rel=1e-3)

    def test_small_ball_far_from_axis(self):
        cfg = QuadratureConfig(volume_resolution=96, surface_resolution=128, refine_depth=2)
        shape = small_sector_ball(1.0)
        assert pushforward_volume_check(shape, 1.0, cfg).rel_gap <= 1e-3
        assert pushforward_perimeter_check(shape, 1.0, cfg).rel_gap <= 1e-2

    def test_scaled_sector_ball_half_radius(self):
        cfg = QuadratureConfig(volume_resolution=64, surface_resolution=128, refine_depth=2)
        shape = ball_sector(1.0, j=1, radius=0.5)
        rep = pushforward_perimeter_check(shape, 1.0, cfg)
        # spherical wedge of radius 1/2: area scales by 1/4
        assert rep.euclidean == pytest.approx(0.25 * 2 * math.pi, rel=1e-3)
        assert rep.rel_gap <= 1e-2

    def test_empty_shape(self):
        from grushin3d import ImplicitShape

        cfg = QuadratureConfig(volume_resolution=32, refine_depth=1)
        empty = ImplicitShape(
            level=lambda p: np.ones(len(np.atleast_2d(p))),
            bbox=np.array([(0.1, 1.0), (0.1, 1.0), (-1.0, 1.0)]),
        )
        rep = pushforward_volume_check(empty, 1.0, cfg)
        assert (rep.weighted, rep.euclidean, rep.rel_gap) == (0.0, 0.0, 0.0)

    def test_shape_outside_sector_rejected(self):
        cfg = QuadratureConfig(volume_resolution=32, refine_depth=1)
        with pytest.raises(DomainError):
            pushforward_volume_check(ball(0.5), 1.0, cfg)  # straddles all sectors

    def test_flatten_shape_volume_identity(self):
        # direct check that the image's Lebesgue volume equals the weighted one
        cfg = QuadratureConfig(volume_resolution=96, refine_depth=2)
        shape = small_sector_ball(0.5)
        rep = pushforward_volume_check(shape, 0.5, cfg)
        flat = flatten_shape(shape, 0.5)
        assert flat.name.startswith("flat(")
        assert rep.euclidean > 0
