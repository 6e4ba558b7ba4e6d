import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from grushin3d import AlphaParam, DomainError
from grushin3d.fields import compact_bump, cosine_bump, radial_field, random_bump_corpus
from grushin3d.grids import GridFunction3D
from grushin3d.rearrangement import (
    anisotropic_radius,
    coarea_derivative_compare,
    distribution_function,
    grushin_energy,
    polya_szego_gap,
    radius_from_measure,
    rearrange,
    sector_measure_of_radius,
    weighted_lq_norm,
)
from grushin3d.shapes import cylinder


def cylinder_indicator(resolution=64):
    """Grid indicator of {|x| < 1, |y| < 1} inside a slightly larger box."""
    bbox = np.array([(-1.1, 1.1)] * 3)
    fn = lambda X1, X2, Y: ((X1**2 + X2**2 < 1.0) & (np.abs(Y) < 1.0)).astype(float)  # noqa: E731
    return GridFunction3D.from_callable(fn, bbox, (resolution,) * 3)


class TestDistributionFunction:
    def test_zero_field(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), np.zeros((8, 8, 8)))
        dist = distribution_function(grid, 1.0)
        assert np.all(dist.measures == 0.0)

    def test_plateau_cylinder(self):
        # indicator of the unit cylinder: lambda(t) = weighted volume pi below 1
        grid = cylinder_indicator(96)
        dist = distribution_function(grid, 1.0, levels=np.array([0.25, 0.5, 0.99]))
        assert np.allclose(dist.measures, math.pi, rtol=2e-2)
        top = distribution_function(grid, 1.0, levels=np.array([1.0]))
        assert top.measures[0] == 0.0

    def test_monotone_nonincreasing(self):
        for field in random_bump_corpus(3, 1.0, resolution=32):
            dist = distribution_function(field, 1.0)
            assert np.all(np.diff(dist.measures) <= 1e-15)

    def test_rejects_negative_values(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), -np.ones((4, 4, 4)))
        with pytest.raises(DomainError):
            distribution_function(grid, 1.0)


class TestRadiusFromMeasure:
    def test_reference_measure(self):
        # the unit sector ball has anisotropic radius a+1
        assert radius_from_measure(2 * math.pi / 3, 1.0) == pytest.approx(2.0, abs=1e-13)

    def test_zero(self):
        assert radius_from_measure(0.0, 1.0) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            radius_from_measure(-1e-9, 1.0)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    def test_cube_root_homogeneity(self, m):
        assert radius_from_measure(8 * m, 1.0) == pytest.approx(
            2 * radius_from_measure(m, 1.0), rel=1e-12
        )

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_inverts_sector_measure(self, alpha):
        for R in (0.3, 1.0, 2.7):
            m = sector_measure_of_radius(R, alpha)
            assert radius_from_measure(m, alpha) == pytest.approx(R, rel=1e-12)

    def test_sector_measure_against_voxels(self, fast_cfg):
        # voxel quadrature of {r < R} in the first sector
        from grushin3d.shapes import ball_sector

        shape = ball_sector(1.0, j=1)  # r < 2 for alpha = 1
        vol = sector_measure_of_radius(2.0, 1.0)
        from grushin3d import weighted_volume

        assert weighted_volume(shape, 1.0, fast_cfg) == pytest.approx(vol, rel=5e-3)


class TestRearrange:
    def test_zero_field(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), np.zeros((8, 8, 8)))
        prof = rearrange(grid, 1.0)
        assert prof.max_value == 0.0
        assert grushin_energy(prof) == 0.0

    def test_max_preserved_exactly(self):
        u = radial_field(cosine_bump, 1.0, 1.0, resolution=48)
        prof = rearrange(u, 1.0)
        assert prof.max_value == float(u.values.max())

    def test_radial_profile_law(self):
        # radial nonincreasing u = g(r): profile is g(r / (2n)^{1/3})
        ap = AlphaParam(1.0)
        u = radial_field(cosine_bump, ap, 1.0, resolution=96)
        prof = rearrange(u, ap)
        rs = np.linspace(0.05, 1.5, 40)
        expected = cosine_bump(rs / (2 * ap.sector_count) ** (1 / 3))
        assert np.abs(prof(rs) - expected).max() <= 6e-3  # one level step + grid noise

    def test_profile_monotone_right_continuous(self):
        for field in random_bump_corpus(3, 1.0, resolution=32):
            prof = rearrange(field, 1.0)
            assert np.all(np.diff(prof.values) <= 0)
            assert np.all(np.diff(prof.radii) > 0)
            # right-continuity: value at a breakpoint comes from the interval
            # to its right
            mid = len(prof.radii) // 2
            if mid + 1 < len(prof.values):
                assert prof(prof.radii[mid]) == prof.values[mid + 1]

    def test_equimeasurability_at_levels(self):
        ap = AlphaParam(1.0)
        u = radial_field(compact_bump, ap, 1.0, resolution=64)
        prof = rearrange(u, ap)
        dist = distribution_function(u, ap)
        gap = np.abs(dist.measures - prof.measure_above(dist.levels)).max()
        assert gap <= 1e-12 * dist.measures[0]


class TestNorms:
    def test_plateau_l6_norm(self):
        grid = cylinder_indicator(96)
        # weighted measure of the support is pi, so the L6 norm is pi^{1/6}
        assert weighted_lq_norm(grid, 6, 1.0) == pytest.approx(math.pi ** (1 / 6), rel=5e-3)

    def test_zero_field(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), np.zeros((8, 8, 8)))
        assert weighted_lq_norm(grid, 2, 1.0) == 0.0

    def test_rejects_q_below_one(self):
        grid = cylinder_indicator(16)
        with pytest.raises(DomainError):
            weighted_lq_norm(grid, 0.5, 1.0)

    @pytest.mark.parametrize("q", [2, 4, 6])
    def test_rearrangement_preserves_norms(self, q):
        ap = AlphaParam(1.0)
        u = radial_field(cosine_bump, ap, 1.0, resolution=96)
        prof = rearrange(u, ap)
        n_u = weighted_lq_norm(u, q, ap)
        n_p = weighted_lq_norm(prof, q, ap)
        assert n_p == pytest.approx(n_u, rel=1e-2)


class TestGrushinEnergy:
    def test_zero_field(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), np.zeros((8, 8, 8)))
        assert grushin_energy(grid, 1.0) == 0.0

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_full_space_radial_identity(self, alpha):
        # for u = g(r) the full-space energy is 4 pi int r^2 g'(r)^2 dr
        ap = AlphaParam(alpha)
        u = radial_field(cosine_bump, ap, 1.0, resolution=96)
        eps = 1e-7
        gp = lambda r: (cosine_bump(r + eps) - cosine_bump(r - eps)) / (2 * eps)  # noqa: E731
        exact = 4 * math.pi * quad(lambda r: r * r * gp(r) ** 2, 0, 1, limit=200)[0]
        assert grushin_energy(u, ap) == pytest.approx(exact, rel=2e-2)

    def test_richardson_order(self):
        # smooth bump: grid energy converges at order >= 1.8
        ap = AlphaParam(1.0)
        eps = 1e-7
        gp = lambda r: (cosine_bump(r + eps) - cosine_bump(r - eps)) / (2 * eps)  # noqa: E731
        exact = 4 * math.pi * quad(lambda r: r * r * gp(r) ** 2, 0, 1, limit=200)[0]
        errs = []
        for n in (32, 64, 128):
            u = radial_field(cosine_bump, ap, 1.0, resolution=n)
            errs.append(abs(grushin_energy(u, ap) - exact))
        order = math.log2(errs[0] / errs[2]) / 2
        assert order >= 1.8


class TestPolyaSzego:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_radial_family_ratio(self, alpha):
        ap = AlphaParam(alpha)
        u = radial_field(cosine_bump, ap, 1.0, resolution=96)
        prof = rearrange(u, ap)
        ratio = grushin_energy(prof) / grushin_energy(u, ap)
        target = (2.0 * ap.sector_count) ** (-2.0 / 3.0)
        assert ratio == pytest.approx(target, rel=2e-2)

    def test_zero_field(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), np.zeros((8, 8, 8)))
        assert polya_szego_gap(grid, 1.0) == 0.0

    def test_random_bumps_gap_nonnegative(self):
        ap = AlphaParam(1.0)
        for field in random_bump_corpus(5, ap, resolution=48):
            gap = polya_szego_gap(field, ap)
            assert gap >= -0.02 * grushin_energy(field, ap)


class TestCoarea:
    def test_radial_mid_levels_agree(self):
        ap = AlphaParam(1.0)
        u = radial_field(cosine_bump, ap, 1.0, resolution=96)
        for t in (0.3, 0.5, 0.7):
            rep = coarea_derivative_compare(u, ap, t)
            assert not rep.plateau_detected
            assert rep.lhs == pytest.approx(rep.rhs, rel=5e-2)

    def test_plateau_flagged(self):
        # terraced radial field: constant at level 0.5 on a fat annulus,
        # rising to 1.5 inside, so the plateau sits strictly below the max
        terraced = lambda rho: np.minimum(2 * cosine_bump(rho), 0.5) + np.maximum(  # noqa: E731
            2 * cosine_bump(rho) - 1.0, 0.0
        )
        u = radial_field(terraced, 1.0, 1.0, resolution=48)
        rep = coarea_derivative_compare(u, 1.0, 0.5)
        assert rep.plateau_detected

    def test_zero_field_rejected(self):
        grid = GridFunction3D(np.array([(-1, 1)] * 3), np.zeros((8, 8, 8)))
        with pytest.raises(DomainError):
            coarea_derivative_compare(grid, 1.0, 0.5)

    def test_level_out_of_range_rejected(self):
        u = radial_field(cosine_bump, 1.0, 1.0, resolution=32)
        with pytest.raises(DomainError):
            coarea_derivative_compare(u, 1.0, 2.0)


class TestAnisotropicRadius:
    def test_matches_definition(self):
        r = anisotropic_radius(1.0, 1.0, 0.5, 1.0)
        assert r == pytest.approx(math.sqrt(4.0 + 4 * 0.25))
