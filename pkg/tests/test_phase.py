"""Color-function construction, mixtures, proper coefficients, wall fields."""

import numpy as np
import pytest

from capflow.lattice import build_grid
from capflow.phase import (Box, Complement, Cylinder, HalfSpace, PhaseSet,
                           Sphere, Union, init_color_from_shape, mix_density,
                           mix_viscosity, no_wall, pair_sigma_matrix,
                           partition_residual, proper_sigma, wall_fractions)


class TestColorInit:
    def test_halfspace_one_cell_ramp(self):
        # Example-1 style grid, flat surface at z = 7, band of one cell
        g = build_grid((12, 4, 128), 0.125, bcs=("solid", "periodic", "solid"))
        shape = HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 7.0))
        xi = init_color_from_shape(shape, g, 0.125)
        z = (np.arange(128) + 0.5) * 0.125
        col = xi[3, 1, :]
        assert np.all(col[z < 7 - 0.125] == 1.0)
        assert np.all(col[z > 7 + 0.125] == 0.0)
        band = np.count_nonzero((col > 0.05) & (col < 0.95))
        assert band <= np.ceil(0.125 / g.spacing) + 1

    def test_full_domain_shape(self):
        g = build_grid((4, 4, 4), 1.0)
        xi = init_color_from_shape(Box(lo=(-10,) * 3, hi=(10,) * 3), g, 1.0)
        assert np.all(xi == 1.0)

    def test_sphere_volume_within_1pct(self):
        g = build_grid((48, 48, 48), 0.125)
        R = 16 * 0.125
        xi = init_color_from_shape(Sphere(center=(3, 3, 3), radius=R), g,
                                   2 * 0.125)
        vol = float(np.sum(xi)) * g.cell_volume
        exact = 4.0 / 3.0 * np.pi * R**3
        assert abs(vol - exact) / exact < 0.01

    def test_band_too_thin_rejected(self):
        g = build_grid((4, 4, 4), 1.0)
        with pytest.raises(ValueError, match="below one cell"):
            init_color_from_shape(Sphere(center=(2, 2, 2), radius=1.0), g, 0.5)

    def test_monotone_along_normal(self):
        g = build_grid((4, 4, 32), 0.25, bcs=("periodic", "periodic", "symmetry"))
        xi = init_color_from_shape(
            HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 4.0)), g, 0.75)
        col = xi[2, 2, :]
        assert np.all(np.diff(col) <= 1e-12)


class TestPartition:
    def test_fresh_three_phase_set(self):
        g = build_grid((8, 4, 16), 0.25, bcs=("solid", "periodic", "solid"))
        wall = wall_fractions(
            Complement(Box(lo=(0.5, -1, 0.5), hi=(1.5, 2, 3.5))), g, 0.25)
        f = init_color_from_shape(
            HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 2.0)), g, 0.25)
        phases = PhaseSet(colors=[wall.xi0, wall.V * f, wall.V * (1 - f)],
                          densities=[0, 1, 1], viscosities=[0, .1, .1],
                          sigma=pair_sigma_matrix(0.0, 1.0, 2.0))
        assert partition_residual(phases) <= 1e-12

    def test_structural_identity_after_advection_storage(self):
        # f-based storage keeps the identity for any f, V in [0, 1]
        rng = np.random.default_rng(0)
        V = rng.random((4, 4, 4))
        f = rng.random((4, 4, 4))
        phases = PhaseSet(colors=[1 - V, V * f, V * (1 - f)],
                          densities=[0, 1, 1], viscosities=[0, .1, .1],
                          sigma=pair_sigma_matrix(0.0, 1.0, 2.0))
        assert partition_residual(phases) <= 1e-12

    def test_corrupted_cell_reported(self):
        V = np.ones((3, 3, 3))
        f = np.full((3, 3, 3), 0.5)
        colors = [1 - V, V * f, V * (1 - f)]
        colors[1][1, 1, 1] += 0.25
        phases = PhaseSet(colors=colors, densities=[0, 1, 1],
                          viscosities=[0, .1, .1],
                          sigma=pair_sigma_matrix(0.0, 1.0, 2.0))
        assert partition_residual(phases) == pytest.approx(0.25)


class TestMixtures:
    def test_pure_liquid1(self):
        f = np.ones((2, 2, 2))
        V = np.ones((2, 2, 2))
        assert np.all(mix_density(f, V, 2.5, 1.0) == 2.5)

    def test_equal_densities_paper_value(self):
        f = np.full((2, 2, 2), 0.5)
        V = np.ones((2, 2, 2))
        assert np.all(mix_density(f, V, 1.0, 1.0) == 1.0)

    def test_solid_cells_zero(self):
        f = np.ones((2, 2, 2))
        V = np.zeros((2, 2, 2))
        assert np.all(mix_density(f, V, 2.5, 1.0) == 0.0)

    def test_viscosity_blend(self):
        xi1 = np.ones((2, 2, 2))
        xi2 = np.zeros((2, 2, 2))
        assert np.all(mix_viscosity(xi1, xi2, 0.3, 0.7) == 0.3)
        assert np.all(mix_viscosity(0.5 * xi1, 0.5 * xi1, 0.1, 0.1) == 0.1)
        assert np.all(mix_viscosity(xi2, xi2, 0.3, 0.7) == 0.0)


class TestProperSigma:
    def test_linear_solve_example(self):
        assert proper_sigma(4.0, 5.0, 3.0) == pytest.approx((3.0, 1.0, 2.0))

    def test_paper_pair_reconstructs_sigma12(self):
        s1, s2 = 3.349, 46.651
        assert s1 + s2 == pytest.approx(50.0)
        s0, r1, r2 = proper_sigma(s1, s2, s1 + s2)
        assert (s0, r1, r2) == pytest.approx((0.0, s1, s2))

    def test_negative_coefficient_warns(self):
        with pytest.warns(RuntimeWarning, match="negative proper"):
            s0, s1, s2 = proper_sigma(1.0, 1.0, 3.0)
        assert s0 == pytest.approx(-0.5)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            s01, s02, s12 = rng.random(3) * 10
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                s0, s1, s2 = proper_sigma(s01, s02, s12)
            assert s0 + s1 == pytest.approx(s01, abs=1e-12)
            assert s0 + s2 == pytest.approx(s02, abs=1e-12)
            assert s1 + s2 == pytest.approx(s12, abs=1e-12)


class TestWallFractions:
    def test_flat_bottom_layer(self):
        # 3 um thick wall at the bottom of a 14 um tall domain, one-cell band
        g = build_grid((8, 4, 112), 0.125, bcs=("periodic", "periodic", "solid"))
        wall = wall_fractions(HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 3.0)),
                              g, 0.125)
        z = (np.arange(112) + 0.5) * 0.125
        col = wall.V[3, 1, :]
        assert np.all(col[z < 3 - 0.125] == 0.0)
        assert np.all(col[z > 3 + 0.125] == 1.0)
        assert np.count_nonzero((col > 0.0) & (col < 1.0)) <= 2

    def test_no_wall(self):
        g = build_grid((4, 4, 4), 1.0)
        wall = no_wall(g)
        assert np.all(wall.V == 1.0)
        for c in wall.A.components():
            assert np.all(c == 1.0)
        assert not wall.has_wall

    def test_half_blocked_face(self):
        # wall plane cutting exactly through x-face centers: A = 0.5 there
        g = build_grid((4, 4, 4), 1.0, bcs=("periodic", "periodic", "symmetry"))
        wall = wall_fractions(HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 2.5)),
                              g, 1.0)
        assert wall.A.x[2, 2, 2] == pytest.approx(0.5, abs=0.01)

    def test_closed_cell_consistency(self):
        g = build_grid((8, 4, 16), 0.25, bcs=("periodic", "periodic", "solid"))
        wall = wall_fractions(HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 2.0)),
                              g, 0.25)
        closed = wall.V == 0.0
        for ax, comp in enumerate(wall.A.components()):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[ax] = slice(0, g.shape[ax])
            hi[ax] = slice(1, g.shape[ax] + 1)
            assert np.all(comp[tuple(lo)][closed] == 0.0)
            assert np.all(comp[tuple(hi)][closed] == 0.0)

    def test_open_faces_between_full_cells(self):
        g = build_grid((6, 4, 12), 0.5, bcs=("periodic", "periodic", "solid"))
        wall = wall_fractions(HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 1.0)),
                              g, 0.5)
        full = wall.V >= 1.0
        both = full[:, :, :-1] & full[:, :, 1:]
        inner = wall.A.z[:, :, 1:-1]
        assert np.all(inner[both] == 1.0)

    def test_wall_covering_domain_rejected(self):
        g = build_grid((4, 4, 4), 1.0)
        with pytest.raises(ValueError, match="entire domain"):
            wall_fractions(Box(lo=(-99,) * 3, hi=(99,) * 3), g, 1.0)

    def test_q0_clamped_signed_distance(self):
        g = build_grid((4, 4, 16), 0.25, bcs=("periodic", "periodic", "solid"))
        wall = wall_fractions(HalfSpace(normal=(0, 0, 1.0), point=(0, 0, 1.0)),
                              g, 0.5)
        assert np.all(wall.q0 <= 0.5 + 1e-12)
        assert np.all(wall.q0 >= -0.5 - 1e-12)
        assert wall.q0[2, 2, 0] == pytest.approx(-0.5)  # deep wall, clamped
        assert wall.q0[2, 2, -1] == pytest.approx(0.5)  # far fluid, clamped


class TestShapes:
    def test_union_intersection_complement(self):
        pts = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        s1 = Sphere(center=(0, 0, 0), radius=1.0)
        s2 = Sphere(center=(2, 0, 0), radius=1.0)
        u = Union([s1, s2])
        assert np.all(u.signed_distance(pts) < 0)
        from capflow.phase import Intersection

        inter = Intersection([s1, s2])
        assert np.all(inter.signed_distance(pts) > 0)
        comp = Complement(s1)
        assert comp.signed_distance(np.array([[0.0, 0, 0]]))[0] > 0

    def test_cylinder_distance(self):
        c = Cylinder(axis=1, center=(1.0, 2.0), radius=0.5)
        pts = np.array([[1.0, 99.0, 2.0], [2.0, -5.0, 2.0]])
        d = c.signed_distance(pts)
        assert d[0] == pytest.approx(-0.5)
        assert d[1] == pytest.approx(0.5)
