"""Grids, transforms, rescaling, and the snapshot container."""

import numpy as np
import pytest

from nlslab import (
    Field,
    GaussianBump,
    PlaneWave,
    RoughRandom,
    change_resolution,
    generate,
    load_field,
    make_grid,
    mass,
    rescale,
    save_field,
    to_physical,
    to_spectral,
    transform,
)
from nlslab.grid import Grid


class TestMakeGrid:
    def test_integer_lattice_for_2pi_box(self):
        g = make_grid(2, 8, 2 * np.pi)
        assert g.n_points == 64
        assert sorted(g.freq_1d.tolist()) == [-4, -3, -2, -1, 0, 1, 2, 3]

    def test_lattice_spacing(self):
        g = make_grid(3, 16, 10.0)
        assert g.n_points == 4096
        assert np.isclose(np.diff(np.sort(g.freq_1d)).max(), 2 * np.pi / 10.0)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            make_grid(2, 7, 1.0)
        with pytest.raises(ValueError, match="power of two"):
            make_grid(2, 48, 1.0)

    def test_rejects_bad_dim_and_size(self):
        with pytest.raises(ValueError):
            make_grid(1, 8, 1.0)
        with pytest.raises(ValueError):
            make_grid(4, 8, 1.0)
        with pytest.raises(ValueError):
            make_grid(2, 4, 1.0)
        with pytest.raises(ValueError):
            make_grid(2, 8, -1.0)


class TestTransform:
    def test_round_trip(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 3))
        back = transform(transform(f, "physical"), "spectral")
        ref = np.max(np.abs(f.values))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * ref

    def test_idempotent(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.5, 1.0, 3))
        assert transform(f, "spectral") is f

    def test_constant_field_concentrates_at_zero(self):
        g = make_grid(2, 16, 2 * np.pi)
        c = 2.0 - 1.0j
        f = Field(g, np.full(g.shape, c), "physical")
        spec = to_spectral(f).values
        assert abs(spec[0, 0] - c * 16.0) < 1e-12  # c * M^(dim/2)
        spec[0, 0] = 0.0
        assert np.max(np.abs(spec)) < 1e-12

    def test_plane_wave_single_coefficient(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = to_physical(generate(g, PlaneWave((5, -3), 1.0 + 2.0j)))
        spec = to_spectral(f).values
        nz = np.argwhere(np.abs(spec) > 1e-9)
        assert len(nz) == 1

    def test_unitarity(self):
        g = make_grid(3, 8, 5.0)
        f = generate(g, RoughRandom(0.6, 2.0, 9))
        m_spec = mass(f)
        m_phys = mass(to_physical(f))
        assert abs(m_spec - m_phys) <= 1e-12 * m_spec


class TestRescale:
    def test_identity(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 1))
        r = rescale(f, 1)
        assert r.grid == g
        assert np.array_equal(r.values, f.values)

    def test_l2_invariance_dim2(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, GaussianBump(0.6, 1.3))
        assert abs(mass(rescale(f, 2)) - mass(f)) <= 1e-12 * mass(f)

    def test_l2_scaling_dim3(self):
        g = make_grid(3, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.9, 1.0, 4))
        # ||(1/lam) phi(x/lam)||_L2^2 = lam^(dim-2) ||phi||^2
        assert abs(mass(rescale(f, 2)) - np.sqrt(2.0) * mass(f)) <= 1e-12 * mass(f)

    def test_plane_wave_relocation(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, PlaneWave((4, -6), 2.0))
        r = to_spectral(rescale(f, 2))
        nz = np.argwhere(np.abs(r.values) > 1e-9)
        assert len(nz) == 1
        # index (4, -6) on the doubled lattice means frequency (2, -3)
        assert tuple(nz[0]) == (4, 64 - 6)
        # amplitude halves: coefficient = (A/2) * (2M)^(dim/2)
        assert abs(r.values[4, 64 - 6] - (2.0 / 2.0) * 64.0) < 1e-9

    def test_matches_analytic_dilation_of_bump(self):
        g = make_grid(2, 64, 2 * np.pi)
        width, amp = 0.45, 1.1
        f = generate(g, GaussianBump(width, amp))
        lam = 2
        r = to_physical(rescale(f, lam))
        # (1/lam) phi(x/lam) is the bump with lam times the width and center,
        # amplitude amp/lam, evaluated directly on the large grid
        direct = generate(
            r.grid, GaussianBump(lam * width, amp / lam, center=(lam * np.pi, lam * np.pi))
        )
        err = np.max(np.abs(r.values - direct.values))
        assert err < 1e-9 * amp

    def test_rejects_non_integer(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 1))
        with pytest.raises(ValueError, match="integer"):
            rescale(f, 1.5)
        with pytest.raises(ValueError):
            rescale(f, 0)

    def test_grid_cap(self):
        g = make_grid(2, 64, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 1))
        with pytest.raises(ValueError, match="cap"):
            rescale(f, 64, point_cap=2**20)


class TestChangeResolution:
    def test_extension_preserves_values_and_mass(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, PlaneWave((3, 1), 1.0 - 0.5j))
        up = change_resolution(f, 48)
        assert abs(mass(up) - mass(f)) < 1e-12
        phys_small = to_physical(f).values
        phys_big = to_physical(up).values
        assert np.max(np.abs(phys_big[::3, ::3] - phys_small)) < 1e-12

    def test_truncation_exact_for_band_limited(self):
        g = make_grid(2, 64, 2 * np.pi)
        f = generate(g, PlaneWave((2, -2), 0.7))
        down = change_resolution(f, 16)
        assert abs(mass(down) - mass(f)) < 1e-12


class TestSnapshotFile:
    def test_round_trip(self, tmp_path):
        g = make_grid(3, 8, 3.5)
        f = generate(g, RoughRandom(0.8, 1.5, 17))
        path = tmp_path / "field.npz"
        save_field(path, f)
        back = load_field(path)
        assert back.grid == g
        assert back.space_tag == f.space_tag
        assert np.array_equal(back.values, f.values)


class TestGridProperties:
    def test_dealias_cutoff_indices(self):
        g = make_grid(2, 256, 2 * np.pi)
        assert g.dealias_index_cutoff == 85
        keep = g.dealias_keep
        assert keep[85, 0] == 1 and keep[86, 0] == 0
        assert keep[0, 256 - 85] == 1 and keep[0, 256 - 86] == 0

    def test_rescaled_grid_allows_non_power_of_two(self):
        # rescale by 3 produces 24 points per axis; the Grid type accepts it
        g = Grid(2, 24, 6.0)
        assert g.points_per_axis == 24
