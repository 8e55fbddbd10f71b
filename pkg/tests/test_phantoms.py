import numpy as np
import pytest

from odtproj import Grid3, SpherePhantomSpec, bead_phantom, generate_sphere_phantom


def test_zero_spheres_is_uniform_background():
    g = Grid3(32, 32, 32)
    spec = SpherePhantomSpec(seed=0, grid=g, n_spheres_range=(0, 0),
                             radius_range_um=(0.4, 1.2))
    vol = generate_sphere_phantom(spec)
    assert np.all(vol.values == 1.337)


def test_same_seed_bitwise_identical():
    g = Grid3(32, 32, 32)
    spec = SpherePhantomSpec(seed=42, grid=g, radius_range_um=(0.4, 1.2))
    a = generate_sphere_phantom(spec)
    b = generate_sphere_phantom(spec)
    assert np.array_equal(a.values, b.values)


def test_different_seeds_differ():
    g = Grid3(32, 32, 32)
    a = generate_sphere_phantom(SpherePhantomSpec(seed=1, grid=g, radius_range_um=(0.4, 1.2)))
    b = generate_sphere_phantom(SpherePhantomSpec(seed=2, grid=g, radius_range_um=(0.4, 1.2)))
    assert not np.array_equal(a.values, b.values)


def test_single_sphere_voxel_count_matches_analytic_volume():
    g = Grid3(64, 64, 64, 0.1)
    r = 1.0  # 10 voxels
    spec = SpherePhantomSpec(seed=7, grid=g, n_spheres_range=(1, 1),
                             radius_range_um=(r, r))
    vol = generate_sphere_phantom(spec)
    count = int(np.sum(vol.values > spec.n_background))
    analytic = (4.0 / 3.0) * np.pi * r ** 3 / g.pitch ** 3
    assert abs(count - analytic) / analytic < 0.05


def test_phantom_bounds():
    g = Grid3(48, 48, 48)
    spec = SpherePhantomSpec(seed=3, grid=g, n_spheres_range=(4, 6),
                             radius_range_um=(0.4, 1.0), ri_range=(1.36, 1.40))
    vol = generate_sphere_phantom(spec)
    assert vol.values.min() == spec.n_background
    assert vol.values.max() <= 1.40


def test_oversized_radius_rejected():
    g = Grid3(16, 16, 16, 0.1)
    with pytest.raises(ValueError):
        SpherePhantomSpec(seed=0, grid=g, radius_range_um=(0.9, 0.9))


def test_invalid_ranges_rejected():
    g = Grid3(32, 32, 32)
    with pytest.raises(ValueError):
        SpherePhantomSpec(seed=0, grid=g, n_spheres_range=(3, 1),
                          radius_range_um=(0.4, 1.2))
    with pytest.raises(ValueError):
        SpherePhantomSpec(seed=0, grid=g, ri_range=(1.30, 1.40),
                          radius_range_um=(0.4, 1.2))
    with pytest.raises(ValueError):
        SpherePhantomSpec(seed=0, grid=g, ri_range=(1.40, 1.60),
                          radius_range_um=(0.4, 1.2))


def test_bead_equal_indices_is_uniform():
    g = Grid3(32, 32, 32)
    vol = bead_phantom(g, 0.8, n_bead=1.40, n_background=1.40)
    assert np.all(vol.values == 1.40)


def test_bead_interior_value_exact():
    # interior voxels are exactly the bead RI of 1.46
    g = Grid3(64, 64, 64, 0.1)
    vol = bead_phantom(g, 1.2, 1.46, 1.337)
    c = 32
    assert vol.values[c, c, c] == 1.46
    assert vol.values[0, 0, 0] == 1.337
    assert vol.values.max() == 1.46


def test_bead_interior_mean():
    g = Grid3(64, 64, 64, 0.1)
    r = 1.2  # 12 voxels
    vol = bead_phantom(g, r, 1.46, 1.337)
    idx = np.arange(64) - 32
    d = g.pitch * np.sqrt(idx[:, None, None] ** 2 + idx[None, :, None] ** 2
                          + idx[None, None, :] ** 2)
    interior = d <= r - g.pitch
    assert abs(vol.values[interior].mean() - 1.46) < 1e-3


def test_bead_edge_is_antialiased():
    g = Grid3(64, 64, 64, 0.1)
    vol = bead_phantom(g, 1.2, 1.46, 1.337)
    partial = (vol.values > 1.337) & (vol.values < 1.46)
    assert partial.sum() > 0


def test_bead_radius_must_fit():
    g = Grid3(32, 32, 32, 0.1)
    with pytest.raises(ValueError):
        bead_phantom(g, 1.7)
