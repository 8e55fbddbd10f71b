import numpy as np
import pytest

from odtproj import (
    Grid3,
    GpConfig,
    Optics,
    bead_phantom,
    circular_illumination,
    generate_sphere_phantom,
    gp_reconstruct,
    grid_kspace,
    ri_to_potential,
    rytov_reconstruct,
    simulate_holograms,
    SpherePhantomSpec,
)

# Shared simulation fixtures. The bead and the two-sphere phantom drive most
# reconstruction tests; building them once keeps the suite fast.


@pytest.fixture(scope="session")
def optics():
    return Optics()


@pytest.fixture(scope="session")
def grid64():
    return Grid3(64, 64, 64, 0.1)


@pytest.fixture(scope="session")
def bead64(grid64):
    # small enough that the missing-cone PSF (not the bead diameter)
    # dominates the reconstructed widths
    return bead_phantom(grid64, radius_um=0.4, n_bead=1.46, n_background=1.337)


@pytest.fixture(scope="session")
def bead64_interior(grid64):
    # the analytic bead support (d <= radius), the "in-bead" region
    idx = np.arange(64) - 32.0
    d = grid64.pitch * np.sqrt(idx[:, None, None] ** 2 + idx[None, :, None] ** 2
                               + idx[None, None, :] ** 2)
    return d <= 0.4


@pytest.fixture(scope="session")
def illum49(optics):
    return circular_illumination(49, 45.0, optics)


@pytest.fixture(scope="session")
def bead_measured(bead64, illum49, optics, grid64):
    q = ri_to_potential(bead64, optics.wavelength_um)
    return grid_kspace(simulate_holograms(q, illum49), grid64)


@pytest.fixture(scope="session")
def bead_rytov(bead_measured, optics):
    return rytov_reconstruct(bead_measured, optics.wavelength_um, 1.337)


@pytest.fixture(scope="session")
def bead_gp(bead_measured, optics):
    return gp_reconstruct(bead_measured, GpConfig(), optics)


@pytest.fixture(scope="session")
def twosphere64(grid64):
    spec = SpherePhantomSpec(seed=5, grid=grid64, n_spheres_range=(2, 2),
                             radius_range_um=(1.2, 2.2), ri_range=(1.36, 1.40))
    return generate_sphere_phantom(spec)


@pytest.fixture(scope="session")
def twosphere_measured(twosphere64, illum49, optics, grid64):
    q = ri_to_potential(twosphere64, optics.wavelength_um)
    return grid_kspace(simulate_holograms(q, illum49), grid64)


def fwhm(profile: np.ndarray, background: float) -> float:
    """Full width at half of (peak - background), by linear interpolation."""
    prof = np.asarray(profile, dtype=float) - background
    half = 0.5 * prof.max()
    above = np.nonzero(prof >= half)[0]
    if above.size == 0:
        return 0.0
    lo, hi = int(above[0]), int(above[-1])
    left = float(lo)
    if lo > 0:
        left = lo - 1 + (half - prof[lo - 1]) / (prof[lo] - prof[lo - 1])
    right = float(hi)
    if hi < prof.size - 1:
        right = hi + (half - prof[hi]) / (prof[hi + 1] - prof[hi])
    return float(right - left)
