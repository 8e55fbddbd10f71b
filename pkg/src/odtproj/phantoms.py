"""Ground-truth refractive-index phantoms.

Reproducibility: all randomness comes from ``numpy.random.Generator`` seeded
with PCG64 (``np.random.default_rng(seed)``), a fully specified 64-bit PRNG,
so phantoms are bit-identical across platforms for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid3, RIVolume

__all__ = ["SpherePhantomSpec", "generate_sphere_phantom", "bead_phantom"]


@dataclass(frozen=True)
class SpherePhantomSpec:
    seed: int
    grid: Grid3
    n_spheres_range: tuple[int, int] = (2, 8)
    radius_range_um: tuple[float, float] = (0.5, 3.0)
    ri_range: tuple[float, float] = (1.36, 1.40)
    n_background: float = 1.337

    def __post_init__(self):
        lo, hi = self.n_spheres_range
        if not (0 <= lo <= hi):
            raise ValueError("n_spheres_range must satisfy 0 <= min <= max")
        rlo, rhi = self.radius_range_um
        if not (0 < rlo <= rhi):
            raise ValueError("radius_range_um must satisfy 0 < min <= max")
        if rlo < 2 * self.grid.pitch:
            raise ValueError("sphere radii must be at least 2 voxels")
        half_extent = 0.5 * min(self.grid.shape) * self.grid.pitch
        if rhi > half_extent:
            raise ValueError(
                f"max radius {rhi} um exceeds half the grid extent {half_extent} um"
            )
        nlo, nhi = self.ri_range
        if not (self.n_background <= nlo <= nhi <= self.n_background + 0.2):
            raise ValueError("ri_range must lie within [n_background, n_background + 0.2]")


def _center_distances(grid: Grid3, center_um: np.ndarray) -> np.ndarray:
    """Distance (um) from every voxel center to ``center_um`` (z, y, x order)."""
    nz, ny, nx = grid.shape
    z = np.arange(nz)[:, None, None] * grid.pitch
    y = np.arange(ny)[None, :, None] * grid.pitch
    x = np.arange(nx)[None, None, :] * grid.pitch
    return np.sqrt((z - center_um[0]) ** 2 + (y - center_um[1]) ** 2 + (x - center_um[2]) ** 2)


def generate_sphere_phantom(spec: SpherePhantomSpec) -> RIVolume:
    """Randomly placed hard-edged spheres; overlaps resolved by max RI.

    Draw order for a given seed: sphere count, then per sphere
    (center z,y,x; radius; RI). Centers are constrained so every sphere lies
    fully inside the grid, which keeps the voxel count of an isolated sphere
    close to its analytic volume.
    """
    rng = np.random.default_rng(spec.seed)
    values = np.full(spec.grid.shape, spec.n_background, dtype=np.float64)
    lo, hi = spec.n_spheres_range
    count = int(rng.integers(lo, hi + 1))
    extents = (np.array(spec.grid.shape, dtype=np.float64) - 1.0) * spec.grid.pitch
    for _ in range(count):
        radius = float(rng.uniform(*spec.radius_range_um))
        if np.any(extents - 2 * radius < 0):
            raise ValueError(f"sphere radius {radius} um does not fit in the grid")
        center = np.array([rng.uniform(radius, e - radius) for e in extents])
        ri = float(rng.uniform(*spec.ri_range))
        d = _center_distances(spec.grid, center)
        inside = d <= radius
        values[inside] = np.maximum(values[inside], ri)
    return RIVolume(spec.grid, values, spec.n_background)


def bead_phantom(grid: Grid3, radius_um: float, n_bead: float = 1.46,
                 n_background: float = 1.337) -> RIVolume:
    """Centered homogeneous bead with an anti-aliased boundary.

    Boundary voxels take the clipped signed-distance fraction
    ``clip((radius - d)/pitch + 0.5, 0, 1)`` so line profiles through the bead
    are smooth. Interior voxels are exactly ``n_bead``; exterior exactly
    ``n_background``. The bead center sits at voxel index n//2 on each axis —
    the same voxel the FFT and rotation machinery treat as the origin.
    """
    if n_bead < 1.0 or n_background < 1.0:
        raise ValueError("refractive indices must be >= 1.0")
    half_extent = 0.5 * min(grid.shape) * grid.pitch
    if not 0 < radius_um <= half_extent - grid.pitch:
        raise ValueError(f"bead radius {radius_um} um does not fit in the grid")
    center = np.array([(n // 2) * grid.pitch for n in grid.shape])
    d = _center_distances(grid, center)
    frac = np.clip((radius_um - d) / grid.pitch + 0.5, 0.0, 1.0)
    values = np.where(
        frac >= 1.0, n_bead,
        np.where(frac <= 0.0, n_background, n_background + frac * (n_bead - n_background)),
    )
    return RIVolume(grid, values, n_background)
