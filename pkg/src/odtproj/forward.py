"""Diffraction measurement model: each illumination direction samples the
potential's 3D spectrum on a half-spherical (Ewald) cap, and the per-view
samples are gridded back into a masked 3D k-space.

The wavenumber uses the in-medium convention kappa = 2*pi*n_medium/lambda —
the Ewald radius is physically set by the wavelength *in the medium*.
Detector frequency axes are the transverse axes of the target volume grid
(2*pi*fftshift(fftfreq(n, pitch))), so detector pixel (iy, ix) means transverse
frequency (ky[iy], kx[ix]).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .grids import Grid3, KSpaceVolume, RIVolume, ScatteringPotential, fft3_forward, fft3_inverse, potential_to_ri

__all__ = [
    "Optics",
    "IlluminationSet",
    "HologramSet",
    "EwaldCap",
    "circular_illumination",
    "ewald_cap_coords",
    "simulate_holograms",
    "grid_kspace",
    "rytov_reconstruct",
    "missing_cone_mask",
]


@dataclass(frozen=True)
class Optics:
    """Imaging-system constants. Defaults are typical for the instruments this
    geometry models; none are pinned by measurement."""

    wavelength_um: float = 0.532
    n_medium: float = 1.337
    na: float = 0.9

    def __post_init__(self):
        if not self.wavelength_um > 0:
            raise ValueError("wavelength must be positive")
        if not self.n_medium >= 1.0:
            raise ValueError("n_medium must be >= 1.0")
        if not 0 < self.na <= 1:
            raise ValueError("na must lie in (0, 1]")

    @property
    def kappa(self) -> float:
        """In-medium wavenumber 2*pi*n_medium/lambda (rad/um)."""
        return 2.0 * np.pi * self.n_medium / self.wavelength_um


@dataclass(frozen=True)
class IlluminationSet:
    """Unit illumination directions (one per view) plus the optics."""

    optics: Optics
    directions: np.ndarray  # (n_views, 3), columns (sx, sy, sz)

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=np.float64)
        if d.ndim != 2 or d.shape[1] != 3 or d.shape[0] < 1:
            raise ValueError("directions must be an (n_views, 3) array")
        norms = np.linalg.norm(d, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("illumination directions must be unit vectors")
        if np.min(d[:, 2]) <= 0:
            raise ValueError("transmission geometry requires positive z-components")
        if len(np.unique(np.round(d, 12), axis=0)) != d.shape[0]:
            raise ValueError("illumination directions must be distinct")
        object.__setattr__(self, "directions", d)

    @property
    def n_views(self) -> int:
        return self.directions.shape[0]

    @property
    def kappa(self) -> float:
        return self.optics.kappa


@dataclass(frozen=True)
class HologramSet:
    """Per-view complex detector-plane spectra (DC-centered, NA-limited)."""

    illumination: IlluminationSet
    frames: np.ndarray  # (n_views, ny, nx) complex
    aliasing_warning: bool = False

    def __post_init__(self):
        f = np.asarray(self.frames)
        if f.ndim != 3 or f.shape[0] != self.illumination.n_views:
            raise ValueError("frames must be (n_views, ny, nx)")
        if not np.all(np.isfinite(f)):
            raise ValueError("hologram frames must be finite")

    @property
    def detector_dims(self) -> tuple[int, int]:
        return self.frames.shape[1:]


def circular_illumination(n_views: int, tilt_deg: float, optics: Optics | None = None) -> IlluminationSet:
    """Equiangular azimuths on a cone of polar angle ``tilt_deg`` about +z."""
    if n_views < 1:
        raise ValueError("n_views must be >= 1")
    if not 0 < tilt_deg < 90:
        raise ValueError("tilt must lie strictly between 0 and 90 degrees")
    optics = optics or Optics()
    theta = np.deg2rad(tilt_deg)
    phi = 2.0 * np.pi * np.arange(n_views) / n_views
    directions = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi),
         np.full(n_views, np.cos(theta))], axis=1)
    return IlluminationSet(optics, directions)


@dataclass(frozen=True)
class EwaldCap:
    """Scattered-frequency samples of one view.

    ``kcoords[i]`` is the object frequency (kx, ky, kz) in rad/um belonging to
    detector pixel (det_iy[i], det_ix[i]).
    """

    kcoords: np.ndarray
    det_iy: np.ndarray
    det_ix: np.ndarray


def ewald_cap_coords(illum: IlluminationSet, view: int, grid: Grid3) -> EwaldCap:
    """Object-space frequencies K = k - kappa*s sampled by one view.

    k runs over forward-propagating wavevectors whose transverse part lies on
    the detector frequency grid inside the detection aperture
    (kx^2 + ky^2 <= (kappa*NA)^2), with kz = +sqrt(kappa^2 - kx^2 - ky^2).
    """
    if not 0 <= view < illum.n_views:
        raise ValueError(f"view {view} out of range (n_views={illum.n_views})")
    kappa = illum.kappa
    ky = grid.freq_axis(grid.ny)
    kx = grid.freq_axis(grid.nx)
    kyg, kxg = np.meshgrid(ky, kx, indexing="ij")
    kt2 = kxg**2 + kyg**2
    keep = kt2 <= (kappa * illum.optics.na) ** 2
    iy, ix = np.nonzero(keep)
    kxs = kxg[iy, ix]
    kys = kyg[iy, ix]
    kzs = np.sqrt(np.maximum(kappa**2 - kxs**2 - kys**2, 0.0))
    s = illum.directions[view]
    kcoords = np.stack([kxs - kappa * s[0], kys - kappa * s[1], kzs - kappa * s[2]], axis=1)
    return EwaldCap(kcoords, iy, ix)


def _sample_spectrum(spectrum: np.ndarray, grid: Grid3, kcoords: np.ndarray) -> np.ndarray:
    """Trilinear complex interpolation of a DC-centered spectrum at rad/um coords."""
    dk = grid.dk
    centers = np.array([grid.nz // 2, grid.ny // 2, grid.nx // 2], dtype=np.float64)
    # kcoords columns are (kx, ky, kz); array axes are (z, y, x)
    idx = np.stack([
        kcoords[:, 2] / dk + centers[0],
        kcoords[:, 1] / dk + centers[1],
        kcoords[:, 0] / dk + centers[2],
    ])
    re = map_coordinates(spectrum.real, idx, order=1, mode="constant", cval=0.0)
    im = map_coordinates(spectrum.imag, idx, order=1, mode="constant", cval=0.0)
    return re + 1j * im


def simulate_holograms(q: ScatteringPotential, illum: IlluminationSet) -> HologramSet:
    """Sample the potential's spectrum on each view's Ewald cap.

    Frame values are in the unitary-DFT units of :func:`fft3_forward`, i.e.
    exactly what :func:`grid_kspace` scatters back into a k-space volume.
    """
    q.grid.require_cubic()
    kappa = illum.kappa
    nyq = np.pi / q.grid.pitch
    aliasing = kappa * (1.0 + illum.optics.na) > nyq
    if aliasing:
        warnings.warn("grid pitch too coarse for the full scattered-frequency support",
                      RuntimeWarning, stacklevel=2)
    spectrum = fft3_forward(q).values
    frames = np.zeros((illum.n_views, q.grid.ny, q.grid.nx), dtype=np.complex128)
    for m in range(illum.n_views):
        cap = ewald_cap_coords(illum, m, q.grid)
        frames[m, cap.det_iy, cap.det_ix] = _sample_spectrum(spectrum, q.grid, cap.kcoords)
    return HologramSet(illum, frames, aliasing_warning=aliasing)


def grid_kspace(holograms: HologramSet, grid: Grid3) -> KSpaceVolume:
    """Scatter every cap sample to its nearest k-space voxel.

    Multiple hits on one voxel are averaged (sum of values / sum of hit
    counts, accumulated over all views before the division, so the result is
    independent of view order). The mask is 1 exactly on hit voxels.
    """
    grid.require_cubic()
    if holograms.illumination.n_views == 0 or holograms.frames.shape[0] == 0:
        raise ValueError("empty hologram set")
    if holograms.detector_dims != (grid.ny, grid.nx):
        raise ValueError(
            f"detector dims {holograms.detector_dims} do not match grid {(grid.ny, grid.nx)}")
    dk = grid.dk
    centers = np.array([grid.nz // 2, grid.ny // 2, grid.nx // 2])
    acc = np.zeros(grid.shape, dtype=np.complex128)
    hits = np.zeros(grid.shape, dtype=np.int64)
    dropped = 0
    for m in range(holograms.illumination.n_views):
        cap = ewald_cap_coords(holograms.illumination, m, grid)
        idx = np.rint(np.stack([
            cap.kcoords[:, 2] / dk + centers[0],
            cap.kcoords[:, 1] / dk + centers[1],
            cap.kcoords[:, 0] / dk + centers[2],
        ])).astype(np.int64)
        inb = np.all((idx >= 0) & (idx < np.array(grid.shape)[:, None]), axis=0)
        dropped += int(np.count_nonzero(~inb))
        vals = holograms.frames[m, cap.det_iy, cap.det_ix][inb]
        iz, iy, ix = idx[0, inb], idx[1, inb], idx[2, inb]
        np.add.at(acc, (iz, iy, ix), vals)
        np.add.at(hits, (iz, iy, ix), 1)
    if dropped:
        warnings.warn(f"{dropped} cap samples fell outside the k-space grid",
                      RuntimeWarning, stacklevel=2)
    mask = hits > 0
    values = np.where(mask, acc / np.maximum(hits, 1), 0.0 + 0.0j)
    return KSpaceVolume(grid, values, mask)


def rytov_reconstruct(k: KSpaceVolume, wavelength_um: float, n_background: float) -> RIVolume:
    """Direct inverse transform of the zero-filled k-space (no constraints)."""
    p = fft3_inverse(k)
    return potential_to_ri(ScatteringPotential(k.grid, p.values.real), wavelength_um, n_background)


def missing_cone_mask(grid: Grid3, tilt_deg: float, guard_voxels: float = 1.0) -> np.ndarray:
    """Boolean mask of the analytically unmeasured double cone around kz.

    A circularly illuminated cap never reaches object frequencies with
    |Kz| > |Kt| * cot(tilt); the guard band (in frequency voxels) keeps
    nearest-voxel gridding jitter of boundary samples out of the cone.
    """
    grid.require_cubic()
    kz, ky, kx = grid.freqs()
    kzg = kz[:, None, None]
    kt = np.sqrt(ky[None, :, None] ** 2 + kx[None, None, :] ** 2)
    cot = 1.0 / np.tan(np.deg2rad(tilt_deg))
    guard = guard_voxels * grid.dk
    return np.abs(kzg) > (kt + guard) * cot + guard
