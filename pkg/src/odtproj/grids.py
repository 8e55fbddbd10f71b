"""Core 3D grid/volume types and the Fourier-transform pair shared by every
reconstruction algorithm.

Conventions fixed here and relied on everywhere else:

* arrays are indexed ``[z, y, x]`` (z slowest, x fastest — same as on disk)
* k-space arrays are DC-centered: zero frequency lives at index ``n // 2``
  on each axis, and frequency samples are ``2*pi*fftshift(fftfreq(n, pitch))``
  in rad/um
* the transform pair is unitary (each direction carries ``N**-1.5``), so the
  inverse transform is also the exact adjoint of the forward one
* the scattering potential is ``q = k0**2 * (n**2 - n_m**2)`` with
  ``k0 = 2*pi/wavelength`` (free-space), q in rad^2/um^2.  This formula is a
  deliberate convention choice: it is the standard weak-scattering potential
  and is the exact inverse of :func:`potential_to_ri`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid3",
    "RIVolume",
    "ScatteringPotential",
    "KSpaceVolume",
    "fft3_forward",
    "fft3_inverse",
    "ri_to_potential",
    "potential_to_ri",
]


@dataclass(frozen=True)
class Grid3:
    """Isotropic voxel grid. ``pitch`` is the voxel edge length in micrometers."""

    nx: int
    ny: int
    nz: int
    pitch: float = 0.1

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if not (isinstance(n, (int, np.integer)) and n >= 8):
                raise ValueError(f"{name} must be an integer >= 8, got {n!r}")
        if not self.pitch > 0:
            raise ValueError(f"pitch must be positive, got {self.pitch!r}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nz, self.ny, self.nx)

    @property
    def is_cubic(self) -> bool:
        return self.nx == self.ny == self.nz

    def freq_axis(self, n: int) -> np.ndarray:
        """DC-centered angular frequency samples (rad/um) for an n-point axis."""
        return 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, d=self.pitch))

    def freqs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(kz, ky, kx) 1D frequency axes in rad/um, DC at index n//2."""
        return (self.freq_axis(self.nz), self.freq_axis(self.ny), self.freq_axis(self.nx))

    @property
    def dk(self) -> float:
        """Frequency spacing (rad/um) of a cubic grid."""
        self.require_cubic()
        return 2.0 * np.pi / (self.nx * self.pitch)

    def require_cubic(self):
        if not self.is_cubic:
            raise ValueError(f"cubic grid required, got {self.shape}")


def _check_shape(grid: Grid3, values: np.ndarray, what: str):
    if values.shape != grid.shape:
        raise ValueError(f"{what} shape {values.shape} does not match grid {grid.shape}")


@dataclass(frozen=True)
class RIVolume:
    """Real refractive-index volume.

    Physical volumes (phantoms, measured samples) satisfy ``values >= 1.0``;
    reconstruction outputs may undershoot the background and are stored
    unclamped, so the physical bound is checked where volumes are *produced*
    (phantom generators, :func:`ri_to_potential`), not here.
    """

    grid: Grid3
    values: np.ndarray
    n_background: float = 1.337

    def __post_init__(self):
        _check_shape(self.grid, self.values, "RI values")
        if np.iscomplexobj(self.values):
            raise ValueError("RI values must be real")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("RI values must be finite")
        if not self.n_background >= 1.0:
            raise ValueError("n_background must be >= 1.0")

    def contrast(self) -> np.ndarray:
        """values - n_background (what projection operates on)."""
        return self.values - self.n_background


@dataclass(frozen=True)
class ScatteringPotential:
    """Scattering potential q in rad^2/um^2.

    Nominally real; complex values appear when carrying the raw adjoint
    of a non-Hermitian k-space (constraint steps take the real part).
    """

    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        _check_shape(self.grid, self.values, "potential values")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("potential values must be finite")

    @property
    def real(self) -> np.ndarray:
        return np.real(self.values)


@dataclass(frozen=True)
class KSpaceVolume:
    """DC-centered complex 3D spectrum plus the binary sampling mask.

    Immediately after gridding, values are zero wherever mask == 0.
    Hermitian symmetry is *not* assumed (complex potentials permitted).
    """

    grid: Grid3
    values: np.ndarray
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        _check_shape(self.grid, self.values, "k-space values")
        if self.mask is None:
            object.__setattr__(self, "mask", np.ones(self.grid.shape, dtype=bool))
        _check_shape(self.grid, self.mask, "k-space mask")
        m = np.asarray(self.mask)
        if m.dtype != bool:
            u = np.unique(m)
            if not np.all(np.isin(u, (0, 1))):
                raise ValueError("mask must be binary")
            object.__setattr__(self, "mask", m.astype(bool))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("k-space values must be finite")


def _centered_fftn(values: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(values), norm="ortho"))


def _centered_ifftn(values: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(values), norm="ortho"))


def fft3_forward(p: ScatteringPotential) -> KSpaceVolume:
    """Unitary DC-centered 3D FFT of a potential; full (all-ones) mask."""
    p.grid.require_cubic()
    if not np.all(np.isfinite(p.values)):
        raise ValueError("non-finite input to fft3_forward")
    return KSpaceVolume(p.grid, _centered_fftn(p.values))


def fft3_inverse(k: KSpaceVolume) -> ScatteringPotential:
    """Unitary inverse (== adjoint) transform.

    The returned potential carries the complex result; constraint steps use
    ``.real``.
    """
    k.grid.require_cubic()
    return ScatteringPotential(k.grid, _centered_ifftn(k.values))


def ri_to_potential(ri: RIVolume, wavelength_um: float) -> ScatteringPotential:
    """q = k0^2 (n^2 - n_m^2), k0 = 2*pi/wavelength (free space)."""
    if not wavelength_um > 0:
        raise ValueError("wavelength must be positive")
    if np.min(ri.values) < 1.0:
        raise ValueError("refractive index below 1.0 is not physical")
    k0 = 2.0 * np.pi / wavelength_um
    q = k0 * k0 * (ri.values.astype(np.float64) ** 2 - ri.n_background**2)
    return ScatteringPotential(ri.grid, q)


def potential_to_ri(q: ScatteringPotential, wavelength_um: float, n_background: float) -> RIVolume:
    """n = sqrt(n_m^2 + q / k0^2); values below n_background are returned unclamped."""
    if not wavelength_um > 0:
        raise ValueError("wavelength must be positive")
    if not n_background >= 1.0:
        raise ValueError("n_background must be >= 1.0")
    if np.iscomplexobj(q.values):
        raise ValueError("potential_to_ri needs a real potential (take .real first)")
    k0 = 2.0 * np.pi / wavelength_um
    radicand = n_background**2 + q.values / (k0 * k0)
    if np.min(radicand) < 0:
        raise ValueError(
            f"non-physical potential: n^2 would reach {np.min(radicand):.3g} < 0"
        )
    return RIVolume(q.grid, np.sqrt(radicand), n_background)
