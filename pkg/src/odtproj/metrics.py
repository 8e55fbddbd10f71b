"""Quantitative evaluation: PSNR, 3D SSIM, RI histograms and line profiles.

PSNR peak is the reference volume's dynamic range (max - min) — RI volumes
are not 8-bit, so a fixed peak would be meaningless. SSIM uses true 3D
Gaussian-weighted windows (the least arbitrary reading for volumetric data)
with reflect boundary handling.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve

from .grids import RIVolume

__all__ = ["psnr", "ssim", "ri_histogram", "line_profile"]

_AXIS_DIM = {"z": 0, "y": 1, "x": 2}


def _check_grids(test: RIVolume, reference: RIVolume):
    if test.grid != reference.grid:
        raise ValueError(f"grid mismatch: {test.grid} vs {reference.grid}")


def psnr(test: RIVolume, reference: RIVolume) -> float:
    """10*log10(peak^2 / MSE) in dB, peak = reference max - min; inf if equal."""
    _check_grids(test, reference)
    mse = float(np.mean((test.values - reference.values) ** 2))
    if mse == 0.0:
        return float("inf")
    peak = float(reference.values.max() - reference.values.min())
    return 10.0 * np.log10(peak * peak / mse)


def _gaussian_kernel3(window: int, sigma: float) -> np.ndarray:
    half = window // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g1 = np.exp(-0.5 * (ax / sigma) ** 2)
    k = g1[:, None, None] * g1[None, :, None] * g1[None, None, :]
    return k / k.sum()


def ssim(test: RIVolume, reference: RIVolume, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean of local SSIM over 3D Gaussian-weighted windows."""
    _check_grids(test, reference)
    if window % 2 != 1 or window < 3:
        raise ValueError("window must be an odd integer >= 3")
    x = test.values.astype(np.float64)
    y = reference.values.astype(np.float64)
    dyn = float(y.max() - y.min())
    if dyn == 0.0:
        dyn = 1.0
    c1 = (k1 * dyn) ** 2
    c2 = (k2 * dyn) ** 2
    kern = _gaussian_kernel3(window, sigma)

    def w(a):
        return convolve(a, kern, mode="reflect")

    mx = w(x)
    my = w(y)
    vx = w(x * x) - mx * mx
    vy = w(y * y) - my * my
    cxy = w(x * y) - mx * my
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def ri_histogram(v: RIVolume, bins: int, value_range: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """(counts, bin_edges); values outside the range are clipped into the edge bins."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = value_range
    if not hi > lo:
        raise ValueError("range must be increasing")
    counts, edges = np.histogram(np.clip(v.values, lo, hi), bins=bins, range=(lo, hi))
    return counts, edges


def line_profile(v: RIVolume, axis: str = "x", fixed: tuple[int, int] | None = None) -> np.ndarray:
    """1D slice along ``axis``; ``fixed`` gives the other two coordinates in
    (z, y, x) order with the profiled axis removed. Defaults to the volume
    center (n//2 on each axis)."""
    if axis not in _AXIS_DIM:
        raise ValueError(f"axis must be one of {sorted(_AXIS_DIM)}")
    dim = _AXIS_DIM[axis]
    others = [d for d in range(3) if d != dim]
    if fixed is None:
        fixed = tuple(v.grid.shape[d] // 2 for d in others)
    if len(fixed) != 2:
        raise ValueError("fixed must give exactly two coordinates")
    for d, c in zip(others, fixed):
        if not 0 <= c < v.grid.shape[d]:
            raise ValueError(f"coordinate {c} out of range for dim {d}")
    index: list = [slice(None)] * 3
    index[others[0]] = fixed[0]
    index[others[1]] = fixed[1]
    return v.values[tuple(index)].copy()
