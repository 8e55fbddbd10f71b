"""Parallel-beam projection at arbitrary angles about a coordinate axis,
ramp-filtered backprojection, and the equiangular full-circle schedule.

Geometry conventions (arrays are [z, y, x]):

  rotation axis   frame layout [row, col]   in-plane coords (u, v), ray at 0 deg
  ------------- | ----------------------- | ----------------------------------
       Z        |        [z, y]           |  u = y, v = x   (ray along x)
       Y        |        [y, x]           |  u = x, v = z   (ray along z)
       X        |        [x, y]           |  u = y, v = z   (ray along z)

A frame row index is the coordinate along the rotation axis; the column is
the in-plane detector coordinate, which is also the axis the ramp filter
runs along. Projection at angle phi resamples the volume by rotating its
content by -phi about the axis (trilinear, zero outside) and sums along the
fixed ray direction v; angle 0 takes the exact no-resampling path.
Projections are of the RI contrast (n - n_background), not raw n.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grids import Grid3, RIVolume

__all__ = [
    "Axis",
    "Provenance",
    "ProjectionStack",
    "rotate_about_axis",
    "parallel_project",
    "project_schedule",
    "ramp_filter",
    "fbp",
    "fbp_three_axis",
    "split_schedule",
]


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"


class Provenance(str, Enum):
    MEASURED = "measured_angles"
    MISSING = "missing_angles"
    ENHANCED = "enhanced"
    SCHEDULE = "schedule"


# (transpose to [other, u, v], inverse transpose) per rotation axis
_PLANE = {
    Axis.Z: ((0, 1, 2), (0, 1, 2)),
    Axis.Y: ((1, 2, 0), (2, 0, 1)),
    Axis.X: ((2, 1, 0), (2, 1, 0)),
}


@dataclass(frozen=True)
class ProjectionStack:
    axis: Axis
    angles_deg: np.ndarray
    frames: np.ndarray  # (n_angles, h, w) float
    pitch_um: float
    provenance: Provenance = Provenance.SCHEDULE

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        a = np.asarray(self.angles_deg, dtype=np.float64)
        f = np.asarray(self.frames)
        if f.ndim != 3:
            raise ValueError("frames must be a (n_angles, h, w) array")
        if a.ndim != 1 or a.shape[0] != f.shape[0] or a.shape[0] < 1:
            raise ValueError("angle count must match frame count (and be >= 1)")
        if np.any(a < 0) or np.any(a >= 360):
            raise ValueError("angles must lie in [0, 360)")
        if np.any(np.diff(a) <= 0):
            raise ValueError("angles must be strictly increasing")
        if not np.all(np.isfinite(f)):
            raise ValueError("frames must be finite")
        if not self.pitch_um > 0:
            raise ValueError("pitch must be positive")
        object.__setattr__(self, "angles_deg", a)
        object.__setattr__(self, "frames", f)

    @property
    def n_angles(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_dims(self) -> tuple[int, int]:
        return self.frames.shape[1:]


def _inplane_source_coords(n: int, angle_rad: float):
    """Source (u_s, v_s) for every output in-plane position under the
    rotation gather R = [[cos, -sin], [sin, cos]] about center n//2."""
    c = n // 2
    u = np.arange(n, dtype=np.float64)[:, None] - c
    v = np.arange(n, dtype=np.float64)[None, :] - c
    cs, sn = np.cos(angle_rad), np.sin(angle_rad)
    return c + cs * u - sn * v, c + sn * u + cs * v


def _bilinear_gather_plane(vol_ouv: np.ndarray, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Sample vol[:, u, v] bilinearly at (us, vs), zero outside the grid."""
    n_other, nu, nv = vol_ouv.shape
    flat = vol_ouv.reshape(n_other, nu * nv)
    i0 = np.floor(us).astype(np.int64)
    j0 = np.floor(vs).astype(np.int64)
    fu = us - i0
    fv = vs - j0
    out = np.zeros((n_other,) + us.shape, dtype=np.float64)
    for di, dj, w in ((0, 0, (1 - fu) * (1 - fv)), (0, 1, (1 - fu) * fv),
                      (1, 0, fu * (1 - fv)), (1, 1, fu * fv)):
        ii = i0 + di
        jj = j0 + dj
        ok = (ii >= 0) & (ii < nu) & (jj >= 0) & (jj < nv)
        lin = np.where(ok, ii * nv + jj, 0).ravel()
        out += (w * ok) * flat[:, lin].reshape((n_other,) + us.shape)
    return out


def rotate_about_axis(values: np.ndarray, axis: Axis, angle_deg: float) -> np.ndarray:
    """In-plane bilinear resampling that composes with the projector's angle:
    ``parallel_project on rotate_about_axis(v, ax, delta) at angle phi`` equals
    ``parallel_project on v at angle phi + delta`` (up to interpolation)."""
    axis = Axis(axis)
    if values.ndim != 3 or len(set(values.shape)) != 1:
        raise ValueError("cubic volume required")
    fwd, inv = _PLANE[axis]
    vol = np.transpose(values, fwd)
    us, vs = _inplane_source_coords(vol.shape[1], np.deg2rad(angle_deg))
    return np.transpose(_bilinear_gather_plane(vol, us, vs), inv)


def parallel_project(v: RIVolume, axis: Axis, angle_deg: float) -> np.ndarray:
    """One parallel-beam projection frame of the RI contrast."""
    v.grid.require_cubic()
    axis = Axis(axis)
    fwd, _ = _PLANE[axis]
    vol = np.transpose(v.contrast(), fwd)
    if angle_deg % 360.0 == 0.0:
        return vol.sum(axis=2)
    us, vs = _inplane_source_coords(vol.shape[1], np.deg2rad(angle_deg))
    return _bilinear_gather_plane(vol, us, vs).sum(axis=2)


def project_schedule(v: RIVolume, axis: Axis, n_angles: int = 360) -> ProjectionStack:
    """Equiangular frames at k*(360/n_angles), k = 0..n_angles-1."""
    if n_angles < 2:
        raise ValueError("n_angles must be >= 2")
    angles = np.arange(n_angles, dtype=np.float64) * (360.0 / n_angles)
    frames = np.stack([parallel_project(v, axis, a) for a in angles])
    return ProjectionStack(Axis(axis), angles, frames, v.grid.pitch, Provenance.SCHEDULE)


def ramp_filter(frame: np.ndarray, window: str = "none") -> np.ndarray:
    """Per-row |f| filtering along the detector (last) axis.

    f is in cycles/sample; the DC bin is zeroed by |0|. window="hann"
    multiplies by 0.5*(1 + cos(2*pi*f)).
    """
    if window not in ("none", "hann"):
        raise ValueError(f"unknown ramp window {window!r}")
    if not np.all(np.isfinite(frame)):
        raise ValueError("frame must be finite")
    n = frame.shape[-1]
    f = np.fft.fftfreq(n)
    filt = np.abs(f)
    if window == "hann":
        filt = filt * 0.5 * (1.0 + np.cos(2.0 * np.pi * f))
    return np.fft.ifft(np.fft.fft(frame, axis=-1) * filt, axis=-1).real


def _check_equiangular(angles_deg: np.ndarray) -> float:
    d = np.diff(angles_deg)
    if not np.allclose(d, d[0], atol=1e-9):
        raise ValueError("fbp requires an equiangular schedule")
    return float(d[0])


def fbp(stack: ProjectionStack, n_background: float = 1.337, window: str = "none") -> RIVolume:
    """Filtered backprojection of an equiangular stack.

    Rows are zero-padded to >= 4x their length before ramp filtering so the
    circular convolution wrap and the zeroed-DC-bin offset of the discrete
    ramp become negligible (the usual FBP padding trick).

    Scale: pi / (2 * angles-per-half-turn). For the usual full-circle
    schedule (each ray direction covered twice) this equals pi/n_angles;
    for a half-circle schedule it is the classic pi/n_angles as well.
    """
    if stack.n_angles < 2:
        raise ValueError("fbp needs at least 2 angles")
    h, w = stack.frame_dims
    if h != w:
        raise ValueError(f"fbp needs square frames, got {stack.frame_dims}")
    _check_equiangular(stack.angles_deg)
    n = h
    fwd, inv = _PLANE[Axis(stack.axis)]
    c = n // 2
    u = np.arange(n, dtype=np.float64)[:, None] - c
    v = np.arange(n, dtype=np.float64)[None, :] - c
    acc = np.zeros((n, n, n), dtype=np.float64)  # [other, u, v]
    pad_len = 1 << int(np.ceil(np.log2(4 * n)))
    padded = np.zeros((n, pad_len), dtype=np.float64)
    for angle_deg, frame in zip(stack.angles_deg, stack.frames):
        padded[:, :n] = frame
        g = ramp_filter(padded, window=window)[:, :n]
        a = np.deg2rad(angle_deg)
        # detector coordinate of voxel (u, v): u-component of R(-phi) (p - c)
        t = c + np.cos(a) * u + np.sin(a) * v
        i0 = np.floor(t).astype(np.int64)
        ft = t - i0
        for di, wt in ((0, 1.0 - ft), (1, ft)):
            ii = i0 + di
            ok = (ii >= 0) & (ii < n)
            lin = np.where(ok, ii, 0).ravel()
            acc += (wt * ok) * g[:, lin].reshape((n,) + t.shape)
    contrast = np.transpose(acc, inv) * (np.pi / stack.n_angles)
    grid = Grid3(n, n, n, stack.pitch_um)
    return RIVolume(grid, contrast + n_background, n_background)


def fbp_three_axis(vx: RIVolume, vy: RIVolume, vz: RIVolume) -> RIVolume:
    """Voxelwise mean of the three per-axis reconstructions."""
    vols = (vx, vy, vz)
    if len({v.grid for v in vols}) != 1:
        raise ValueError("grids must be identical")
    if len({v.n_background for v in vols}) != 1:
        raise ValueError("n_background must be identical")
    mean = (vx.values + vy.values + vz.values) / 3.0
    return RIVolume(vx.grid, mean, vx.n_background)


def merge_stacks(a: ProjectionStack, b: ProjectionStack,
                 provenance: Provenance = Provenance.ENHANCED) -> ProjectionStack:
    """Interleave two sub-stacks back into one angle-sorted stack.

    The inputs must share axis, pitch and frame dims and have disjoint angles.
    """
    if Axis(a.axis) is not Axis(b.axis):
        raise ValueError("stacks rotate about different axes")
    if a.pitch_um != b.pitch_um or a.frame_dims != b.frame_dims:
        raise ValueError("stacks have mismatched geometry")
    angles = np.concatenate([a.angles_deg, b.angles_deg])
    if len(np.unique(angles)) != angles.size:
        raise ValueError("stacks share angles")
    frames = np.concatenate([a.frames, b.frames])
    order = np.argsort(angles)
    return ProjectionStack(a.axis, angles[order], frames[order], a.pitch_um, provenance)


def split_schedule(stack: ProjectionStack, tilt_deg: float, margin_deg: float = 0.0):
    """Split a full schedule into measured-angle and missing-angle sub-stacks.

    For rotation about X or Y, a projection at angle phi is fully covered by
    the measured part of k-space when the angular distance of (phi mod 180)
    from 0 is at most tilt_deg; margin_deg shrinks the measured set. About Z
    every projection plane contains the optical axis, so everything lands in
    the missing set. Returns (measured, missing); either may be None.
    """
    a = stack.angles_deg % 180.0
    dist = np.minimum(a, 180.0 - a)
    if Axis(stack.axis) is Axis.Z:
        measured_sel = np.zeros(stack.n_angles, dtype=bool)
    else:
        measured_sel = dist <= (tilt_deg - margin_deg)

    def _sub(sel: np.ndarray, prov: Provenance):
        if not np.any(sel):
            return None
        return ProjectionStack(stack.axis, stack.angles_deg[sel], stack.frames[sel],
                               stack.pitch_um, prov)

    return _sub(measured_sel, Provenance.MEASURED), _sub(~measured_sel, Provenance.MISSING)
