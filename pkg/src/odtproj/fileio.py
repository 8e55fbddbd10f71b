"""Bit-exact file formats shared across tools and with external enhancers.

VOLF volume:  <stem>.volf.json sidecar {name, dtype: "f32"|"c64",
              dims: [nz, ny, nx], pitch_um, n_background} plus
              <stem>.volf.raw, little-endian, z-major (z slowest, x fastest);
              complex stored as interleaved (re, im) float32 pairs.
              k-space volumes additionally carry <stem>.mask.volf.* (f32 0/1);
              when the mask file is absent, mask = (|values| > 0).

PSTK stack:   <stem>.pstk.json {axis, angles_deg, dims, pitch_um, provenance}
              plus <stem>.pstk.raw float32 frames concatenated in angle order.

HOLO set:     <stem>.holo.json {n_views, tilt_deg, wavelength_um, n_medium,
              na, detector_dims} plus <stem>.holo.raw complex float32 frames
              view-major. Only circular illumination sets are serializable.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .forward import HologramSet, IlluminationSet, Optics, circular_illumination
from .grids import Grid3, KSpaceVolume, RIVolume
from .projection import Axis, ProjectionStack, Provenance

__all__ = [
    "save_ri_volume", "load_ri_volume",
    "save_kspace", "load_kspace",
    "save_stack", "load_stack",
    "save_holograms", "load_holograms",
    "sha256_file",
]


def _stem(path: str | Path, kind: str) -> Path:
    p = str(path)
    for suffix in (f".{kind}.json", f".{kind}.raw", f".{kind}"):
        if p.endswith(suffix):
            p = p[: -len(suffix)]
            break
    return Path(p)


def _write_json(path: Path, manifest: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _read_json(path: Path) -> dict:
    if not path.exists():
        raise FileNotFoundError(str(path))
    return json.loads(path.read_text())


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _save_volf(stem: Path, name: str, values: np.ndarray, pitch_um: float,
               n_background: float):
    if np.iscomplexobj(values):
        dtype, arr = "c64", np.ascontiguousarray(values.astype("<c8"))
    else:
        dtype, arr = "f32", np.ascontiguousarray(values.astype("<f4"))
    nz, ny, nx = values.shape
    _write_json(stem.with_name(stem.name + ".volf.json"), {
        "name": name, "dtype": dtype, "dims": [nz, ny, nx],
        "pitch_um": pitch_um, "n_background": n_background,
    })
    stem.with_name(stem.name + ".volf.raw").write_bytes(arr.tobytes())


def _load_volf(stem: Path) -> tuple[dict, np.ndarray]:
    man = _read_json(stem.with_name(stem.name + ".volf.json"))
    raw = stem.with_name(stem.name + ".volf.raw").read_bytes()
    dims = tuple(man["dims"])
    dt = "<c8" if man["dtype"] == "c64" else "<f4"
    arr = np.frombuffer(raw, dtype=dt)
    if arr.size != int(np.prod(dims)):
        raise ValueError(f"raw size {arr.size} does not match dims {dims}")
    return man, arr.reshape(dims).astype(np.complex128 if man["dtype"] == "c64" else np.float64)


def save_ri_volume(path: str | Path, v: RIVolume, name: str = "volume"):
    stem = _stem(path, "volf")
    _save_volf(stem, name, v.values, v.grid.pitch, v.n_background)


def load_ri_volume(path: str | Path) -> RIVolume:
    stem = _stem(path, "volf")
    man, arr = _load_volf(stem)
    if man["dtype"] != "f32":
        raise ValueError("RI volumes must be f32")
    nz, ny, nx = man["dims"]
    return RIVolume(Grid3(nx, ny, nz, man["pitch_um"]), arr, man["n_background"])


def save_kspace(path: str | Path, k: KSpaceVolume, n_background: float = 1.337,
                name: str = "kspace"):
    stem = _stem(path, "volf")
    _save_volf(stem, name, k.values, k.grid.pitch, n_background)
    mask_stem = stem.with_name(stem.name + ".mask")
    _save_volf(mask_stem, name + "-mask", k.mask.astype(np.float64), k.grid.pitch,
               n_background)


def load_kspace(path: str | Path) -> KSpaceVolume:
    stem = _stem(path, "volf")
    man, arr = _load_volf(stem)
    nz, ny, nx = man["dims"]
    grid = Grid3(nx, ny, nz, man["pitch_um"])
    mask_stem = stem.with_name(stem.name + ".mask")
    if mask_stem.with_name(mask_stem.name + ".volf.json").exists():
        _, m = _load_volf(mask_stem)
        mask = m > 0.5
    else:
        mask = np.abs(arr) > 0
    return KSpaceVolume(grid, arr.astype(np.complex128), mask)


def save_stack(path: str | Path, stack: ProjectionStack):
    stem = _stem(path, "pstk")
    n, h, w = stack.frames.shape
    _write_json(stem.with_name(stem.name + ".pstk.json"), {
        "axis": Axis(stack.axis).value,
        "angles_deg": [float(a) for a in stack.angles_deg],
        "dims": [h, w],
        "pitch_um": stack.pitch_um,
        "provenance": Provenance(stack.provenance).value,
    })
    raw = np.ascontiguousarray(stack.frames.astype("<f4"))
    stem.with_name(stem.name + ".pstk.raw").write_bytes(raw.tobytes())


def load_stack(path: str | Path) -> ProjectionStack:
    stem = _stem(path, "pstk")
    man = _read_json(stem.with_name(stem.name + ".pstk.json"))
    raw = stem.with_name(stem.name + ".pstk.raw").read_bytes()
    h, w = man["dims"]
    angles = np.asarray(man["angles_deg"], dtype=np.float64)
    arr = np.frombuffer(raw, dtype="<f4")
    if arr.size != angles.size * h * w:
        raise ValueError("raw size does not match angle count and dims")
    frames = arr.reshape(angles.size, h, w).astype(np.float64)
    return ProjectionStack(Axis(man["axis"]), angles, frames, man["pitch_um"],
                           Provenance(man["provenance"]))


def _circular_params(illum: IlluminationSet) -> tuple[int, float]:
    d = illum.directions
    tilt = np.rad2deg(np.arccos(d[0, 2]))
    ref = circular_illumination(d.shape[0], tilt, illum.optics)
    if not np.allclose(ref.directions, d, atol=1e-9):
        raise ValueError("only circular illumination sets are serializable")
    return d.shape[0], float(tilt)


def save_holograms(path: str | Path, holo: HologramSet):
    stem = _stem(path, "holo")
    n_views, tilt = _circular_params(holo.illumination)
    opt = holo.illumination.optics
    ny, nx = holo.detector_dims
    _write_json(stem.with_name(stem.name + ".holo.json"), {
        "n_views": n_views, "tilt_deg": tilt,
        "wavelength_um": opt.wavelength_um, "n_medium": opt.n_medium, "na": opt.na,
        "detector_dims": [ny, nx],
    })
    raw = np.ascontiguousarray(holo.frames.astype("<c8"))
    stem.with_name(stem.name + ".holo.raw").write_bytes(raw.tobytes())


def load_holograms(path: str | Path) -> HologramSet:
    stem = _stem(path, "holo")
    man = _read_json(stem.with_name(stem.name + ".holo.json"))
    optics = Optics(man["wavelength_um"], man["n_medium"], man["na"])
    illum = circular_illumination(man["n_views"], man["tilt_deg"], optics)
    ny, nx = man["detector_dims"]
    raw = stem.with_name(stem.name + ".holo.raw").read_bytes()
    arr = np.frombuffer(raw, dtype="<c8")
    if arr.size != man["n_views"] * ny * nx:
        raise ValueError("raw size does not match view count and dims")
    return HologramSet(illum, arr.reshape(man["n_views"], ny, nx).astype(np.complex128))
