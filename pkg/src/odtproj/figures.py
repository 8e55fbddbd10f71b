"""Deterministic PNG rendering of run artifacts: orthogonal slice panels,
k-space log-magnitude panels, RI histograms and center line profiles."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import fileio
from .grids import RIVolume
from .metrics import line_profile, ri_histogram

__all__ = ["export_figures"]

_EPS = 1e-8

_VOLUMES = ["01_phantom", "04_rytov", "05_gp", "05b_tv", "09_final"]


def _center_slices(values: np.ndarray):
    nz, ny, nx = values.shape
    return {
        "x-y": values[nz // 2, :, :],
        "y-z": values[:, :, nx // 2],
        "x-z": values[:, ny // 2, :],
    }


def _save(fig, path: Path):
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _slice_panel(vol: RIVolume, title: str, path: Path):
    slices = _center_slices(vol.values)
    fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.4))
    vmin, vmax = float(vol.values.min()), float(vol.values.max())
    for ax, (name, sl) in zip(axes, slices.items()):
        im = ax.imshow(sl, cmap="inferno", vmin=vmin, vmax=vmax, origin="lower")
        ax.set_title(f"{title} {name}")
        ax.set_xticks([])
        ax.set_yticks([])
    fig.colorbar(im, ax=axes, shrink=0.85, label="refractive index")
    _save(fig, path)


def _kspace_panel(mag: np.ndarray, title: str, path: Path):
    logmag = np.log10(mag + _EPS)
    slices = _center_slices(logmag)
    fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.4))
    for ax, (name, sl) in zip(axes, slices.items()):
        im = ax.imshow(sl, cmap="viridis", origin="lower")
        ax.set_title(f"{title} |K| {name}")
        ax.set_xticks([])
        ax.set_yticks([])
    fig.colorbar(im, ax=axes, shrink=0.85, label="log10(|value| + 1e-8)")
    _save(fig, path)


def _volume_spectrum(vol: RIVolume) -> np.ndarray:
    contrast = vol.values - vol.n_background
    return np.abs(np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(contrast), norm="ortho")))


def export_figures(run_dir: str | Path) -> tuple[list[Path], list[str]]:
    """Render PNGs for whatever artifacts exist; returns (written, warnings)."""
    run_dir = Path(run_dir)
    out_dir = run_dir / "figures"
    written: list[Path] = []
    warnings: list[str] = []
    volumes: dict[str, RIVolume] = {}
    for stem in _VOLUMES:
        if (run_dir / f"{stem}.volf.json").exists():
            volumes[stem] = fileio.load_ri_volume(run_dir / stem)
        else:
            warnings.append(f"missing volume artifact {stem}")
    if not volumes and not (run_dir / "03_kspace.volf.json").exists():
        return written, warnings
    out_dir.mkdir(parents=True, exist_ok=True)

    for stem, vol in volumes.items():
        p = out_dir / f"{stem}_slices.png"
        _slice_panel(vol, stem.split("_", 1)[1], p)
        written.append(p)
        if stem != "01_phantom":
            p = out_dir / f"{stem}_kspace.png"
            _kspace_panel(_volume_spectrum(vol), stem.split("_", 1)[1], p)
            written.append(p)

    if (run_dir / "03_kspace.volf.json").exists():
        k = fileio.load_kspace(run_dir / "03_kspace")
        p = out_dir / "03_kspace_gridded.png"
        _kspace_panel(np.abs(k.values), "gridded", p)
        written.append(p)
    else:
        warnings.append("missing k-space artifact 03_kspace")

    if volumes:
        lo = min(float(v.values.min()) for v in volumes.values())
        hi = max(float(v.values.max()) for v in volumes.values())
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for stem, vol in volumes.items():
            counts, edges = ri_histogram(vol, 120, (lo, hi))
            ax.plot(0.5 * (edges[:-1] + edges[1:]), counts, label=stem.split("_", 1)[1])
        ax.set_yscale("log")
        ax.set_xlabel("refractive index")
        ax.set_ylabel("voxel count")
        ax.legend()
        p = out_dir / "histograms.png"
        _save(fig, p)
        written.append(p)

        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for stem, vol in volumes.items():
            ax.plot(line_profile(vol, "x"), label=stem.split("_", 1)[1])
        ax.set_xlabel("x voxel")
        ax.set_ylabel("refractive index")
        ax.legend()
        p = out_dir / "line_profiles.png"
        _save(fig, p)
        written.append(p)

    return written, warnings
