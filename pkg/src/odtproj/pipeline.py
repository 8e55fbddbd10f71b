"""End-to-end orchestration: phantom -> holograms -> k-space -> Rytov + POCS
reconstructions -> per-axis projection schedules -> enhancement -> FBP ->
three-axis average -> metrics.

Every stage persists its artifacts under the run directory. manifest.json
holds the config hash and artifact checksums (nothing time-dependent, so a
rerun with identical config and inputs reproduces it bitwise); wall-clock
stage timings live separately in timings.json.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .enhance import EnhancerContract, enhance_stack
from .forward import Optics, circular_illumination, grid_kspace, rytov_reconstruct, simulate_holograms
from .gp import GpConfig, gp_reconstruct
from .grids import Grid3, RIVolume, ri_to_potential
from .metrics import psnr, ssim
from .phantoms import SpherePhantomSpec, bead_phantom, generate_sphere_phantom
from .projection import Axis, fbp, fbp_three_axis, merge_stacks, project_schedule, split_schedule
from .tv import TvConfig, tv_reconstruct

__all__ = ["PipelineConfig", "PipelineResult", "StageError", "run_pipeline", "load_config"]


@dataclass(frozen=True)
class PipelineConfig:
    """One document holding every stage hyperparameter (defaults follow the
    reference operating point: 49 views at 45 degrees, beta=1 with 40 POCS
    iterations, 360-frame schedules, db3/4-level/0.7 wavelet profile)."""

    run_dir: str = "runs/latest"
    seed: int = 5
    grid_n: int = 64
    pitch_um: float = 0.1
    wavelength_um: float = 0.532
    n_medium: float = 1.337
    na: float = 0.9
    n_views: int = 49
    tilt_deg: float = 45.0
    phantom_kind: str = "spheres"  # spheres | bead | file
    phantom_path: str | None = None
    n_spheres_range: tuple[int, int] = (2, 2)
    radius_range_um: tuple[float, float] = (1.2, 2.2)
    ri_range: tuple[float, float] = (1.36, 1.40)
    bead_radius_um: float = 1.2
    bead_ri: float = 1.46
    gp_beta: float = 1.0
    gp_iterations: int = 40
    run_tv: bool = False
    tv_mu: float = 100.0
    tv_alpha: float = 100.0
    tv_cg_iterations: int = 5
    tv_bregman_iterations: int = 40
    schedule_angles: int = 360
    axes: tuple[str, ...] = ("x", "y", "z")
    enhancer_kind: str = "identity"  # identity | wavelet | external
    enhancer_scope: str = "all"      # all | missing
    wavelet_id: str = "db3"
    wavelet_levels: int = 4
    wavelet_threshold: float = 0.7
    external_command: str | None = None
    external_timeout_s: float = 600.0
    ramp_window: str = "none"
    split_margin_deg: float = 0.0
    save_splits: bool = True

    def __post_init__(self):
        if self.phantom_kind not in ("spheres", "bead", "file"):
            raise ValueError(f"unknown phantom kind {self.phantom_kind!r}")
        if self.phantom_kind == "file" and not self.phantom_path:
            raise ValueError("phantom_kind=file requires phantom_path")
        if self.enhancer_kind not in ("identity", "wavelet", "external"):
            raise ValueError(f"unknown enhancer kind {self.enhancer_kind!r}")
        if self.enhancer_kind == "external" and not self.external_command:
            raise ValueError("external enhancer requires external_command")
        if self.enhancer_scope not in ("missing", "all"):
            raise ValueError("enhancer_scope must be 'missing' or 'all'")
        for ax in self.axes:
            Axis(ax)

    def optics(self) -> Optics:
        return Optics(self.wavelength_um, self.n_medium, self.na)

    def canonical_json(self) -> str:
        """Config document without run_dir (a location, not a parameter),
        so identical computations yield identical manifests anywhere."""
        d = asdict(self)
        d.pop("run_dir")
        for key in ("n_spheres_range", "radius_range_um", "ri_range", "axes"):
            d[key] = list(d[key])
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def load_config(path: str | Path) -> PipelineConfig:
    raw = json.loads(Path(path).read_text())
    for key in ("n_spheres_range", "radius_range_um", "ri_range", "axes"):
        if key in raw:
            raw[key] = tuple(raw[key])
    return PipelineConfig(**raw)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineResult:
    run_dir: Path
    metrics: dict
    artifacts: dict[str, str]        # relative path -> sha256
    timings_s: dict[str, float] = field(default_factory=dict)


def _make_enhancer(cfg: PipelineConfig) -> EnhancerContract:
    if cfg.enhancer_kind == "identity":
        return EnhancerContract("identity")
    if cfg.enhancer_kind == "wavelet":
        return EnhancerContract("wavelet", {
            "wavelet_id": cfg.wavelet_id, "levels": cfg.wavelet_levels,
            "threshold": cfg.wavelet_threshold})
    return EnhancerContract("external", {
        "command": cfg.external_command, "timeout_s": cfg.external_timeout_s})


def _phantom_stage(cfg: PipelineConfig) -> RIVolume:
    grid = Grid3(cfg.grid_n, cfg.grid_n, cfg.grid_n, cfg.pitch_um)
    if cfg.phantom_kind == "file":
        return fileio.load_ri_volume(cfg.phantom_path)
    if cfg.phantom_kind == "bead":
        return bead_phantom(grid, cfg.bead_radius_um, cfg.bead_ri, cfg.n_medium)
    return generate_sphere_phantom(SpherePhantomSpec(
        seed=cfg.seed, grid=grid, n_spheres_range=cfg.n_spheres_range,
        radius_range_um=cfg.radius_range_um, ri_range=cfg.ri_range,
        n_background=cfg.n_medium))


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    run_dir = Path(cfg.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(cfg.canonical_json())
    optics = cfg.optics()
    timings: dict[str, float] = {}
    artifacts: dict[str, str] = {"config.json": fileio.sha256_file(run_dir / "config.json")}

    def stage(name):
        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, exc_type, exc, tb):
                timings[name] = time.perf_counter() - self.t0
                if exc is not None and not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc
        return _Timer()

    def persist(rel: str, saver, *args):
        saver(run_dir / rel, *args)

    def checksum(rel_stem: str, *suffixes: str):
        for s in suffixes:
            rel = rel_stem + s
            artifacts[rel] = fileio.sha256_file(run_dir / rel)

    with stage("phantom"):
        phantom = _phantom_stage(cfg)
        persist("01_phantom", fileio.save_ri_volume, phantom, "phantom")
        checksum("01_phantom", ".volf.json", ".volf.raw")

    with stage("simulate"):
        illum = circular_illumination(cfg.n_views, cfg.tilt_deg, optics)
        holo = simulate_holograms(ri_to_potential(phantom, cfg.wavelength_um), illum)
        persist("02_holograms", fileio.save_holograms, holo)
        checksum("02_holograms", ".holo.json", ".holo.raw")

    with stage("grid"):
        measured = grid_kspace(holo, phantom.grid)
        fileio.save_kspace(run_dir / "03_kspace", measured, cfg.n_medium)
        checksum("03_kspace", ".volf.json", ".volf.raw")
        checksum("03_kspace.mask", ".volf.json", ".volf.raw")

    with stage("rytov"):
        rytov = rytov_reconstruct(measured, cfg.wavelength_um, cfg.n_medium)
        persist("04_rytov", fileio.save_ri_volume, rytov, "rytov")
        checksum("04_rytov", ".volf.json", ".volf.raw")

    with stage("gp"):
        gp = gp_reconstruct(measured, GpConfig(cfg.gp_beta, cfg.gp_iterations,
                                               cfg.n_medium), optics)
        persist("05_gp", fileio.save_ri_volume, gp, "gp")
        checksum("05_gp", ".volf.json", ".volf.raw")

    tv = None
    if cfg.run_tv:
        with stage("tv"):
            tv = tv_reconstruct(measured, TvConfig(cfg.tv_mu, cfg.tv_alpha,
                                                   cfg.tv_cg_iterations,
                                                   cfg.tv_bregman_iterations),
                                optics, cfg.n_medium)
            persist("05b_tv", fileio.save_ri_volume, tv, "tv")
            checksum("05b_tv", ".volf.json", ".volf.raw")

    enhancer = _make_enhancer(cfg)
    per_axis = []
    for ax in cfg.axes:
        axis = Axis(ax)
        with stage(f"project_{ax}"):
            sched = project_schedule(gp, axis, cfg.schedule_angles)
            persist(f"06_proj_{ax}", fileio.save_stack, sched)
            checksum(f"06_proj_{ax}", ".pstk.json", ".pstk.raw")
            meas_stack, miss_stack = split_schedule(sched, cfg.tilt_deg,
                                                    cfg.split_margin_deg)
            if cfg.save_splits:
                if meas_stack is not None:
                    persist(f"06_proj_{ax}_measured", fileio.save_stack, meas_stack)
                    checksum(f"06_proj_{ax}_measured", ".pstk.json", ".pstk.raw")
                if miss_stack is not None:
                    persist(f"06_proj_{ax}_missing", fileio.save_stack, miss_stack)
                    checksum(f"06_proj_{ax}_missing", ".pstk.json", ".pstk.raw")
        with stage(f"enhance_{ax}"):
            if cfg.enhancer_scope == "all" or meas_stack is None:
                enhanced = enhance_stack(sched, enhancer)
            else:
                enhanced = merge_stacks(meas_stack, enhance_stack(miss_stack, enhancer))
            persist(f"07_enh_{ax}", fileio.save_stack, enhanced)
            checksum(f"07_enh_{ax}", ".pstk.json", ".pstk.raw")
        with stage(f"fbp_{ax}"):
            rec = fbp(enhanced, cfg.n_medium, cfg.ramp_window)
            persist(f"08_fbp_{ax}", fileio.save_ri_volume, rec, f"fbp-{ax}")
            checksum(f"08_fbp_{ax}", ".volf.json", ".volf.raw")
            per_axis.append(rec)

    with stage("average"):
        if len(per_axis) == 3:
            final = fbp_three_axis(*per_axis)
        elif len(per_axis) == 1:
            final = per_axis[0]
        else:
            vals = np.mean([r.values for r in per_axis], axis=0)
            final = RIVolume(per_axis[0].grid, vals, per_axis[0].n_background)
        persist("09_final", fileio.save_ri_volume, final, "final")
        checksum("09_final", ".volf.json", ".volf.raw")

    with stage("metrics"):
        metrics = {}
        for name, vol in (("rytov", rytov), ("gp", gp), ("tv", tv), ("final", final)):
            if vol is None:
                continue
            metrics[name] = {"psnr_db": psnr(vol, phantom), "ssim": ssim(vol, phantom)}
        (run_dir / "metrics.json").write_text(
            json.dumps(metrics, sort_keys=True, indent=2, allow_nan=True) + "\n")
        artifacts["metrics.json"] = fileio.sha256_file(run_dir / "metrics.json")

    manifest = {"config_sha256": cfg.config_hash(),
                "artifacts": dict(sorted(artifacts.items()))}
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    (run_dir / "timings.json").write_text(
        json.dumps({k: round(v, 6) for k, v in timings.items()}, sort_keys=True,
                   indent=2) + "\n")
    return PipelineResult(run_dir, metrics, artifacts, timings)
