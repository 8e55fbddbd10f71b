"""Command-line interface.

Exit codes: 0 success, 1 validation error (bad flags, missing/invalid
inputs), 2 runtime failure. ODT_THREADS caps frame-level worker threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import fileio
from .enhance import EnhancerContract, enhance_stack
from .figures import export_figures
from .forward import Optics, circular_illumination, grid_kspace, rytov_reconstruct, simulate_holograms
from .gp import GpConfig, gp_reconstruct
from .grids import Grid3, ri_to_potential
from .metrics import line_profile, psnr, ri_histogram, ssim
from .phantoms import SpherePhantomSpec, bead_phantom, generate_sphere_phantom
from .pipeline import PipelineConfig, load_config, run_pipeline
from .projection import Axis, fbp, project_schedule
from .tv import TvConfig, tv_reconstruct


class _ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ValidationError(message)


def _optics_flags(p: argparse.ArgumentParser):
    p.add_argument("--wavelength", type=float, default=0.532, help="um")
    p.add_argument("--n-medium", type=float, default=1.337)
    p.add_argument("--na", type=float, default=0.9)


def _kspace_input_flags(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--holograms", help="HOLO stem/path")
    g.add_argument("--kspace", help="VOLF k-space stem/path")
    p.add_argument("--pitch", type=float, default=0.1,
                   help="voxel pitch in um (hologram input only)")


def _load_kspace_arg(args):
    if args.kspace:
        return fileio.load_kspace(args.kspace)
    holo = fileio.load_holograms(args.holograms)
    ny, nx = holo.detector_dims
    if ny != nx:
        raise _ValidationError("hologram detector must be square")
    return grid_kspace(holo, Grid3(nx, ny, nx, args.pitch))


def _build_parser() -> _Parser:
    parser = _Parser(prog="odt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a ground-truth volume")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", help="JSON file with SpherePhantomSpec-style keys")
    p.add_argument("--kind", choices=["spheres", "bead"], default="spheres")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-n", type=int, default=64)
    p.add_argument("--pitch", type=float, default=0.1)
    p.add_argument("--n-background", type=float, default=1.337)
    p.add_argument("--n-spheres", type=int, nargs=2, default=[2, 8])
    p.add_argument("--radius-range", type=float, nargs=2, default=[0.5, 3.0])
    p.add_argument("--ri-range", type=float, nargs=2, default=[1.36, 1.40])
    p.add_argument("--bead-radius", type=float, default=1.2)
    p.add_argument("--bead-ri", type=float, default=1.46)

    p = sub.add_parser("simulate", help="synthesize per-view measurements")
    p.add_argument("--phantom", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--views", type=int, default=49)
    p.add_argument("--tilt", type=float, default=45.0)
    _optics_flags(p)

    p = sub.add_parser("recon-rytov", help="zero-filled inverse-transform baseline")
    _kspace_input_flags(p)
    p.add_argument("--out", required=True)
    _optics_flags(p)

    p = sub.add_parser("recon-gp", help="POCS nonnegativity reconstruction")
    _kspace_input_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=40)
    _optics_flags(p)

    p = sub.add_parser("recon-tv", help="split-Bregman TV reconstruction")
    _kspace_input_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--mu", type=float, default=100.0)
    p.add_argument("--alpha", type=float, default=100.0)
    p.add_argument("--cg-iters", type=int, default=5)
    p.add_argument("--bregman-iters", type=int, default=40)
    _optics_flags(p)

    p = sub.add_parser("project", help="parallel-beam projection schedule")
    p.add_argument("--volume", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--axis", choices=["x", "y", "z"], default="y")
    p.add_argument("--angles", type=int, default=360)

    p = sub.add_parser("enhance", help="enhance a projection stack")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=["identity", "wavelet", "external"],
                   default="wavelet")
    p.add_argument("--wavelet", default="db3")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--cmd", help="external command template with {in} and {out}")
    p.add_argument("--timeout", type=float, default=600.0)

    p = sub.add_parser("fbp", help="filtered backprojection of a stack")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", choices=["none", "hann"], default="none")
    p.add_argument("--n-background", type=float, default=1.337)

    p = sub.add_parser("metrics", help="PSNR/SSIM plus optional histogram/profile")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--json", dest="json_out")
    p.add_argument("--histogram-csv")
    p.add_argument("--bins", type=int, default=120)
    p.add_argument("--profile-csv")
    p.add_argument("--profile-axis", choices=["x", "y", "z"], default="x")
    p.add_argument("--plot-dir")

    p = sub.add_parser("pipeline", help="run the full reconstruction pipeline")
    p.add_argument("--config", help="JSON config file (defaults used if omitted)")
    p.add_argument("--run-dir", help="override the run directory")

    p = sub.add_parser("figures", help="render PNG panels for a run directory")
    p.add_argument("--run-dir", required=True)

    return parser


def _cmd_phantom(args) -> int:
    if args.spec:
        spec_raw = json.loads(Path(args.spec).read_text())
        n = spec_raw.pop("grid_n", 64)
        grid = Grid3(n, n, n, spec_raw.pop("pitch_um", 0.1))
        spec = SpherePhantomSpec(grid=grid, **{
            k: tuple(v) if isinstance(v, list) else v for k, v in spec_raw.items()})
        vol = generate_sphere_phantom(spec)
    else:
        grid = Grid3(args.grid_n, args.grid_n, args.grid_n, args.pitch)
        if args.kind == "bead":
            vol = bead_phantom(grid, args.bead_radius, args.bead_ri, args.n_background)
        else:
            vol = generate_sphere_phantom(SpherePhantomSpec(
                seed=args.seed, grid=grid, n_spheres_range=tuple(args.n_spheres),
                radius_range_um=tuple(args.radius_range), ri_range=tuple(args.ri_range),
                n_background=args.n_background))
    fileio.save_ri_volume(args.out, vol, "phantom")
    print(f"wrote {args.out}.volf.json")
    return 0


def _cmd_simulate(args) -> int:
    vol = fileio.load_ri_volume(args.phantom)
    optics = Optics(args.wavelength, args.n_medium, args.na)
    illum = circular_illumination(args.views, args.tilt, optics)
    holo = simulate_holograms(ri_to_potential(vol, args.wavelength), illum)
    fileio.save_holograms(args.out, holo)
    print(f"wrote {args.out}.holo.json ({args.views} views)")
    return 0


def _cmd_recon(args, method: str) -> int:
    measured = _load_kspace_arg(args)
    optics = Optics(args.wavelength, args.n_medium, args.na)
    if method == "rytov":
        vol = rytov_reconstruct(measured, args.wavelength, args.n_medium)
    elif method == "gp":
        vol = gp_reconstruct(measured, GpConfig(args.beta, args.iters, args.n_medium),
                             optics)
    else:
        vol = tv_reconstruct(measured, TvConfig(args.mu, args.alpha, args.cg_iters,
                                                args.bregman_iters), optics,
                             args.n_medium)
    fileio.save_ri_volume(args.out, vol, method)
    print(f"wrote {args.out}.volf.json")
    return 0


def _cmd_project(args) -> int:
    vol = fileio.load_ri_volume(args.volume)
    stack = project_schedule(vol, Axis(args.axis), args.angles)
    fileio.save_stack(args.out, stack)
    print(f"wrote {args.out}.pstk.json ({args.angles} angles about {args.axis})")
    return 0


def _cmd_enhance(args) -> int:
    stack = fileio.load_stack(args.input)
    if args.kind == "external":
        if not args.cmd:
            raise _ValidationError("--cmd is required for the external enhancer")
        contract = EnhancerContract("external", {"command": args.cmd,
                                                 "timeout_s": args.timeout})
    elif args.kind == "wavelet":
        contract = EnhancerContract("wavelet", {"wavelet_id": args.wavelet,
                                                "levels": args.levels,
                                                "threshold": args.threshold})
    else:
        contract = EnhancerContract("identity")
    fileio.save_stack(args.out, enhance_stack(stack, contract))
    print(f"wrote {args.out}.pstk.json")
    return 0


def _cmd_fbp(args) -> int:
    stack = fileio.load_stack(args.input)
    vol = fbp(stack, args.n_background, args.window)
    fileio.save_ri_volume(args.out, vol, "fbp")
    print(f"wrote {args.out}.volf.json")
    return 0


def _cmd_metrics(args) -> int:
    ref = fileio.load_ri_volume(args.ref)
    test = fileio.load_ri_volume(args.test)
    report = {"psnr_db": psnr(test, ref), "ssim": ssim(test, ref)}
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    if args.histogram_csv:
        lo = float(min(ref.values.min(), test.values.min()))
        hi = float(max(ref.values.max(), test.values.max()))
        counts_r, edges = ri_histogram(ref, args.bins, (lo, hi))
        counts_t, _ = ri_histogram(test, args.bins, (lo, hi))
        with open(args.histogram_csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["bin_center", "ref_count", "test_count"])
            for c, a, b in zip(0.5 * (edges[:-1] + edges[1:]), counts_r, counts_t):
                w.writerow([repr(float(c)), int(a), int(b)])
    if args.profile_csv:
        pr = line_profile(ref, args.profile_axis)
        pt = line_profile(test, args.profile_axis)
        with open(args.profile_csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["index", "ref", "test"])
            for i, (a, b) in enumerate(zip(pr, pt)):
                w.writerow([i, repr(float(a)), repr(float(b))])
    if args.plot_dir:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        out = Path(args.plot_dir)
        out.mkdir(parents=True, exist_ok=True)
        lo = float(min(ref.values.min(), test.values.min()))
        hi = float(max(ref.values.max(), test.values.max()))
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for name, vol in (("reference", ref), ("test", test)):
            counts, edges = ri_histogram(vol, args.bins, (lo, hi))
            ax.plot(0.5 * (edges[:-1] + edges[1:]), counts, label=name)
        ax.set_yscale("log")
        ax.set_xlabel("refractive index")
        ax.set_ylabel("voxel count")
        ax.legend()
        fig.savefig(out / "histogram.png", dpi=110)
        plt.close(fig)
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        ax.plot(line_profile(ref, args.profile_axis), label="reference")
        ax.plot(line_profile(test, args.profile_axis), label="test")
        ax.set_xlabel(f"{args.profile_axis} voxel")
        ax.set_ylabel("refractive index")
        ax.legend()
        fig.savefig(out / "line_profile.png", dpi=110)
        plt.close(fig)
    return 0


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.run_dir:
        from dataclasses import replace
        cfg = replace(cfg, run_dir=args.run_dir)
    result = run_pipeline(cfg)
    print(json.dumps(result.metrics, sort_keys=True, indent=2))
    print(f"run artifacts in {result.run_dir}")
    return 0


def _cmd_figures(args) -> int:
    written, warnings = export_figures(args.run_dir)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(written)} figures")
    return 0


_DISPATCH = {
    "phantom": _cmd_phantom,
    "simulate": _cmd_simulate,
    "recon-rytov": lambda a: _cmd_recon(a, "rytov"),
    "recon-gp": lambda a: _cmd_recon(a, "gp"),
    "recon-tv": lambda a: _cmd_recon(a, "tv"),
    "project": _cmd_project,
    "enhance": _cmd_enhance,
    "fbp": _cmd_fbp,
    "metrics": _cmd_metrics,
    "pipeline": _cmd_pipeline,
    "figures": _cmd_figures,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except (_ValidationError, ValueError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
