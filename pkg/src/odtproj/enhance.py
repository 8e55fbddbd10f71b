"""Pluggable projection-stack enhancement: identity, wavelet hard-threshold
denoising, or an external command operating on PSTK files.

Every enhancer must preserve geometry (dims, angles, axis); the stage
re-checks this instead of trusting the enhancer.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .projection import ProjectionStack, Provenance
from .wavelets import wavedec2, waverec2, FILTERS

__all__ = ["EnhancerContract", "wavelet_denoise", "enhance_stack", "external_enhance"]


@dataclass(frozen=True)
class EnhancerContract:
    """kind: identity | wavelet | external.

    wavelet params: wavelet_id (db3), levels (4), threshold (0.7).
    external params: command (template with {in} and {out}), timeout_s.
    """

    kind: str = "identity"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("identity", "wavelet", "external"):
            raise ValueError(f"unknown enhancer kind {self.kind!r}")
        if self.kind == "external" and "command" not in self.params:
            raise ValueError("external enhancer needs a 'command' template")


def _pad_to_multiple(frame: np.ndarray, mult: int) -> tuple[np.ndarray, tuple[int, int]]:
    pads = []
    for n in frame.shape:
        pads.append((0, (-n) % mult))
    return np.pad(frame, pads, mode="symmetric"), frame.shape


def wavelet_denoise(frame: np.ndarray, wavelet_id: str = "db3", levels: int = 4,
                    threshold: float = 0.7) -> np.ndarray:
    """Hard-threshold the detail bands of the [0,1]-rescaled frame.

    The frame is rescaled by its own min/max so the threshold is meaningful
    across exposure scales; the approximation band is never thresholded.
    Frames whose min equals their max are returned unchanged.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ValueError("frame must be 2D")
    if wavelet_id not in FILTERS:
        raise ValueError(f"unsupported wavelet {wavelet_id!r}")
    if min(frame.shape) < 2**levels:
        raise ValueError(f"frame dims {frame.shape} below 2**levels = {2**levels}")
    lo = float(frame.min())
    hi = float(frame.max())
    if hi == lo:
        return frame.copy()
    x = (frame - lo) / (hi - lo)
    padded, orig_shape = _pad_to_multiple(x, 2**levels)
    approx, details = wavedec2(padded, levels, wavelet_id)
    kept = [tuple(np.where(np.abs(band) < threshold, 0.0, band) for band in det)
            for det in details]
    y = waverec2(approx, kept, wavelet_id)[: orig_shape[0], : orig_shape[1]]
    return lo + y * (hi - lo)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ODT_THREADS", "1")))
    except ValueError:
        return 1


def _check_geometry(out: ProjectionStack, ref: ProjectionStack, what: str):
    if out.frame_dims != ref.frame_dims:
        raise ValueError(f"{what} changed frame dims {ref.frame_dims} -> {out.frame_dims}")
    if out.axis != ref.axis:
        raise ValueError(f"{what} changed rotation axis")
    if out.n_angles != ref.n_angles or not np.array_equal(out.angles_deg, ref.angles_deg):
        raise ValueError(f"{what} changed the angle list")


def enhance_stack(stack: ProjectionStack, enhancer: EnhancerContract) -> ProjectionStack:
    """Frame-wise enhancement; provenance becomes 'enhanced'."""
    if enhancer.kind == "identity":
        out = ProjectionStack(stack.axis, stack.angles_deg, stack.frames,
                              stack.pitch_um, Provenance.ENHANCED)
    elif enhancer.kind == "wavelet":
        p = enhancer.params
        args = (p.get("wavelet_id", "db3"), int(p.get("levels", 4)),
                float(p.get("threshold", 0.7)))
        workers = _worker_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                frames = list(pool.map(lambda f: wavelet_denoise(f, *args), stack.frames))
        else:
            frames = [wavelet_denoise(f, *args) for f in stack.frames]
        out = ProjectionStack(stack.axis, stack.angles_deg, np.stack(frames),
                              stack.pitch_um, Provenance.ENHANCED)
    else:
        out = external_enhance(stack, enhancer.params["command"],
                               float(enhancer.params.get("timeout_s", 600.0)))
    _check_geometry(out, stack, f"{enhancer.kind} enhancer")
    if not np.all(np.isfinite(out.frames)):
        raise ValueError(f"{enhancer.kind} enhancer produced non-finite frames")
    return out


def external_enhance(stack: ProjectionStack, command_template: str,
                     timeout_s: float = 600.0) -> ProjectionStack:
    """Round-trip the stack through an external command via PSTK files.

    The template must contain {in} and {out} placeholders, e.g.
    ``python -m ganenhancer infer --model M --in {in} --out {out}``.
    """
    from .fileio import load_stack, save_stack  # local import to avoid a cycle

    if "{in}" not in command_template or "{out}" not in command_template:
        raise ValueError("command template must contain {in} and {out}")
    with tempfile.TemporaryDirectory(prefix="odt-enhance-") as tmp:
        in_path = str(Path(tmp) / "input")
        out_path = str(Path(tmp) / "output")
        save_stack(in_path, stack)
        cmd = command_template.format(**{"in": in_path + ".pstk.json", "out": out_path})
        try:
            proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True,
                                  timeout=timeout_s)
        except subprocess.TimeoutExpired as e:
            raise RuntimeError(f"external enhancer timed out after {timeout_s}s: {cmd}") from e
        if proc.returncode != 0:
            raise RuntimeError(
                f"external enhancer failed (exit {proc.returncode}): {cmd}\n"
                f"stdout:\n{proc.stdout}\nstderr:\n{proc.stderr}")
        try:
            out = load_stack(out_path)
        except Exception as e:
            raise RuntimeError(
                f"external enhancer wrote unreadable output: {e}\n"
                f"stdout:\n{proc.stdout}\nstderr:\n{proc.stderr}") from e
    _check_geometry(out, stack, "external enhancer")
    return ProjectionStack(out.axis, out.angles_deg, out.frames, out.pitch_um,
                           Provenance.ENHANCED)
