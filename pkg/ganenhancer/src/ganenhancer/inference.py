"""Frame-wise enhancement of a PSTK stack with a trained generator.

Geometry (axis, angles, dims, pitch) is copied verbatim from the input
manifest; only frame values change. Frames are normalized by the input
stack's own min/max, run through G (reflect-padded to the generator's
divisibility requirement, or tiled with overlap blending beyond the tile
budget), and mapped back.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .networks import apply_generator
from .pstk import Stack, load_stack, save_stack
from .training import load_bundle

__all__ = ["enhance_stack_file", "enhance_frames"]


def _tiled_apply(gen, frame: torch.Tensor, tile: int, overlap: int) -> torch.Tensor:
    """Overlap-blend tiling for frames larger than the tile budget."""
    _, _, h, w = frame.shape
    out = torch.zeros_like(frame)
    weight = torch.zeros_like(frame)
    ys = list(range(0, max(h - overlap, 1), tile - overlap))
    xs = list(range(0, max(w - overlap, 1), tile - overlap))
    ramp = torch.ones(tile)
    if overlap > 0:
        edge = torch.linspace(0.0, 1.0, overlap + 2)[1:-1]
        ramp[:overlap] = edge
        ramp[-overlap:] = edge.flip(0)
    win = ramp[:, None] * ramp[None, :]
    for y0 in ys:
        for x0 in xs:
            y1, x1 = min(y0 + tile, h), min(x0 + tile, w)
            y0a, x0a = max(0, y1 - tile), max(0, x1 - tile)
            patch = frame[..., y0a:y1, x0a:x1]
            res = apply_generator(gen, patch)
            wpatch = win[: y1 - y0a, : x1 - x0a]
            out[..., y0a:y1, x0a:x1] += res * wpatch
            weight[..., y0a:y1, x0a:x1] += wpatch
    return out / torch.clamp(weight, min=1e-8)


def enhance_frames(gen, frames: np.ndarray, tile: int | None = 512,
                   overlap: int = 32) -> np.ndarray:
    """Apply the generator to (n, h, w) frames normalized to [0, 1]-ish."""
    out = np.empty_like(frames, dtype=np.float32)
    with torch.no_grad():
        for i, frame in enumerate(frames):
            x = torch.from_numpy(np.ascontiguousarray(frame, dtype=np.float32))
            x = x[None, None]
            if tile is not None and max(frame.shape) > tile:
                y = _tiled_apply(gen, x, tile, overlap)
            else:
                y = apply_generator(gen, x)
            out[i] = y[0, 0].numpy()
    return out


def enhance_stack_file(model_dir: str | Path, in_path: str | Path,
                       out_path: str | Path, tile: int | None = 512) -> Stack:
    """PSTK in, PSTK out; returns the written stack."""
    config, G, _ = load_bundle(model_dir)
    stack = load_stack(in_path)
    lo = float(stack.frames.min())
    hi = float(stack.frames.max())
    if hi == lo:
        hi = lo + 1.0
    norm = ((stack.frames - lo) / (hi - lo)).astype(np.float32)
    enhanced = enhance_frames(G, norm, tile=tile)
    if not np.all(np.isfinite(enhanced)):
        raise RuntimeError("generator produced non-finite frames")
    restored = lo + enhanced.astype(np.float64) * (hi - lo)
    out = Stack(stack.axis, stack.angles_deg, restored.astype(np.float32),
                stack.pitch_um, "enhanced")
    save_stack(out_path, out)
    return out
