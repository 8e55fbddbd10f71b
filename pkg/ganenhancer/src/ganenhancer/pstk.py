"""PSTK projection-stack file format — the cross-component contract.

<stem>.pstk.json: {axis, angles_deg, dims, pitch_um, provenance}
<stem>.pstk.raw:  float32 little-endian frames concatenated in angle order.

This module is deliberately self-contained: the enhancer talks to the
reconstruction toolkit only through these files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Stack", "load_stack", "save_stack"]

_PROVENANCES = {"measured_angles", "missing_angles", "enhanced", "schedule"}


@dataclass
class Stack:
    axis: str
    angles_deg: np.ndarray
    frames: np.ndarray  # (n, h, w) float32
    pitch_um: float
    provenance: str

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"bad axis {self.axis!r}")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"bad provenance {self.provenance!r}")
        if self.frames.ndim != 3 or self.frames.shape[0] != self.angles_deg.shape[0]:
            raise ValueError("frame count must match angle count")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("frames must be finite")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def _stem(path: str | Path) -> Path:
    p = str(path)
    for suffix in (".pstk.json", ".pstk.raw", ".pstk"):
        if p.endswith(suffix):
            p = p[: -len(suffix)]
            break
    return Path(p)


def load_stack(path: str | Path) -> Stack:
    stem = _stem(path)
    man_path = stem.with_name(stem.name + ".pstk.json")
    if not man_path.exists():
        raise FileNotFoundError(str(man_path))
    man = json.loads(man_path.read_text())
    angles = np.asarray(man["angles_deg"], dtype=np.float64)
    h, w = man["dims"]
    raw = np.frombuffer(stem.with_name(stem.name + ".pstk.raw").read_bytes(),
                        dtype="<f4")
    if raw.size != angles.size * h * w:
        raise ValueError("raw size does not match angle count and dims")
    return Stack(man["axis"], angles, raw.reshape(angles.size, h, w).copy(),
                 float(man["pitch_um"]), man["provenance"])


def save_stack(path: str | Path, stack: Stack):
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    n, h, w = stack.frames.shape
    manifest = {
        "axis": stack.axis,
        "angles_deg": [float(a) for a in stack.angles_deg],
        "dims": [h, w],
        "pitch_um": stack.pitch_um,
        "provenance": stack.provenance,
    }
    stem.with_name(stem.name + ".pstk.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    raw = np.ascontiguousarray(stack.frames.astype("<f4"))
    stem.with_name(stem.name + ".pstk.raw").write_bytes(raw.tobytes())
