"""POCS reconstruction alternating k-space data consistency with object-space
nonnegativity (the Gerchberg-Papoulis iteration).

One iteration, starting from the previous spectrum P:

    P_mix = (1 - beta*mask) * P + beta * measured     # data consistency
    p     = inverse_transform(P_mix)                  # object space
    p_pos = max(Re(p), 0)                             # nonnegativity
    P     = forward_transform(p_pos)

P starts at the zero-filled measurement, so with beta = 1 the measured
samples are restored exactly at every data-consistency step. The clamp at
zero potential is equivalent to forbidding refractive indices below the
background.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .forward import Optics
from .grids import (
    KSpaceVolume,
    RIVolume,
    ScatteringPotential,
    _centered_fftn,
    _centered_ifftn,
    potential_to_ri,
)

__all__ = ["GpConfig", "GpIterate", "nonneg_project", "gp_reconstruct"]


@dataclass(frozen=True)
class GpConfig:
    beta: float = 1.0
    iterations: int = 40
    n_background: float = 1.337

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if not self.iterations >= 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class GpIterate:
    """Per-iteration state handed to the trace hook (arrays are views)."""

    iteration: int
    kspace_mixed: np.ndarray
    object_real: np.ndarray
    object_projected: np.ndarray
    data_residual: float       # max |P_mix - measured| on the mask
    step_norm: float           # ||p_pos - previous p_pos||_2
    min_before_projection: float


def nonneg_project(p: ScatteringPotential) -> ScatteringPotential:
    """max(Re(p), 0) elementwise; idempotent."""
    return ScatteringPotential(p.grid, np.maximum(np.real(p.values), 0.0))


def gp_reconstruct(
    measured: KSpaceVolume,
    cfg: GpConfig,
    optics: Optics,
    trace_hook: Optional[Callable[[GpIterate], None]] = None,
) -> RIVolume:
    """Run cfg.iterations of the four-step cycle and convert back to RI."""
    if not np.any(measured.mask):
        raise ValueError("measurement mask is empty")
    q = measured.values.astype(np.complex128)
    mask = measured.mask
    beta = cfg.beta
    energy0 = float(np.linalg.norm(q) ** 2)
    P = q.copy()
    p_pos_prev = None
    p_pos = np.zeros(measured.grid.shape)
    for j in range(1, cfg.iterations + 1):
        P_mix = P - beta * np.where(mask, P, 0.0) + beta * q
        p = _centered_ifftn(P_mix)
        p_real = p.real
        p_pos = np.maximum(p_real, 0.0)
        P = _centered_fftn(p_pos)
        energy = float(np.linalg.norm(P) ** 2)
        if not np.isfinite(energy):
            raise RuntimeError(f"GP iteration {j}: non-finite iterate")
        if energy0 > 0 and energy > 10.0 * energy0:
            raise RuntimeError(
                f"GP diverged at iteration {j}: energy {energy:.3e} > 10x initial {energy0:.3e}")
        if trace_hook is not None:
            step = (np.linalg.norm(p_pos - p_pos_prev)
                    if p_pos_prev is not None else float("nan"))
            trace_hook(GpIterate(
                iteration=j,
                kspace_mixed=P_mix,
                object_real=p_real,
                object_projected=p_pos,
                data_residual=float(np.max(np.abs(P_mix[mask] - q[mask]))) if np.any(mask) else 0.0,
                step_norm=float(step),
                min_before_projection=float(p_real.min()),
            ))
        p_pos_prev = p_pos
    final = ScatteringPotential(measured.grid, p_pos)
    return potential_to_ri(final, optics.wavelength_um, cfg.n_background)
