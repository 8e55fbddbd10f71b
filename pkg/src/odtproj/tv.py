"""Total-variation-regularized reconstruction via split Bregman with
conjugate-gradient inner solves.

Minimizes (mu/2)||Omega(Ap - q)||^2 + alpha*||d||_1 subject to d = grad p,
with the splitting weight set equal to alpha so the augmented Lagrangian is

    (mu/2)||Omega(Ap - q)||^2 + alpha*||d||_1 + (alpha/2)||d - grad p - b||^2

and one outer iteration reads

    p-step:  (mu * A^H Omega A + alpha * grad^T grad) p
                 = mu * A^H (Omega q) + alpha * grad^T (d - b)   [cg_iterations of CG]
    d-step:  d = shrink(grad p + b, alpha/alpha = 1)
    b-step:  b = b + grad p - d

The iteration runs in complex object space (the sampling mask is not
Hermitian-symmetric) and the real part of the final iterate is converted to
RI. No nonnegativity is imposed.
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

__all__ = ["TvConfig", "TvIterate", "grad3", "divergence3", "tv_norm", "shrink3", "tv_reconstruct"]


@dataclass(frozen=True)
class TvConfig:
    """Defaults are the small-volume simulation profile; the measured-data
    profile uses mu=900, alpha=1000."""

    mu: float = 100.0
    alpha: float = 100.0
    cg_iterations: int = 5
    bregman_iterations: int = 40

    def __post_init__(self):
        if not (self.mu > 0 and self.alpha > 0):
            raise ValueError("mu and alpha must be positive")
        if self.cg_iterations < 1 or self.bregman_iterations < 1:
            raise ValueError("iteration counts must be >= 1")


@dataclass(frozen=True)
class TvIterate:
    iteration: int
    objective: float       # (mu/2)||Omega(Ap - q)||^2 + alpha * tv_norm(p)
    data_term: float
    tv_term: float


def _grad(v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (np.roll(v, -1, axis=0) - v,
            np.roll(v, -1, axis=1) - v,
            np.roll(v, -1, axis=2) - v)


def _div(d: tuple[np.ndarray, np.ndarray, np.ndarray]) -> np.ndarray:
    # adjoint of _grad is -_div with the same circular boundary
    return ((d[0] - np.roll(d[0], 1, axis=0))
            + (d[1] - np.roll(d[1], 1, axis=1))
            + (d[2] - np.roll(d[2], 1, axis=2)))


def grad3(p: ScatteringPotential) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward differences (z, y, x) with circular boundary."""
    return _grad(p.values)


def divergence3(d: tuple[np.ndarray, np.ndarray, np.ndarray]) -> np.ndarray:
    """Negative adjoint of grad3: <grad p, d> == <p, -divergence3(d)>."""
    return _div(d)


def _tv_of_array(v: np.ndarray) -> float:
    g = _grad(v)
    return float(np.sum(np.sqrt(sum(np.abs(a) ** 2 for a in g))))


def tv_norm(p: ScatteringPotential) -> float:
    """Sum over voxels of the isotropic gradient magnitude."""
    return _tv_of_array(p.values)


def shrink3(d: tuple[np.ndarray, np.ndarray, np.ndarray], t: float):
    """Voxelwise vector soft-threshold d * max(|d|-t, 0)/|d| with 0/0 -> 0."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    mag = np.sqrt(sum(np.abs(a) ** 2 for a in d))
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(mag > 0, np.maximum(mag - t, 0.0) / np.where(mag > 0, mag, 1.0), 0.0)
    return tuple(a * scale for a in d)


def _cg(op, x0: np.ndarray, rhs: np.ndarray, iters: int,
        residuals: Optional[list] = None) -> np.ndarray:
    """Conjugate gradient on a self-adjoint PSD operator; energy-norm error
    (and, for our operators, the tracked residual) decreases monotonically."""
    x = x0
    r = rhs - op(x)
    d = r.copy()
    rs = np.vdot(r, r).real
    if residuals is not None:
        residuals.append(np.sqrt(rs))
    for _ in range(iters):
        Ad = op(d)
        dAd = np.vdot(d, Ad).real
        if dAd < 1e-30:
            break
        a = rs / dAd
        x = x + a * d
        r = r - a * Ad
        rs_new = np.vdot(r, r).real
        if not np.isfinite(rs_new):
            raise RuntimeError("TV inner CG produced non-finite residual")
        if residuals is not None:
            residuals.append(np.sqrt(rs_new))
        d = r + (rs_new / rs) * d
        rs = rs_new
    return x


def tv_reconstruct(
    measured: KSpaceVolume,
    cfg: TvConfig,
    optics: Optics,
    n_background: float = 1.337,
    trace_hook: Optional[Callable[[TvIterate], None]] = None,
) -> RIVolume:
    if not np.any(measured.mask):
        raise ValueError("measurement mask is empty")
    mask = measured.mask
    q = measured.values.astype(np.complex128)
    mu, alpha = cfg.mu, cfg.alpha

    def normal_op(p: np.ndarray) -> np.ndarray:
        # grad^T grad == -div(grad(.)), the positive-semidefinite Laplacian
        fid = _centered_ifftn(np.where(mask, _centered_fftn(p), 0.0))
        return mu * fid - alpha * _div(_grad(p))

    def cg_solve(x0, rhs, iters, residuals=None):
        return _cg(normal_op, x0, rhs, iters, residuals)

    p = _centered_ifftn(np.where(mask, q, 0.0))  # zero-filled adjoint start
    zeros = np.zeros_like(p)
    d = (zeros.copy(), zeros.copy(), zeros.copy())
    b = (zeros.copy(), zeros.copy(), zeros.copy())
    rhs_data = mu * _centered_ifftn(np.where(mask, q, 0.0))
    gamma = alpha  # splitting weight; d-step threshold is alpha/gamma
    for j in range(1, cfg.bregman_iterations + 1):
        diff = tuple(dk - bk for dk, bk in zip(d, b))
        rhs = rhs_data - gamma * _div(diff)
        p = cg_solve(p, rhs, cfg.cg_iterations)
        if not np.all(np.isfinite(p)):
            raise RuntimeError(f"TV iteration {j}: non-finite iterate")
        g = _grad(p)
        d = shrink3(tuple(gk + bk for gk, bk in zip(g, b)), alpha / gamma)
        b = tuple(bk + gk - dk for bk, gk, dk in zip(b, g, d))
        if trace_hook is not None:
            resid = np.where(mask, _centered_fftn(p) - q, 0.0)
            data_term = 0.5 * mu * float(np.linalg.norm(resid) ** 2)
            tv_term = alpha * _tv_of_array(p)
            trace_hook(TvIterate(j, data_term + tv_term, data_term, tv_term))
    final = ScatteringPotential(measured.grid, p.real)
    return potential_to_ri(final, optics.wavelength_um, n_background)
