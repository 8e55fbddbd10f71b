import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odtproj import (
    Grid3,
    GpConfig,
    RIVolume,
    ScatteringPotential,
    TvConfig,
    gp_reconstruct,
    grad3,
    ri_to_potential,
    rytov_reconstruct,
    shrink3,
    tv_norm,
    tv_reconstruct,
)
from odtproj.tv import divergence3


def test_grad_of_constant_is_zero():
    g = Grid3(8, 8, 8)
    d = grad3(ScatteringPotential(g, np.full(g.shape, 3.7)))
    for a in d:
        assert np.all(a == 0)


def test_grad_divergence_adjoint_identity():
    g = Grid3(16, 16, 16)
    rng = np.random.default_rng(0)
    p = rng.normal(size=g.shape)
    d = tuple(rng.normal(size=g.shape) for _ in range(3))
    gp = grad3(ScatteringPotential(g, p))
    lhs = sum(np.sum(a * b) for a, b in zip(gp, d))
    rhs = np.sum(p * -divergence3(d))
    assert abs(lhs - rhs) / abs(lhs) < 1e-10


def test_grad_linear_ramp_interior():
    g = Grid3(16, 16, 16)
    x = np.arange(16, dtype=float)
    vol = np.broadcast_to(x[None, None, :] * 0.5, g.shape).copy()
    dz, dy, dx = grad3(ScatteringPotential(g, vol))
    assert np.all(dx[:, :, :-1] == 0.5)  # pre-wrap interior
    assert np.all(dy == 0) and np.all(dz == 0)


def test_tv_norm_constant_zero():
    g = Grid3(8, 8, 8)
    assert tv_norm(ScatteringPotential(g, np.full(g.shape, 2.0))) == 0.0


def test_tv_norm_unit_step_plane():
    g = Grid3(16, 16, 16)
    vol = np.zeros(g.shape)
    vol[:, :, 8:] = 1.0  # one step up inside, one wrap step down
    assert tv_norm(ScatteringPotential(g, vol)) == pytest.approx(2 * 16 * 16)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-8, max_value=8, allow_nan=False),
       st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_tv_norm_homogeneous(a, seed):
    g = Grid3(8, 8, 8)
    v = np.random.default_rng(seed).normal(size=g.shape)
    base = tv_norm(ScatteringPotential(g, v))
    scaled = tv_norm(ScatteringPotential(g, a * v))
    assert scaled == pytest.approx(abs(a) * base, rel=1e-12, abs=1e-9)


def test_shrink3_zero_threshold_is_identity():
    g = Grid3(8, 8, 8)
    rng = np.random.default_rng(1)
    d = tuple(rng.normal(size=g.shape) for _ in range(3))
    out = shrink3(d, 0.0)
    for a, b in zip(out, d):
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_shrink3_large_threshold_zeroes():
    g = Grid3(8, 8, 8)
    rng = np.random.default_rng(2)
    d = tuple(0.1 * rng.normal(size=g.shape) for _ in range(3))
    out = shrink3(d, 100.0)
    for a in out:
        assert np.all(a == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1),
       st.floats(min_value=0, max_value=3, allow_nan=False))
def test_shrink3_output_magnitude(seed, t):
    rng = np.random.default_rng(seed)
    d = tuple(rng.normal(size=(6, 6, 6)) for _ in range(3))
    out = shrink3(d, t)
    mag_in = np.sqrt(sum(a ** 2 for a in d))
    mag_out = np.sqrt(sum(a ** 2 for a in out))
    np.testing.assert_allclose(mag_out, np.maximum(mag_in - t, 0.0), atol=1e-12)


def test_tv_alpha_to_zero_matches_rytov(twosphere_measured, optics):
    ry = rytov_reconstruct(twosphere_measured, optics.wavelength_um, 1.337)
    tv0 = tv_reconstruct(twosphere_measured,
                         TvConfig(mu=100.0, alpha=1e-8, cg_iterations=5,
                                  bregman_iterations=3), optics)
    rel = np.linalg.norm(tv0.values - ry.values) / np.linalg.norm(ry.values)
    assert rel < 1e-3


def test_tv_objective_nonincreasing(twosphere_measured, optics):
    trace = []
    tv_reconstruct(twosphere_measured, TvConfig(), optics, trace_hook=trace.append)
    objs = [t.objective for t in trace]
    assert len(objs) == 40
    for prev, cur in zip(objs, objs[1:]):
        assert cur <= 1.01 * prev


def test_tv_smoother_than_gp_on_piecewise_constant(twosphere_measured, optics):
    gp = gp_reconstruct(twosphere_measured, GpConfig(), optics)
    tv = tv_reconstruct(twosphere_measured, TvConfig(), optics)

    def pot_norm(vol):
        clipped = RIVolume(vol.grid, np.maximum(vol.values, 1.0), vol.n_background)
        return tv_norm(ri_to_potential(clipped, optics.wavelength_um))

    assert pot_norm(tv) < pot_norm(gp)


def test_cg_residual_monotone(twosphere_measured, optics):
    # the p-subproblem solver must reduce its residual monotonically
    from odtproj.grids import _centered_fftn, _centered_ifftn
    from odtproj.tv import _cg, _div, _grad

    mask = twosphere_measured.mask
    q = twosphere_measured.values
    mu, alpha = 100.0, 100.0

    def op(p):
        fid = _centered_ifftn(np.where(mask, _centered_fftn(p), 0.0))
        return mu * fid - alpha * _div(_grad(p))

    rhs = mu * _centered_ifftn(np.where(mask, q, 0.0))
    residuals = []
    _cg(op, np.zeros_like(rhs), rhs, 10, residuals)
    assert len(residuals) >= 10
    for a, b in zip(residuals, residuals[1:]):
        assert b <= a * (1 + 1e-12)


def test_tv_deterministic(twosphere_measured, optics):
    cfg = TvConfig(bregman_iterations=3)
    a = tv_reconstruct(twosphere_measured, cfg, optics)
    b = tv_reconstruct(twosphere_measured, cfg, optics)
    assert np.array_equal(a.values, b.values)


def test_tv_config_validation():
    with pytest.raises(ValueError):
        TvConfig(mu=0)
    with pytest.raises(ValueError):
        TvConfig(alpha=-1)
    with pytest.raises(ValueError):
        TvConfig(cg_iterations=0)
    cfg = TvConfig()
    assert (cfg.mu, cfg.alpha, cfg.cg_iterations, cfg.bregman_iterations) == (100, 100, 5, 40)
