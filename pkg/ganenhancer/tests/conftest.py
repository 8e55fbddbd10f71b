import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from ganenhancer import Stack

SIZE = 64
N_FRAMES = 16


def bead_projection(cx: float, cy: float, radius: float, amp: float) -> np.ndarray:
    """Analytic parallel projection of a homogeneous ball: 2*sqrt(R^2 - r^2)."""
    yy, xx = np.meshgrid(np.arange(SIZE, dtype=float),
                         np.arange(SIZE, dtype=float), indexing="ij")
    d2 = (yy - cy) ** 2 + (xx - cx) ** 2
    return amp * np.sqrt(np.maximum(radius * radius - d2, 0.0)) / radius


def make_pair(seed: int = 0, jitter: float = 2.0, n_frames: int = N_FRAMES + 1):
    """Sharp and axially-blurred bead projections with subpixel jitter; the
    final frame is the held-out sample."""
    rng = np.random.default_rng(seed)
    clean, degraded = [], []
    for _ in range(n_frames):
        f = bead_projection(32 + rng.uniform(-jitter, jitter),
                            32 + rng.uniform(-jitter, jitter), 11.0, 1.0)
        clean.append(f)
        degraded.append(gaussian_filter(f, sigma=(3.0, 0.8)))
    return (np.array(clean, dtype=np.float32),
            np.array(degraded, dtype=np.float32))


def stacks_from(clean: np.ndarray, degraded: np.ndarray):
    n = clean.shape[0]
    angles = np.arange(n, dtype=float) * (360.0 / n)
    measured = Stack("y", angles, clean, 0.1, "measured_angles")
    missing = Stack("y", angles, degraded, 0.1, "missing_angles")
    return measured, missing


@pytest.fixture(scope="session")
def synthetic_pair():
    return make_pair()


def psnr(test: np.ndarray, reference: np.ndarray) -> float:
    peak = reference.max() - reference.min()
    mse = float(np.mean((test - reference) ** 2))
    return 10.0 * np.log10(peak * peak / mse)
