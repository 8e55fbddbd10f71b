"""Limited-angle diffraction tomography toolkit with projection-domain
enhancement: forward model, Rytov/POCS/TV reconstruction, parallel-beam
projection + FBP, pluggable projection enhancers, and metrics."""

from .grids import (
    Grid3,
    KSpaceVolume,
    RIVolume,
    ScatteringPotential,
    fft3_forward,
    fft3_inverse,
    potential_to_ri,
    ri_to_potential,
)
from .phantoms import SpherePhantomSpec, bead_phantom, generate_sphere_phantom
from .forward import (
    HologramSet,
    IlluminationSet,
    Optics,
    circular_illumination,
    ewald_cap_coords,
    grid_kspace,
    missing_cone_mask,
    rytov_reconstruct,
    simulate_holograms,
)
from .gp import GpConfig, gp_reconstruct, nonneg_project
from .tv import TvConfig, grad3, shrink3, tv_norm, tv_reconstruct
from .projection import (
    Axis,
    ProjectionStack,
    Provenance,
    fbp,
    fbp_three_axis,
    parallel_project,
    project_schedule,
    ramp_filter,
    split_schedule,
)
from .enhance import EnhancerContract, enhance_stack, external_enhance, wavelet_denoise
from .metrics import line_profile, psnr, ri_histogram, ssim

__version__ = "0.1.0"
