"""Unpaired projection-stack enhancer: an optimal-transport CycleGAN that
learns the map from degraded missing-angle projections to the measured-angle
distribution, trained and applied on PSTK files."""

from .networks import (
    DiscriminatorUnit,
    Generator,
    MultiscaleDiscriminator,
    apply_generator,
    disc_output_size,
    multiscale_weights,
)
from .pstk import Stack, load_stack, save_stack
from .training import PROFILES, TrainConfig, load_bundle, train
from .inference import enhance_frames, enhance_stack_file

__version__ = "0.1.0"
