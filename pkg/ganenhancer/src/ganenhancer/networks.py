"""Generator and discriminator architectures.

Generators are U-Net style encoder/decoders: per-stage double 3x3 conv +
group normalization + ReLU, 3x3 stride-2 convolution pooling, bilinear
unpooling, concatenation skips, and a closing 1x1 convolution. The full
generator G starts at 32 channels and doubles over 3 stages (bottleneck 256);
the light generator F starts at 16 over 2 stages (bottleneck 64).

The discriminator unit is a patch discriminator built from 4x4 stride-2
convolutions with LeakyReLU and instance normalization; the multiscale
discriminator runs independent units on 2x-downscaled copies of the input,
upscales the score maps bilinearly and sums them with per-epoch weights.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F_t
from torch import nn

__all__ = ["Generator", "DiscriminatorUnit", "MultiscaleDiscriminator",
           "multiscale_weights", "disc_output_size", "apply_generator"]


def _gn(channels: int) -> nn.GroupNorm:
    return nn.GroupNorm(min(8, channels), channels)


class ConvBlock(nn.Module):
    def __init__(self, c_in: int, c_out: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(c_in, c_out, 3, padding=1), _gn(c_out), nn.ReLU(inplace=True),
            nn.Conv2d(c_out, c_out, 3, padding=1), _gn(c_out), nn.ReLU(inplace=True),
        )

    def forward(self, x):
        return self.block(x)


class Generator(nn.Module):
    """Shape-preserving for inputs whose spatial dims divide 2**stages."""

    def __init__(self, base_channels: int = 32, stages: int = 3):
        super().__init__()
        self.base_channels = base_channels
        self.stages = stages
        chans = [base_channels * 2 ** i for i in range(stages)]
        bottleneck = base_channels * 2 ** stages
        self.enc = nn.ModuleList(
            ConvBlock(1 if i == 0 else chans[i - 1], c)
            for i, c in enumerate(chans))
        # stride-2 "pooling" convolutions keep the channel count
        self.pools = nn.ModuleList(
            nn.Conv2d(c, c, 3, stride=2, padding=1) for c in chans)
        self.bottleneck = ConvBlock(chans[-1], bottleneck)
        rev = chans[::-1]
        self.ups = nn.ModuleList(
            nn.Conv2d(bottleneck if i == 0 else rev[i - 1], c, 1)
            for i, c in enumerate(rev))
        self.dec = nn.ModuleList(ConvBlock(2 * c, c) for c in rev)
        self.head = nn.Conv2d(base_channels, 1, 1)

    def forward(self, x):
        skips = []
        for enc, pool in zip(self.enc, self.pools):
            x = enc(x)
            skips.append(x)
            x = pool(x)
        x = self.bottleneck(x)
        for up, dec, skip in zip(self.ups, self.dec, skips[::-1]):
            x = F_t.interpolate(x, size=skip.shape[-2:], mode="bilinear",
                                align_corners=False)
            x = dec(torch.cat([skip, up(x)], dim=1))
        return self.head(x)


def apply_generator(gen: Generator, frame: torch.Tensor) -> torch.Tensor:
    """Run one (1, 1, h, w) frame through the generator, reflect-padding to a
    multiple of 2**stages and cropping back, so any size is preserved."""
    h, w = frame.shape[-2:]
    mult = 2 ** gen.stages
    ph = (-h) % mult
    pw = (-w) % mult
    x = F_t.pad(frame, (0, pw, 0, ph), mode="reflect") if (ph or pw) else frame
    out = gen(x)
    return out[..., :h, :w]


class DiscriminatorUnit(nn.Module):
    """PatchGAN unit: C64 -> C128 -> C256 with 4x4 stride-2 convolutions,
    LeakyReLU throughout, instance normalization after the first block, and a
    1x1 projection to per-patch scores."""

    def __init__(self, base_channels: int = 64):
        super().__init__()
        c = base_channels
        self.net = nn.Sequential(
            nn.Conv2d(1, c, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(c, 2 * c, 4, stride=2, padding=1),
            nn.InstanceNorm2d(2 * c),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(2 * c, 4 * c, 4, stride=2, padding=1),
            nn.InstanceNorm2d(4 * c),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(4 * c, 1, 1),
        )

    def forward(self, x):
        return self.net(x)


def disc_output_size(n: int, convs: int = 3) -> int:
    """Closed-form spatial size after the unit's 4x4/stride-2 stack."""
    for _ in range(convs):
        n = (n + 2 * 1 - 4) // 2 + 1
    return n


class MultiscaleDiscriminator(nn.Module):
    """Independent units on progressively 2x-downscaled inputs; score maps are
    bilinearly upscaled to the finest level and combined with the per-epoch
    level weights."""

    def __init__(self, levels: int = 4, base_channels: int = 64):
        super().__init__()
        self.levels = levels
        self.units = nn.ModuleList(DiscriminatorUnit(base_channels)
                                   for _ in range(levels))

    def forward(self, x, weights):
        if len(weights) != self.levels:
            raise ValueError(f"need {self.levels} level weights, got {len(weights)}")
        min_side = 16 * 2 ** (self.levels - 1)  # coarsest level must keep >= 2x2 patches
        if min(x.shape[-2:]) < min_side:
            raise ValueError(
                f"input {tuple(x.shape[-2:])} too small for {self.levels} "
                f"discriminator levels (needs >= {min_side}); use fewer levels")
        out = None
        target = None
        for level, (unit, w) in enumerate(zip(self.units, weights)):
            xl = F_t.avg_pool2d(x, 2 ** level) if level else x
            score = unit(xl)
            if out is None:
                target = score.shape[-2:]
                out = float(w) * score
            else:
                out = out + float(w) * F_t.interpolate(
                    score, size=target, mode="bilinear", align_corners=False)
        return out


def multiscale_weights(epoch: int, total_epochs: int,
                       start=(1.0, 3.0, 5.0, 7.0),
                       end=(7.0, 7.0, 7.0, 7.0)) -> np.ndarray:
    """Elementwise linear interpolation with exact endpoints: epoch 1 gives
    ``start``, epoch ``total_epochs`` gives ``end``. A single-epoch schedule
    stays at ``start`` (the first-epoch weights are the pinned ones)."""
    if not 1 <= epoch <= total_epochs:
        raise ValueError(f"epoch {epoch} outside [1, {total_epochs}]")
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    if start.shape != end.shape:
        raise ValueError("start and end schedules must have equal length")
    if total_epochs == 1:
        return start.copy()
    t = (epoch - 1) / (total_epochs - 1)
    if epoch == total_epochs:
        return end.copy()
    return (1.0 - t) * start + t * end
