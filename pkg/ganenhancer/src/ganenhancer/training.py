"""Unpaired training of the projection enhancer.

Two generators learn the transport between the degraded (missing-angle) and
clean (measured-angle) projection distributions: G maps missing -> measured,
F maps measured -> missing. Both directions carry least-squares adversarial
losses against multiscale patch discriminators (LS-GAN targets 1/0), plus
lambda-weighted L1 cycle losses ||y - G(F(y))|| and ||y' - F(G(y'))||.
Training runs on random square patches cropped uniformly from the frames.

The model bundle written to the output directory holds config.json (training
config + per-stack normalization), weights.pt (all four networks), loss.csv
(per-epoch means), and check_batch.pt (a frozen batch plus the cycle loss
re-evaluated with the final weights, for independent verification).
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F_t

from .networks import Generator, MultiscaleDiscriminator, multiscale_weights
from .pstk import Stack, load_stack

__all__ = ["TrainConfig", "PROFILES", "train", "load_bundle"]


@dataclass
class TrainConfig:
    lambda_cycle: float = 10.0
    patch: int = 256
    lr: float = 1e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    epochs: int = 20
    seed: int = 0
    steps_per_epoch: int | None = None  # default: max(frame counts)
    disc_levels: int = 4
    weights_start: tuple[float, ...] = (1.0, 3.0, 5.0, 7.0)
    weights_end: tuple[float, ...] = (7.0, 7.0, 7.0, 7.0)
    g_base_channels: int = 32
    g_stages: int = 3
    f_base_channels: int = 16
    f_stages: int = 2
    disc_base_channels: int = 64
    threads: int = 1  # single-threaded for run-to-run determinism

    def __post_init__(self):
        if self.lambda_cycle < 0 or self.lr <= 0 or self.epochs < 1:
            raise ValueError("bad training hyperparameters")
        if len(self.weights_start) != self.disc_levels or \
                len(self.weights_end) != self.disc_levels:
            raise ValueError("level-weight schedules must match disc_levels")


# named profiles: lambda and the multiscale schedule
PROFILES = {
    "phantom": dict(lambda_cycle=0.01, disc_levels=4,
                    weights_start=(1.0, 3.0, 5.0, 7.0),
                    weights_end=(7.0, 7.0, 7.0, 7.0), epochs=150),
    "phantom-small": dict(lambda_cycle=0.01, disc_levels=3,
                          weights_start=(1.0, 3.0, 5.0),
                          weights_end=(5.0, 5.0, 5.0), epochs=150),
    "cells": dict(lambda_cycle=10.0, disc_levels=4,
                  weights_start=(1.0, 3.0, 5.0, 7.0),
                  weights_end=(7.0, 7.0, 7.0, 7.0), epochs=20),
}


def _stack_range(stack: Stack) -> tuple[float, float]:
    lo = float(stack.frames.min())
    hi = float(stack.frames.max())
    if hi == lo:
        hi = lo + 1.0
    return lo, hi


def _normalize(frames: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return ((frames - lo) / (hi - lo)).astype(np.float32)


def _random_patch(frames: np.ndarray, patch: int, rng: np.random.Generator) -> np.ndarray:
    idx = int(rng.integers(0, frames.shape[0]))
    frame = frames[idx]
    h, w = frame.shape
    if h < patch or w < patch:
        frame = np.pad(frame, ((0, max(0, patch - h)), (0, max(0, patch - w))),
                       mode="reflect")
        h, w = frame.shape
    i = int(rng.integers(0, h - patch + 1))
    j = int(rng.integers(0, w - patch + 1))
    return frame[i:i + patch, j:j + patch]


def _lsgan(pred: torch.Tensor, target: float) -> torch.Tensor:
    return F_t.mse_loss(pred, torch.full_like(pred, target))


def train(measured: str | Path | Stack, missing: str | Path | Stack,
          cfg: TrainConfig, out_dir: str | Path) -> Path:
    """Train G/F and persist the model bundle; returns the bundle directory."""
    torch.set_num_threads(cfg.threads)
    meas = measured if isinstance(measured, Stack) else load_stack(measured)
    miss = missing if isinstance(missing, Stack) else load_stack(missing)
    if meas.n_frames == 0 or miss.n_frames == 0:
        raise ValueError("both stacks must be nonempty")
    if meas.frames.shape[1:] != miss.frames.shape[1:]:
        raise ValueError(
            f"stack frame dims differ: {meas.frames.shape[1:]} vs "
            f"{miss.frames.shape[1:]}")

    lo_m, hi_m = _stack_range(meas)
    lo_s, hi_s = _stack_range(miss)
    frames_meas = _normalize(meas.frames, lo_m, hi_m)
    frames_miss = _normalize(miss.frames, lo_s, hi_s)

    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    G = Generator(cfg.g_base_channels, cfg.g_stages)
    F_net = Generator(cfg.f_base_channels, cfg.f_stages)
    D_meas = MultiscaleDiscriminator(cfg.disc_levels, cfg.disc_base_channels)
    D_miss = MultiscaleDiscriminator(cfg.disc_levels, cfg.disc_base_channels)
    opt_g = torch.optim.Adam(list(G.parameters()) + list(F_net.parameters()),
                             lr=cfg.lr, betas=(cfg.adam_beta1, cfg.adam_beta2))
    opt_d = torch.optim.Adam(list(D_meas.parameters()) + list(D_miss.parameters()),
                             lr=cfg.lr, betas=(cfg.adam_beta1, cfg.adam_beta2))

    steps = cfg.steps_per_epoch or max(meas.n_frames, miss.n_frames)
    rows = []
    last_good = None
    last_batch = None
    for epoch in range(1, cfg.epochs + 1):
        weights = multiscale_weights(epoch, cfg.epochs, cfg.weights_start,
                                     cfg.weights_end)
        sums = dict(cycle=0.0, adv_g=0.0, d_measured=0.0, d_missing=0.0)
        for _ in range(steps):
            y = torch.from_numpy(_random_patch(frames_meas, cfg.patch, rng))[None, None]
            y_m = torch.from_numpy(_random_patch(frames_miss, cfg.patch, rng))[None, None]

            # discriminator update
            with torch.no_grad():
                fake_meas = G(y_m)
                fake_miss = F_net(y)
            d_meas_loss = _lsgan(D_meas(y, weights), 1.0) + \
                _lsgan(D_meas(fake_meas, weights), 0.0)
            d_miss_loss = _lsgan(D_miss(y_m, weights), 1.0) + \
                _lsgan(D_miss(fake_miss, weights), 0.0)
            opt_d.zero_grad()
            (d_meas_loss + d_miss_loss).backward()
            opt_d.step()

            # generator update
            fake_meas = G(y_m)
            fake_miss = F_net(y)
            adv = _lsgan(D_meas(fake_meas, weights), 1.0) + \
                _lsgan(D_miss(fake_miss, weights), 1.0)
            cycle = F_t.l1_loss(G(fake_miss), y) + F_t.l1_loss(F_net(fake_meas), y_m)
            g_loss = adv + cfg.lambda_cycle * cycle
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()

            vals = dict(cycle=float(cycle.detach()), adv_g=float(adv.detach()),
                        d_measured=float(d_meas_loss.detach()),
                        d_missing=float(d_miss_loss.detach()))
            if not all(np.isfinite(v) for v in vals.values()):
                if last_good is not None:
                    G.load_state_dict(last_good["G"])
                    F_net.load_state_dict(last_good["F"])
                _write_bundle(out_dir, cfg, G, F_net, D_meas, D_miss,
                              (lo_m, hi_m), (lo_s, hi_s), rows, last_batch)
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}; last good checkpoint saved")
            for k, v in vals.items():
                sums[k] += v
            last_batch = (y.detach().clone(), y_m.detach().clone())
        rows.append({"epoch": epoch,
                     **{k: v / steps for k, v in sums.items()}})
        last_good = {"G": {k: v.clone() for k, v in G.state_dict().items()},
                     "F": {k: v.clone() for k, v in F_net.state_dict().items()}}

    return _write_bundle(out_dir, cfg, G, F_net, D_meas, D_miss,
                         (lo_m, hi_m), (lo_s, hi_s), rows, last_batch)


def _write_bundle(out_dir, cfg, G, F_net, D_meas, D_miss, norm_meas, norm_miss,
                  rows, last_batch) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = {"train": asdict(cfg),
              "norm": {"measured": list(norm_meas), "missing": list(norm_miss)}}
    (out / "config.json").write_text(json.dumps(config, sort_keys=True, indent=2) + "\n")
    torch.save({"G": G.state_dict(), "F": F_net.state_dict(),
                "D_measured": D_meas.state_dict(), "D_missing": D_miss.state_dict()},
               out / "weights.pt")
    with open(out / "loss.csv", "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["epoch", "cycle", "adv_g",
                                               "d_measured", "d_missing"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (v if k == "epoch" else repr(v))
                             for k, v in row.items()})
    if last_batch is not None:
        y, y_m = last_batch
        with torch.no_grad():
            check = float(F_t.l1_loss(G(F_net(y)), y)
                          + F_t.l1_loss(F_net(G(y_m)), y_m))
        torch.save({"y_measured": y, "y_missing": y_m, "cycle_check": check},
                   out / "check_batch.pt")
    return out


def load_bundle(model_dir: str | Path):
    """Load (config dict, G, F) from a bundle directory in eval mode."""
    model_dir = Path(model_dir)
    config = json.loads((model_dir / "config.json").read_text())
    t = config["train"]
    G = Generator(t["g_base_channels"], t["g_stages"])
    F_net = Generator(t["f_base_channels"], t["f_stages"])
    state = torch.load(model_dir / "weights.pt", weights_only=True)
    G.load_state_dict(state["G"])
    F_net.load_state_dict(state["F"])
    G.eval()
    F_net.eval()
    return config, G, F_net
