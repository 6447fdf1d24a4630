"""Generator training: least-squares GAN on latent realism plus L1 regression.

The generator's job is mostly regression (predict the next audio latent);
the adversarial term only keeps predictions on the real-latent manifold.
Loss weights, optimizer, and schedule are trainer defaults:

    D: 0.5 E[(D(z_real) - 1)^2] + 0.5 E[D(z_fake)^2]
    G: 0.5 E[(D(z_fake) - 1)^2] + lambda_l1 * L1(z_fake, z_next)

with Adam(lr, betas=(0.5, 0.999)) on both networks and lambda_l1 = 10.
"""

from __future__ import annotations

import logging

import torch

from .config import TrainingConfig, TrainingError
from .models import LatentDiscriminator, LatentGenerator

log = logging.getLogger("dancemix_trainer.gan")

MIN_TRIPLES = 32


def train_generator(
    z_move: torch.Tensor,
    z_prev_audio: torch.Tensor,
    z_next_audio: torch.Tensor,
    config: TrainingConfig,
) -> tuple[LatentGenerator, list[float]]:
    """Train the latent generator on aligned triples; returns (model, G-loss history)."""
    shapes = {t.shape for t in (z_move, z_prev_audio, z_next_audio)}
    if len(shapes) != 1 or z_move.ndim != 2:
        raise TrainingError(
            "z_move, z_prev_audio, z_next_audio must share one (n, latent) shape"
        )
    n, d = z_move.shape
    if d != config.latent_dim:
        raise TrainingError(f"latent width {d} != configured {config.latent_dim}")
    if n < MIN_TRIPLES:
        raise TrainingError(f"need at least {MIN_TRIPLES} triples, got {n}")

    torch.manual_seed(config.seed)
    generator = LatentGenerator(config.latent_dim)
    discriminator = LatentDiscriminator(config.latent_dim)
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.lr, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.lr, betas=(0.5, 0.999))

    history: list[float] = []
    for epoch in range(config.epochs):
        perm = torch.randperm(n)
        g_total, batches = 0.0, 0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            zm, zp, zt = z_move[idx], z_prev_audio[idx], z_next_audio[idx]

            opt_d.zero_grad()
            with torch.no_grad():
                fake = generator(zm, zp)
            d_loss = 0.5 * ((discriminator(zt) - 1.0) ** 2).mean() + 0.5 * (
                discriminator(fake) ** 2
            ).mean()
            d_loss.backward()
            opt_d.step()

            opt_g.zero_grad()
            fake = generator(zm, zp)
            g_adv = 0.5 * ((discriminator(fake) - 1.0) ** 2).mean()
            g_l1 = (fake - zt).abs().mean()
            g_loss = g_adv + config.lambda_l1 * g_l1
            g_loss.backward()
            opt_g.step()
            g_total += float(g_loss.detach())
            batches += 1
        history.append(g_total / batches)
        log.info("epoch %d/%d: G loss %.4f", epoch + 1, config.epochs, history[-1])
    return generator, history


def heldout_cosine(
    generator: LatentGenerator,
    z_move: torch.Tensor,
    z_prev_audio: torch.Tensor,
    z_next_audio: torch.Tensor,
) -> float:
    """Mean cosine between predictions and targets on held-out triples."""
    with torch.no_grad():
        pred = generator(z_move, z_prev_audio)
    cos = torch.nn.functional.cosine_similarity(pred, z_next_audio, dim=1)
    return float(cos.mean())
