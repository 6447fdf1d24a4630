"""VAE training loop.

The objective is the negative ELBO: per-sample reconstruction MSE summed
over pixels plus beta times the analytic gaussian KL, averaged over the
batch. History records the epoch means so callers can assert the loss
actually fell.
"""

from __future__ import annotations

import logging

import torch

from .config import TrainingConfig, TrainingError
from .models import ImageVae

log = logging.getLogger("dancemix_trainer.vae")

MIN_SAMPLES = 100


def elbo_loss(
    recon: torch.Tensor, x: torch.Tensor, mu: torch.Tensor, logvar: torch.Tensor, beta: float
) -> torch.Tensor:
    recon_err = ((recon - x) ** 2).flatten(1).sum(dim=1)
    kl = -0.5 * (1 + logvar - mu.pow(2) - logvar.exp()).sum(dim=1)
    return (recon_err + beta * kl).mean()


def train_vae(images: torch.Tensor, config: TrainingConfig) -> tuple[ImageVae, list[float]]:
    """Train an image VAE; returns (model, per-epoch mean losses).

    `images` is (n, c, h, w) float32 in [0, 1]; n must be at least 100
    (the toy floor) so a decrease in the epoch mean is not just batch noise.
    """
    if images.ndim != 4:
        raise TrainingError(f"images must be (n, c, h, w), got {tuple(images.shape)}")
    n, c, h, w = images.shape
    if n < MIN_SAMPLES:
        raise TrainingError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if images.min() < 0 or images.max() > 1:
        raise TrainingError("images must lie in [0, 1]")

    torch.manual_seed(config.seed)
    model = ImageVae((h, w, c), config.latent_dim)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    history: list[float] = []
    for epoch in range(config.epochs):
        perm = torch.randperm(n)
        total, batches = 0.0, 0
        for start in range(0, n, config.batch_size):
            batch = images[perm[start : start + config.batch_size]]
            optimizer.zero_grad()
            recon, mu, logvar = model(batch)
            loss = elbo_loss(recon, batch, mu, logvar, config.beta)
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            batches += 1
        history.append(total / batches)
        log.info("epoch %d/%d: loss %.4f", epoch + 1, config.epochs, history[-1])
    return model, history
