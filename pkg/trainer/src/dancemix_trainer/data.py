"""Toy dataset generators.

The studio and AIST recordings the full system was trained on are not
shipped, so everything here is synthetic: enough structure for the VAE to
find (blobs vary in position and size) and an exact linear ground truth
for the generator, where recovery is measurable as held-out cosine.
"""

from __future__ import annotations

import numpy as np
import torch

from .models import LATENT_DIM


def blob_images(
    n: int, hwc: tuple[int, int, int], seed: int = 0, blobs: int = 3
) -> torch.Tensor:
    """(n, c, h, w) float32 images in [0, 1]: soft gaussian blobs on black."""
    h, w, c = hwc
    rng = np.random.Generator(np.random.PCG64(seed))
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    images = np.zeros((n, h, w), dtype=np.float64)
    for i in range(n):
        for _ in range(blobs):
            cy, cx = rng.uniform(0, h), rng.uniform(0, w)
            sigma = rng.uniform(min(h, w) / 16, min(h, w) / 6)
            images[i] += np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * sigma**2))
    images = np.clip(images, 0.0, 1.0).astype(np.float32)
    stacked = np.repeat(images[:, None, :, :], c, axis=1)
    return torch.from_numpy(stacked)


def linear_latent_triples(
    n: int, seed: int = 0, noise: float = 0.0
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """(z_move, z_prev_audio, z_next_audio) with an exact linear ground truth.

    z_next = M (z_move + z_prev) (+ optional gaussian noise) for a fixed
    seeded M, scaled so z_next has roughly unit-variance entries. The
    target is a function of the sum because that is all the generator's
    pointwise-add combiner can see; a target mixing the two inputs with
    different matrices would have an irreducible error floor by design.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    m = rng.standard_normal((LATENT_DIM, LATENT_DIM)) / np.sqrt(2 * LATENT_DIM)
    z_move = rng.standard_normal((n, LATENT_DIM))
    z_prev = rng.standard_normal((n, LATENT_DIM))
    z_next = (z_move + z_prev) @ m.T
    if noise > 0:
        z_next = z_next + noise * rng.standard_normal(z_next.shape)
    return (
        torch.from_numpy(z_move.astype(np.float32)),
        torch.from_numpy(z_prev.astype(np.float32)),
        torch.from_numpy(z_next.astype(np.float32)),
    )
