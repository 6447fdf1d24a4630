"""Training run configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .models import LATENT_DIM


class TrainingError(RuntimeError):
    """Raised for invalid configuration, insufficient data, or refused exports."""


@dataclass
class TrainingConfig:
    """Hyperparameters shared by the VAE and generator trainers.

    The latent width is pinned to the engine's 128 by default; export
    refuses anything else, so changing it is only useful for experiments
    that never leave the trainer.
    """

    latent_dim: int = LATENT_DIM
    beta: float = 1.0
    epochs: int = 20
    batch_size: int = 16
    lr: float = 2e-4
    lambda_l1: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latent_dim < 1:
            raise TrainingError(f"latent_dim must be positive, got {self.latent_dim}")
        if self.beta < 0:
            raise TrainingError(f"beta must be >= 0, got {self.beta}")
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise TrainingError(f"lr must be positive, got {self.lr}")
        if self.lambda_l1 < 0:
            raise TrainingError(f"lambda_l1 must be >= 0, got {self.lambda_l1}")
