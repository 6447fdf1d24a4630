"""Shared fixtures: full-size random modules and their assembled bundle."""

import pytest
import torch

from dancemix_trainer import to_weight_bundle
from dancemix_trainer.models import (
    AUDIO_INPUT,
    LATENT_DIM,
    MOVEMENT_INPUT,
    ConvEncoder,
    LatentGenerator,
)


@pytest.fixture(scope="session")
def random_models():
    """Untrained torch modules at engine size; random weights are enough
    for every parity and export check."""
    torch.manual_seed(123)
    audio = ConvEncoder(AUDIO_INPUT, LATENT_DIM).eval()
    movement = ConvEncoder(MOVEMENT_INPUT, LATENT_DIM).eval()
    generator = LatentGenerator(LATENT_DIM).eval()
    return audio, movement, generator


@pytest.fixture(scope="session")
def random_bundle(random_models):
    return to_weight_bundle(*random_models)
