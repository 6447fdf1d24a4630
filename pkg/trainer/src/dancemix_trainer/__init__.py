"""Offline training for the dancemix models, exporting engine-ready bundles."""

from .config import TrainingConfig, TrainingError
from .data import blob_images, linear_latent_triples
from .export import export_bundle, from_weight_bundle, to_weight_bundle
from .gan import heldout_cosine, train_generator
from .models import (
    ConvDecoder,
    ConvEncoder,
    ImageVae,
    LatentDiscriminator,
    LatentGenerator,
)
from .vae import elbo_loss, train_vae

__all__ = [
    "ConvDecoder",
    "ConvEncoder",
    "ImageVae",
    "LatentDiscriminator",
    "LatentGenerator",
    "TrainingConfig",
    "TrainingError",
    "blob_images",
    "elbo_loss",
    "export_bundle",
    "from_weight_bundle",
    "heldout_cosine",
    "linear_latent_triples",
    "to_weight_bundle",
    "train_generator",
    "train_vae",
]
