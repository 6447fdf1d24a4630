"""Forward-pass inference core: tensor ops, weight container, model wiring."""

from .bundle import (
    load_container,
    load_weight_bundle,
    read_container,
    save_container,
    save_weight_bundle,
    write_container,
)
from .models import (
    LATENT_DIM,
    WeightBundle,
    bundle_sha256,
    default_manifest,
    deserialize_bundle,
    dry_run,
    encode,
    ensure_latent,
    generator_forward,
    make_random_bundle,
    sample_latent,
    serialize_bundle,
    validate_bundle,
)
from .ops import conv2d, conv2d_transpose, dense, layer_norm, leaky_relu, relu

__all__ = [
    "LATENT_DIM",
    "WeightBundle",
    "bundle_sha256",
    "conv2d",
    "conv2d_transpose",
    "default_manifest",
    "dense",
    "deserialize_bundle",
    "dry_run",
    "encode",
    "ensure_latent",
    "generator_forward",
    "layer_norm",
    "leaky_relu",
    "load_container",
    "load_weight_bundle",
    "make_random_bundle",
    "read_container",
    "relu",
    "sample_latent",
    "save_container",
    "save_weight_bundle",
    "serialize_bundle",
    "validate_bundle",
    "write_container",
]
