"""Bridge between torch modules and the engine's weight bundle format.

Export writes the engine's own layout through its public API, so a bundle
produced here is loadable by the engine by construction: the engine's
validator runs at assembly time and a refused export raises TrainingError
instead of writing a broken file. Import goes the other way and is handy
for warm-starting from a previous bundle.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch

from dancemix.errors import ShapeFlowError
from dancemix.neural import (
    LATENT_DIM,
    WeightBundle,
    default_manifest,
    save_weight_bundle,
    validate_bundle,
)

from .config import TrainingError
from .models import ConvEncoder, ImageVae, LatentGenerator

log = logging.getLogger("dancemix_trainer.export")


def _np(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().to(torch.float32).contiguous().numpy().copy()


def _encoder_tensors(encoder: ConvEncoder, model: str) -> dict[str, np.ndarray]:
    tensors: dict[str, np.ndarray] = {}
    for i, conv in enumerate(encoder.convs):
        # torch Conv2d stores (c_out, c_in, kh, kw); the engine wants (kh, kw, c_in, c_out)
        tensors[f"{model}/conv{i + 1}/w"] = _np(conv.weight.permute(2, 3, 1, 0))
        tensors[f"{model}/conv{i + 1}/b"] = _np(conv.bias)
    for head, module in (("head_mu", encoder.head_mu), ("head_logvar", encoder.head_logvar)):
        tensors[f"{model}/{head}/w"] = _np(module.weight.t())
        tensors[f"{model}/{head}/b"] = _np(module.bias)
    return tensors


def _generator_tensors(generator: LatentGenerator) -> dict[str, np.ndarray]:
    tensors: dict[str, np.ndarray] = {}
    for i, fc in enumerate((generator.fc1, generator.fc2, generator.fc3)):
        tensors[f"generator/fc{i + 1}/w"] = _np(fc.weight.t())
        tensors[f"generator/fc{i + 1}/b"] = _np(fc.bias)
    for i, ln in enumerate((generator.ln1, generator.ln2)):
        tensors[f"generator/ln{i + 1}/gamma"] = _np(ln.weight)
        tensors[f"generator/ln{i + 1}/beta"] = _np(ln.bias)
    return tensors


def _as_encoder(model: ConvEncoder | ImageVae, what: str) -> ConvEncoder:
    encoder = model.encoder if isinstance(model, ImageVae) else model
    if encoder.latent_dim != LATENT_DIM:
        raise TrainingError(
            f"export refused: {what} latent dim {encoder.latent_dim} != engine {LATENT_DIM}"
        )
    return encoder


def to_weight_bundle(
    audio: ConvEncoder | ImageVae,
    movement: ConvEncoder | ImageVae,
    generator: LatentGenerator,
) -> WeightBundle:
    """Assemble a complete, validated engine bundle from trained modules."""
    tensors: dict[str, np.ndarray] = {}
    tensors.update(_encoder_tensors(_as_encoder(audio, "audio encoder"), "audio_encoder"))
    tensors.update(_encoder_tensors(_as_encoder(movement, "movement encoder"), "movement_encoder"))
    tensors.update(_generator_tensors(generator))
    bundle = WeightBundle(tensors=tensors, manifest=default_manifest())
    try:
        validate_bundle(bundle)
    except ShapeFlowError as exc:
        raise TrainingError(f"export refused: {exc}") from exc
    return bundle


def export_bundle(
    path: str | Path,
    audio: ConvEncoder | ImageVae,
    movement: ConvEncoder | ImageVae,
    generator: LatentGenerator,
) -> WeightBundle:
    bundle = to_weight_bundle(audio, movement, generator)
    save_weight_bundle(path, bundle)
    log.info("exported bundle to %s (%d tensors)", path, len(bundle.tensors))
    return bundle


# --- the reverse direction -----------------------------------------------------

def _load_encoder(bundle: WeightBundle, model: str) -> ConvEncoder:
    spec = bundle.manifest["models"][model]
    h, w, c = spec["input"]
    encoder = ConvEncoder((h, w, c), spec["latent"])
    with torch.no_grad():
        for i, conv in enumerate(encoder.convs):
            w_t = torch.from_numpy(bundle.tensor(f"{model}/conv{i + 1}/w").copy())
            conv.weight.copy_(w_t.permute(3, 2, 0, 1))
            conv.bias.copy_(torch.from_numpy(bundle.tensor(f"{model}/conv{i + 1}/b").copy()))
        for head, module in (("head_mu", encoder.head_mu), ("head_logvar", encoder.head_logvar)):
            module.weight.copy_(torch.from_numpy(bundle.tensor(f"{model}/{head}/w").copy()).t())
            module.bias.copy_(torch.from_numpy(bundle.tensor(f"{model}/{head}/b").copy()))
    return encoder


def _load_generator(bundle: WeightBundle) -> LatentGenerator:
    generator = LatentGenerator()
    with torch.no_grad():
        for i, fc in enumerate((generator.fc1, generator.fc2, generator.fc3)):
            fc.weight.copy_(torch.from_numpy(bundle.tensor(f"generator/fc{i + 1}/w").copy()).t())
            fc.bias.copy_(torch.from_numpy(bundle.tensor(f"generator/fc{i + 1}/b").copy()))
        for i, ln in enumerate((generator.ln1, generator.ln2)):
            ln.weight.copy_(torch.from_numpy(bundle.tensor(f"generator/ln{i + 1}/gamma").copy()))
            ln.bias.copy_(torch.from_numpy(bundle.tensor(f"generator/ln{i + 1}/beta").copy()))
    return generator


def from_weight_bundle(bundle: WeightBundle) -> tuple[ConvEncoder, ConvEncoder, LatentGenerator]:
    """Torch modules initialized from an engine bundle (audio, movement, generator)."""
    return (
        _load_encoder(bundle, "audio_encoder"),
        _load_encoder(bundle, "movement_encoder"),
        _load_generator(bundle),
    )
