"""Weight-bundle semantics: architecture manifest, encoders, and the
movement+audio latent combiner network.

A WeightBundle is a named tensor map plus a JSON manifest describing how the
tensors chain into three models:

* audio_encoder: 224x224x1 spectrogram -> 128-d latent distribution
* movement_encoder: 256x256x3 trajectory image -> 128-d latent distribution
* generator: (z_movement + z_previous_audio) -> predicted next-audio latent

Both encoders are five conv(k=4, s=2, p=1) + ReLU stages over channel widths
32-64-128-256-256, flattened into dense mu / logvar heads. Inference uses the
posterior mean mu so live runs are deterministic and replayable; stochastic
sampling exists for tests only (sample_latent). The generator adds the two
latents pointwise, then runs dense(128->256) -> LayerNorm -> LeakyReLU ->
dense(256->256) -> LayerNorm -> LeakyReLU -> dense(256->128).

The manifest travels inside the container as a float32 tensor named
"__manifest__" holding the UTF-8 JSON bytes one byte per element, which keeps
the container format single-dtype.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError, ShapeFlowError
from .bundle import read_container, write_container
from .ops import conv2d, dense, layer_norm, leaky_relu, relu

LATENT_DIM = 128
AUDIO_INPUT = (224, 224, 1)
MOVEMENT_INPUT = (256, 256, 3)
ENCODER_CHANNELS = (32, 64, 128, 256, 256)
KERNEL = 4
STRIDE = 2
PADDING = 1
GENERATOR_HIDDEN = 256
MANIFEST_TENSOR = "__manifest__"

_ACTIVATIONS = {
    "relu": lambda x, layer: relu(x),
    "leaky_relu": lambda x, layer: leaky_relu(x, layer.get("slope", 0.2)),
    "none": lambda x, layer: x,
}


@dataclass
class WeightBundle:
    """Immutable-by-convention tensor map + architecture manifest."""

    tensors: dict[str, np.ndarray]
    manifest: dict = field(default_factory=dict)

    def tensor(self, name: str) -> np.ndarray:
        try:
            return self.tensors[name]
        except KeyError:
            raise ShapeFlowError(f"bundle is missing tensor {name!r}") from None


def default_manifest() -> dict:
    def encoder(input_shape: tuple[int, int, int]) -> dict:
        return {
            "kind": "conv_encoder",
            "input": list(input_shape),
            "latent": LATENT_DIM,
            "conv_layers": [
                {"name": f"conv{i + 1}", "stride": STRIDE, "padding": PADDING, "activation": "relu"}
                for i in range(len(ENCODER_CHANNELS))
            ],
            "heads": {"mu": "head_mu", "logvar": "head_logvar"},
        }

    return {
        "format_version": 1,
        "models": {
            "audio_encoder": encoder(AUDIO_INPUT),
            "movement_encoder": encoder(MOVEMENT_INPUT),
            "generator": {
                "kind": "latent_mlp",
                "input": LATENT_DIM,
                "output": LATENT_DIM,
                "layers": [
                    {"name": "fc1", "norm": "ln1", "activation": "leaky_relu", "slope": 0.2},
                    {"name": "fc2", "norm": "ln2", "activation": "leaky_relu", "slope": 0.2},
                    {"name": "fc3", "activation": "none"},
                ],
            },
        },
    }


# --- serialization -------------------------------------------------------------

def serialize_bundle(bundle: WeightBundle) -> bytes:
    manifest_bytes = json.dumps(bundle.manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    tensors = dict(bundle.tensors)
    tensors[MANIFEST_TENSOR] = np.frombuffer(manifest_bytes, dtype=np.uint8).astype(np.float32)
    return write_container(tensors)


def deserialize_bundle(data: bytes) -> WeightBundle:
    tensors = read_container(data)
    raw = tensors.pop(MANIFEST_TENSOR, None)
    if raw is None:
        raise ShapeFlowError("bundle has no architecture manifest")
    manifest = json.loads(bytes(raw.astype(np.uint8)).decode("utf-8"))
    bundle = WeightBundle(tensors=tensors, manifest=manifest)
    validate_bundle(bundle)
    return bundle


def bundle_sha256(data: bytes | WeightBundle) -> str:
    if isinstance(data, WeightBundle):
        data = serialize_bundle(data)
    return hashlib.sha256(data).hexdigest()


# --- shape-flow validation ------------------------------------------------------

def _check_conv_encoder(bundle: WeightBundle, model: str, spec: dict) -> None:
    h, w, c = spec["input"]
    for layer in spec["conv_layers"]:
        name = layer["name"]
        kshape = bundle.tensor(f"{model}/{name}/w").shape
        if len(kshape) != 4 or kshape[2] != c:
            raise ShapeFlowError(
                f"{model}/{name}: kernel {kshape} incompatible with {c}-channel input"
            )
        kh, kw, _, c_out = kshape
        stride, pad = layer["stride"], layer["padding"]
        h = (h + 2 * pad - kh) // stride + 1
        w = (w + 2 * pad - kw) // stride + 1
        if h < 1 or w < 1:
            raise ShapeFlowError(f"{model}/{name}: spatial extent collapsed to {h}x{w}")
        bias = bundle.tensor(f"{model}/{name}/b")
        if bias.shape != (c_out,):
            raise ShapeFlowError(f"{model}/{name}: bias shape {bias.shape} != ({c_out},)")
        c = c_out
    flat = h * w * c
    latent = spec["latent"]
    for head_name in spec["heads"].values():
        wshape = bundle.tensor(f"{model}/{head_name}/w").shape
        if wshape != (flat, latent):
            raise ShapeFlowError(
                f"{model}/{head_name}: weight {wshape} != ({flat}, {latent})"
            )
        if bundle.tensor(f"{model}/{head_name}/b").shape != (latent,):
            raise ShapeFlowError(f"{model}/{head_name}: bad bias shape")


def _check_latent_mlp(bundle: WeightBundle, model: str, spec: dict) -> None:
    d = spec["input"]
    for layer in spec["layers"]:
        name = layer["name"]
        wshape = bundle.tensor(f"{model}/{name}/w").shape
        if len(wshape) != 2 or wshape[0] != d:
            raise ShapeFlowError(f"{model}/{name}: weight {wshape} incompatible with {d}-d input")
        d = wshape[1]
        if bundle.tensor(f"{model}/{name}/b").shape != (d,):
            raise ShapeFlowError(f"{model}/{name}: bad bias shape")
        if "norm" in layer:
            norm = layer["norm"]
            for part in ("gamma", "beta"):
                if bundle.tensor(f"{model}/{norm}/{part}").shape != (d,):
                    raise ShapeFlowError(f"{model}/{norm}/{part}: expected shape ({d},)")
    if d != spec["output"]:
        raise ShapeFlowError(f"{model}: final width {d} != declared output {spec['output']}")


def validate_bundle(bundle: WeightBundle) -> None:
    """Verify every declared model admits its end-to-end forward pass."""
    models = bundle.manifest.get("models")
    if not models:
        raise ShapeFlowError("manifest declares no models")
    for model, spec in models.items():
        kind = spec.get("kind")
        if kind == "conv_encoder":
            _check_conv_encoder(bundle, model, spec)
        elif kind == "latent_mlp":
            _check_latent_mlp(bundle, model, spec)
        else:
            raise ShapeFlowError(f"{model}: unknown model kind {kind!r}")


# --- forward passes -------------------------------------------------------------

def ensure_latent(vec: np.ndarray, what: str = "latent") -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float32)
    if arr.shape != (LATENT_DIM,):
        raise InvalidArgumentError(f"{what} must have length {LATENT_DIM}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{what} contains non-finite values")
    return arr


def encode(image: np.ndarray, bundle: WeightBundle, model: str = "audio_encoder") -> tuple[np.ndarray, np.ndarray]:
    """Run a conv encoder; returns (mu, logvar) float32 latents."""
    spec = bundle.manifest["models"].get(model)
    if spec is None or spec.get("kind") != "conv_encoder":
        raise InvalidArgumentError(f"bundle has no conv encoder named {model!r}")
    x = np.asarray(image, dtype=np.float32)
    if list(x.shape) != spec["input"]:
        raise InvalidArgumentError(
            f"{model} expects input {spec['input']}, got {list(x.shape)}"
        )
    for layer in spec["conv_layers"]:
        name = layer["name"]
        x = conv2d(x, bundle.tensor(f"{model}/{name}/w"), layer["stride"], layer["padding"])
        x = x + bundle.tensor(f"{model}/{name}/b")
        x = _ACTIVATIONS[layer.get("activation", "relu")](x, layer)
    flat = x.reshape(-1)
    heads = spec["heads"]
    mu = dense(flat, bundle.tensor(f"{model}/{heads['mu']}/w"), bundle.tensor(f"{model}/{heads['mu']}/b"))
    logvar = dense(flat, bundle.tensor(f"{model}/{heads['logvar']}/w"), bundle.tensor(f"{model}/{heads['logvar']}/b"))
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(logvar))):
        raise InvalidArgumentError(f"{model} produced non-finite latents")
    return mu, logvar


def generator_forward(z_move: np.ndarray, z_prev_audio: np.ndarray, bundle: WeightBundle) -> np.ndarray:
    """Predict the next audio latent from movement and previous-audio latents."""
    spec = bundle.manifest["models"].get("generator")
    if spec is None or spec.get("kind") != "latent_mlp":
        raise InvalidArgumentError("bundle has no generator model")
    a = ensure_latent(z_move, "z_move")
    b = ensure_latent(z_prev_audio, "z_prev_audio")
    x = a + b
    for layer in spec["layers"]:
        name = layer["name"]
        x = dense(x, bundle.tensor(f"generator/{name}/w"), bundle.tensor(f"generator/{name}/b"))
        if "norm" in layer:
            norm = layer["norm"]
            x = layer_norm(x, bundle.tensor(f"generator/{norm}/gamma"), bundle.tensor(f"generator/{norm}/beta"))
        x = _ACTIVATIONS[layer.get("activation", "none")](x, layer)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("generator produced non-finite output")
    return x


def sample_latent(mu: np.ndarray, logvar: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Test-only reparameterized draw: mu + exp(0.5*logvar) * eps."""
    mu = ensure_latent(mu, "mu")
    logvar = ensure_latent(logvar, "logvar")
    eps = rng.standard_normal(LATENT_DIM).astype(np.float32)
    return (mu + np.exp(0.5 * logvar) * eps).astype(np.float32)


def dry_run(bundle: WeightBundle) -> dict[str, tuple[int, ...]]:
    """Push zeros through every declared model; returns output shapes."""
    shapes: dict[str, tuple[int, ...]] = {}
    for model, spec in bundle.manifest["models"].items():
        if spec["kind"] == "conv_encoder":
            mu, logvar = encode(np.zeros(spec["input"], dtype=np.float32), bundle, model)
            shapes[model] = (mu.shape[0], logvar.shape[0])
        else:
            out = generator_forward(
                np.zeros(LATENT_DIM, dtype=np.float32),
                np.zeros(LATENT_DIM, dtype=np.float32),
                bundle,
            )
            shapes[model] = out.shape
    return shapes


# --- construction ----------------------------------------------------------------

def _conv_stack_shapes(input_shape: tuple[int, int, int]) -> tuple[list[tuple[int, int, int, int]], int]:
    """Kernel shapes of the encoder stack and the flattened feature width."""
    h, w, c = input_shape
    kernels = []
    for c_out in ENCODER_CHANNELS:
        kernels.append((KERNEL, KERNEL, c, c_out))
        h = (h + 2 * PADDING - KERNEL) // STRIDE + 1
        w = (w + 2 * PADDING - KERNEL) // STRIDE + 1
        c = c_out
    return kernels, h * w * c


def make_random_bundle(seed: int = 0) -> WeightBundle:
    """Standard architecture with He/Xavier-scaled random weights.

    Used by `dancemix inspect --gen-random-weights` so shape and latency
    checks can run without any trained model.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    manifest = default_manifest()
    tensors: dict[str, np.ndarray] = {}

    for model, input_shape in (("audio_encoder", AUDIO_INPUT), ("movement_encoder", MOVEMENT_INPUT)):
        kernels, flat = _conv_stack_shapes(input_shape)
        for i, kshape in enumerate(kernels):
            fan_in = kshape[0] * kshape[1] * kshape[2]
            tensors[f"{model}/conv{i + 1}/w"] = (
                rng.standard_normal(kshape) * np.sqrt(2.0 / fan_in)
            ).astype(np.float32)
            tensors[f"{model}/conv{i + 1}/b"] = np.zeros(kshape[3], dtype=np.float32)
        for head in ("head_mu", "head_logvar"):
            tensors[f"{model}/{head}/w"] = (
                rng.standard_normal((flat, LATENT_DIM)) * np.sqrt(1.0 / flat)
            ).astype(np.float32)
            tensors[f"{model}/{head}/b"] = np.zeros(LATENT_DIM, dtype=np.float32)

    widths = [LATENT_DIM, GENERATOR_HIDDEN, GENERATOR_HIDDEN, LATENT_DIM]
    for i in range(3):
        d_in, d_out = widths[i], widths[i + 1]
        tensors[f"generator/fc{i + 1}/w"] = (
            rng.standard_normal((d_in, d_out)) * np.sqrt(1.0 / d_in)
        ).astype(np.float32)
        tensors[f"generator/fc{i + 1}/b"] = np.zeros(d_out, dtype=np.float32)
    for i in (1, 2):
        tensors[f"generator/ln{i}/gamma"] = np.ones(GENERATOR_HIDDEN, dtype=np.float32)
        tensors[f"generator/ln{i}/beta"] = np.zeros(GENERATOR_HIDDEN, dtype=np.float32)

    bundle = WeightBundle(tensors=tensors, manifest=manifest)
    validate_bundle(bundle)
    return bundle
