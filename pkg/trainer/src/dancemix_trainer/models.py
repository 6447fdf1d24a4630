"""Torch mirrors of the engine's inference models.

The engine runs plain-numpy forward passes; training happens here in torch
and the learned parameters are exported into the engine's bundle layout:
conv kernels as (kh, kw, c_in, c_out), dense weights as (d_in, d_out).
Two layout details matter for cross-implementation parity:

* torch convolutions produce NCHW activations while the engine flattens
  HxWxC row-major, so encoders permute to NHWC before the dense heads;
* torch Conv2d/Linear store (c_out, c_in, kh, kw) and (d_out, d_in), so
  export transposes (see export.py).

Encoder stacks are five conv(k=4, s=2, p=1) + ReLU stages over channels
32-64-128-256-256 with dense mu / logvar heads; the generator adds the two
input latents and runs dense 128->256->256->128 with LayerNorm + LeakyReLU
between the hidden layers. Both match the engine's manifest exactly.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

LATENT_DIM = 128
AUDIO_INPUT = (224, 224, 1)
MOVEMENT_INPUT = (256, 256, 3)
ENCODER_CHANNELS = (32, 64, 128, 256, 256)
KERNEL = 4
STRIDE = 2
PADDING = 1
GENERATOR_HIDDEN = 256
LEAKY_SLOPE = 0.2


def _conv_out(size: int) -> int:
    return (size + 2 * PADDING - KERNEL) // STRIDE + 1


class ConvEncoder(nn.Module):
    """Image (n, c, h, w) in [0, 1] -> (mu, logvar), each (n, latent_dim)."""

    def __init__(self, input_hwc: tuple[int, int, int], latent_dim: int = LATENT_DIM):
        super().__init__()
        h, w, c = input_hwc
        self.input_hwc = tuple(input_hwc)
        self.latent_dim = latent_dim
        convs = []
        for c_out in ENCODER_CHANNELS:
            convs.append(nn.Conv2d(c, c_out, KERNEL, STRIDE, PADDING))
            h, w, c = _conv_out(h), _conv_out(w), c_out
        if h < 1 or w < 1:
            raise ValueError(f"input {input_hwc} collapses inside the conv stack")
        self.convs = nn.ModuleList(convs)
        self.feature_hw = (h, w)
        self.flat_dim = h * w * c
        self.head_mu = nn.Linear(self.flat_dim, latent_dim)
        self.head_logvar = nn.Linear(self.flat_dim, latent_dim)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        for conv in self.convs:
            x = F.relu(conv(x))
        # engine flattens HxWxC row-major; match it so head weights transfer
        x = x.permute(0, 2, 3, 1).reshape(x.shape[0], -1)
        return self.head_mu(x), self.head_logvar(x)


class ConvDecoder(nn.Module):
    """Latent (n, latent_dim) -> image (n, c, h, w) in [0, 1].

    Mirrors the encoder with transposed convs; k=4, s=2, p=1 doubles each
    spatial size exactly, so five stages recover the input resolution.
    Training-side only: the engine never decodes.
    """

    def __init__(self, output_hwc: tuple[int, int, int], latent_dim: int = LATENT_DIM):
        super().__init__()
        h, w, c = output_hwc
        self.h0, self.w0 = h // (2 ** len(ENCODER_CHANNELS)), w // (2 ** len(ENCODER_CHANNELS))
        if self.h0 * (2 ** len(ENCODER_CHANNELS)) != h or self.w0 * (2 ** len(ENCODER_CHANNELS)) != w:
            raise ValueError(f"output {output_hwc} is not a power-of-two multiple of the base grid")
        self.c0 = ENCODER_CHANNELS[-1]
        self.fc = nn.Linear(latent_dim, self.h0 * self.w0 * self.c0)
        widths = list(reversed(ENCODER_CHANNELS))[1:] + [c]
        deconvs = []
        c_in = self.c0
        for c_out in widths:
            deconvs.append(nn.ConvTranspose2d(c_in, c_out, KERNEL, STRIDE, PADDING))
            c_in = c_out
        self.deconvs = nn.ModuleList(deconvs)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        x = F.relu(self.fc(z)).reshape(z.shape[0], self.c0, self.h0, self.w0)
        for deconv in self.deconvs[:-1]:
            x = F.relu(deconv(x))
        return torch.sigmoid(self.deconvs[-1](x))


class ImageVae(nn.Module):
    """Encoder + decoder pair with the reparameterized sampling step."""

    def __init__(self, input_hwc: tuple[int, int, int], latent_dim: int = LATENT_DIM):
        super().__init__()
        self.encoder = ConvEncoder(input_hwc, latent_dim)
        self.decoder = ConvDecoder(input_hwc, latent_dim)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        mu, logvar = self.encoder(x)
        z = mu + torch.exp(0.5 * logvar) * torch.randn_like(mu)
        return self.decoder(z), mu, logvar


class LatentGenerator(nn.Module):
    """(z_movement, z_previous_audio) -> predicted next-audio latent."""

    def __init__(self, latent_dim: int = LATENT_DIM, hidden: int = GENERATOR_HIDDEN):
        super().__init__()
        self.fc1 = nn.Linear(latent_dim, hidden)
        self.ln1 = nn.LayerNorm(hidden)
        self.fc2 = nn.Linear(hidden, hidden)
        self.ln2 = nn.LayerNorm(hidden)
        self.fc3 = nn.Linear(hidden, latent_dim)

    def forward(self, z_move: torch.Tensor, z_prev_audio: torch.Tensor) -> torch.Tensor:
        x = z_move + z_prev_audio
        x = F.leaky_relu(self.ln1(self.fc1(x)), LEAKY_SLOPE)
        x = F.leaky_relu(self.ln2(self.fc2(x)), LEAKY_SLOPE)
        return self.fc3(x)


class LatentDiscriminator(nn.Module):
    """Real-vs-generated critic over 128-d latents; training-side only."""

    def __init__(self, latent_dim: int = LATENT_DIM, hidden: int = GENERATOR_HIDDEN):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(latent_dim, hidden),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Linear(hidden, hidden),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Linear(hidden, 1),
        )

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        return self.net(z)
