"""Dense/convolution/normalization primitives on plain numpy arrays.

Images are HxWxC row-major, kernels (kh, kw, c_in, c_out), dense weights
(d_in, d_out). Values are stored as float32; reductions accumulate in
float64 so results are reproducible across BLAS builds and thread counts,
then round back to float32.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError


def _as_f32(x: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(x)
    if not np.issubdtype(arr.dtype, np.floating):
        raise InvalidArgumentError(f"{what} must be a float array")
    return arr.astype(np.float32, copy=False)


def conv2d(x: np.ndarray, kernel: np.ndarray, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Cross-correlation of an HxWxC image with a (kh, kw, C, O) kernel."""
    x = _as_f32(x, "conv2d input")
    kernel = _as_f32(kernel, "conv2d kernel")
    if x.ndim != 3 or kernel.ndim != 4:
        raise InvalidArgumentError("conv2d expects HxWxC input and 4-D kernel")
    if stride < 1 or padding < 0:
        raise InvalidArgumentError("stride must be >= 1 and padding >= 0")
    h, w, c = x.shape
    kh, kw, c_in, c_out = kernel.shape
    if c_in != c:
        raise InvalidArgumentError(f"kernel expects {c_in} channels, input has {c}")
    h_out = (h + 2 * padding - kh) // stride + 1
    w_out = (w + 2 * padding - kw) // stride + 1
    if h_out < 1 or w_out < 1:
        raise InvalidArgumentError("kernel larger than padded input")
    xp = np.pad(x, ((padding, padding), (padding, padding), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(0, 1))
    win = win[::stride, ::stride][:h_out, :w_out]          # (h_out, w_out, C, kh, kw)
    cols = win.transpose(0, 1, 3, 4, 2).reshape(h_out * w_out, kh * kw * c)
    out = cols.astype(np.float64) @ kernel.reshape(-1, c_out).astype(np.float64)
    return out.reshape(h_out, w_out, c_out).astype(np.float32)


def conv2d_transpose(x: np.ndarray, kernel: np.ndarray, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Transposed convolution; inverts the shape map of the paired conv2d.

    Output is (h-1)*stride - 2*padding + kh per side. Kernel layout matches
    conv2d: (kh, kw, c_in, c_out) with c_in the input channels of this op.
    """
    x = _as_f32(x, "conv2d_transpose input")
    kernel = _as_f32(kernel, "conv2d_transpose kernel")
    if x.ndim != 3 or kernel.ndim != 4:
        raise InvalidArgumentError("conv2d_transpose expects HxWxC input and 4-D kernel")
    if stride < 1 or padding < 0:
        raise InvalidArgumentError("stride must be >= 1 and padding >= 0")
    h, w, c = x.shape
    kh, kw, c_in, c_out = kernel.shape
    if c_in != c:
        raise InvalidArgumentError(f"kernel expects {c_in} channels, input has {c}")
    if kh != kw:
        raise InvalidArgumentError("conv2d_transpose supports square kernels only")
    if kh - 1 - padding < 0:
        raise InvalidArgumentError("padding exceeds kernel extent")
    dilated = np.zeros(((h - 1) * stride + 1, (w - 1) * stride + 1, c), dtype=np.float32)
    dilated[::stride, ::stride] = x
    flipped = kernel[::-1, ::-1]                            # rotate spatially
    return conv2d(dilated, flipped, stride=1, padding=kh - 1 - padding)


def dense(x: np.ndarray, weight: np.ndarray, bias: np.ndarray | None = None) -> np.ndarray:
    """x @ weight + bias for a (d_in,) vector or (n, d_in) batch."""
    x = _as_f32(x, "dense input")
    weight = _as_f32(weight, "dense weight")
    if weight.ndim != 2 or x.shape[-1] != weight.shape[0]:
        raise InvalidArgumentError(
            f"dense shape mismatch: input {x.shape} vs weight {weight.shape}"
        )
    out = x.astype(np.float64) @ weight.astype(np.float64)
    if bias is not None:
        bias = _as_f32(bias, "dense bias")
        if bias.shape != (weight.shape[1],):
            raise InvalidArgumentError("bias length must match weight output dim")
        out = out + bias.astype(np.float64)
    return out.astype(np.float32)


def layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Normalize over the last (feature) axis, then scale and shift."""
    x = _as_f32(x, "layer_norm input")
    gamma = _as_f32(gamma, "layer_norm gamma")
    beta = _as_f32(beta, "layer_norm beta")
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise InvalidArgumentError("gamma/beta must match the feature axis")
    x64 = x.astype(np.float64)
    mu = x64.mean(axis=-1, keepdims=True)
    var = x64.var(axis=-1, keepdims=True)
    normed = (x64 - mu) / np.sqrt(var + eps)
    return (normed * gamma.astype(np.float64) + beta.astype(np.float64)).astype(np.float32)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(_as_f32(x, "relu input"), np.float32(0.0))


def leaky_relu(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    x = _as_f32(x, "leaky_relu input")
    return np.where(x >= 0, x, np.float32(slope) * x).astype(np.float32)
