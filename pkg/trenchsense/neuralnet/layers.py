"""Layers of the dense-tensor engine.

Activations are channels-last arrays, ``(N, H, W, C)`` for images and
``(N, D)`` after flattening. Every layer caches what its backward pass needs
during ``forward`` and fills ``grads`` with the gradients of its parameters
in ``backward``, returning the gradient with respect to its input.
"""

import math
from typing import Dict, Optional

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.neuralnet.exceptions import ModelStateError

BN_EPSILON = 1e-5
BN_MOMENTUM = 0.9


def he_uniform(
    rng: np.random.Generator, shape: tuple, fan_in: int, dtype=np.float32
) -> np.ndarray:
    """Draw weights uniformly in ±sqrt(6 / fan_in)."""
    limit = math.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    """Base of every layer."""

    kind = "layer"

    def __init__(self):
        """Start with no parameters and no recorded forward pass."""
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.buffers: Dict[str, np.ndarray] = {}
        self.training = True
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Compute the layer output and record what backward needs."""
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Propagate the output gradient, filling ``grads``."""
        raise NotImplementedError

    def signature(self) -> Optional[np.ndarray]:
        """Discrete choices of the last forward pass, for piecewise layers."""
        return None

    def clear(self):
        """Forget the recorded forward pass."""
        self._cache = None

    def astype(self, dtype):
        """Cast parameters and buffers in place."""
        for store in (self.params, self.buffers):
            for name, value in store.items():
                store[name] = value.astype(dtype)
        self.grads = {}

    def _recorded(self):
        if self._cache is None:
            raise ModelStateError(f"{self.kind} backward called before forward")
        return self._cache


class Conv2D(Layer):
    """2D convolution with an odd square kernel, as kernel-offset matmuls."""

    kind = "conv2d"

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int,
        stride: int = 1,
        padding: str = "valid",
        rng: Optional[np.random.Generator] = None,
    ):
        """Initialise He-uniform weights of shape (k, k, in, out) and zero bias."""
        super().__init__()
        if kernel % 2 != 1:
            raise DomainError(f"conv2d kernel must be odd, got {kernel}")
        self.kernel = kernel
        self.stride = stride
        self.pad = (kernel - 1) // 2 if padding == "same" else 0
        # The first layer of a network has no use for its input gradient
        self.propagate = True
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params["weight"] = he_uniform(
            rng,
            (kernel, kernel, in_channels, out_channels),
            kernel * kernel * in_channels,
        )
        self.params["bias"] = np.zeros(out_channels, dtype=np.float32)

    def _window(self, offset: int, extent: int) -> slice:
        return slice(offset, offset + self.stride * (extent - 1) + 1, self.stride)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Convolve a (N, H, W, C) batch."""
        weight = self.params["weight"]
        k, p = self.kernel, self.pad
        n, height, width, channels = x.shape
        padded = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        out_h = (height + 2 * p - k) // self.stride + 1
        out_w = (width + 2 * p - k) // self.stride + 1
        out = np.zeros((n * out_h * out_w, weight.shape[-1]), dtype=weight.dtype)
        for i in range(k):
            for j in range(k):
                patch = padded[:, self._window(i, out_h), self._window(j, out_w), :]
                out += patch.reshape(-1, channels) @ weight[i, j]
        out += self.params["bias"]
        self._cache = (padded, x.shape)
        return out.reshape(n, out_h, out_w, -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Gradients of weight, bias and (when propagating) input."""
        padded, shape = self._recorded()
        weight = self.params["weight"]
        k, p = self.kernel, self.pad
        n, out_h, out_w, out_channels = grad.shape
        channels = shape[-1]
        flat = grad.reshape(-1, out_channels)
        d_weight = np.zeros_like(weight)
        d_padded = np.zeros_like(padded) if self.propagate else None
        for i in range(k):
            for j in range(k):
                rows, cols = self._window(i, out_h), self._window(j, out_w)
                patch = padded[:, rows, cols, :].reshape(-1, channels)
                d_weight[i, j] = patch.T @ flat
                if d_padded is not None:
                    d_padded[:, rows, cols, :] += (flat @ weight[i, j].T).reshape(
                        n, out_h, out_w, channels
                    )
        self.grads = {"weight": d_weight, "bias": flat.sum(axis=0)}
        if d_padded is None:
            return None
        if p:
            d_padded = d_padded[:, p:-p, p:-p, :]
        return d_padded


class BatchNorm(Layer):
    """Per-channel batch normalisation over every axis but the last."""

    kind = "batchnorm"

    def __init__(
        self, channels: int, momentum: float = BN_MOMENTUM, epsilon: float = BN_EPSILON
    ):
        """Unit scale, zero shift, running statistics at (0, 1)."""
        super().__init__()
        self.momentum = momentum
        self.epsilon = epsilon
        self.params["gamma"] = np.ones(channels, dtype=np.float32)
        self.params["beta"] = np.zeros(channels, dtype=np.float32)
        self.buffers["running_mean"] = np.zeros(channels, dtype=np.float32)
        self.buffers["running_var"] = np.ones(channels, dtype=np.float32)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Normalise with batch statistics in training, running ones otherwise."""
        axes = tuple(range(x.ndim - 1))
        if self.training:
            count = x.size // x.shape[-1]
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            unbiased = var * count / (count - 1) if count > 1 else var
            keep = self.momentum
            running_mean = self.buffers["running_mean"]
            running_var = self.buffers["running_var"]
            running_mean[...] = keep * running_mean + (1 - keep) * mean
            running_var[...] = keep * running_var + (1 - keep) * unbiased
        else:
            mean = self.buffers["running_mean"]
            var = self.buffers["running_var"]
        inv_std = (1.0 / np.sqrt(var + self.epsilon)).astype(x.dtype)
        normalised = (x - mean.astype(x.dtype)) * inv_std
        self._cache = (normalised, inv_std, self.training)
        return normalised * self.params["gamma"] + self.params["beta"]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Gradients of scale, shift and input."""
        normalised, inv_std, batch_statistics = self._recorded()
        axes = tuple(range(grad.ndim - 1))
        self.grads = {
            "gamma": (grad * normalised).sum(axis=axes),
            "beta": grad.sum(axis=axes),
        }
        d_normalised = grad * self.params["gamma"]
        if not batch_statistics:
            return d_normalised * inv_std
        count = grad.size // grad.shape[-1]
        return (inv_std / count) * (
            count * d_normalised
            - d_normalised.sum(axis=axes)
            - normalised * (d_normalised * normalised).sum(axis=axes)
        )


class ReLU(Layer):
    """Rectified linear unit."""

    kind = "relu"

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Zero the negative activations."""
        mask = x > 0
        self._cache = mask
        return np.where(mask, x, 0).astype(x.dtype)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Pass the gradient where the input was positive."""
        return np.where(self._recorded(), grad, 0).astype(grad.dtype)

    def signature(self) -> Optional[np.ndarray]:
        """Active units."""
        return self._cache


def _blocks(x: np.ndarray, size: int) -> np.ndarray:
    """Split (N, H, W, C) into (N, H//k, W//k, C, k*k) non-overlapping windows."""
    n, height, width, channels = x.shape
    out_h, out_w = height // size, width // size
    trimmed = x[:, : out_h * size, : out_w * size, :]
    return (
        trimmed.reshape(n, out_h, size, out_w, size, channels)
        .transpose(0, 1, 3, 5, 2, 4)
        .reshape(n, out_h, out_w, channels, size * size)
    )


def _unblocks(blocks: np.ndarray, size: int, shape: tuple) -> np.ndarray:
    """Inverse of ``_blocks``, zero on rows and columns the pooling dropped."""
    n, out_h, out_w, channels, _ = blocks.shape
    out = np.zeros(shape, dtype=blocks.dtype)
    out[:, : out_h * size, : out_w * size, :] = (
        blocks.reshape(n, out_h, out_w, channels, size, size)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, out_h * size, out_w * size, channels)
    )
    return out


class MaxPool(Layer):
    """Non-overlapping max pooling; trailing rows and columns are dropped."""

    kind = "maxpool"

    def __init__(self, size: int):
        """Pool over size×size windows."""
        super().__init__()
        self.size = size

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Keep the maximum of every window."""
        blocks = _blocks(x, self.size)
        index = blocks.argmax(axis=-1)
        self._cache = (index, x.shape)
        return np.take_along_axis(blocks, index[..., None], axis=-1)[..., 0]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Route the gradient to the selected element of every window."""
        index, shape = self._recorded()
        blocks = np.zeros((*grad.shape, self.size * self.size), dtype=grad.dtype)
        np.put_along_axis(blocks, index[..., None], grad[..., None], axis=-1)
        return _unblocks(blocks, self.size, shape)

    def signature(self) -> Optional[np.ndarray]:
        """Selected element of every window."""
        return None if self._cache is None else self._cache[0]


class AvgPool(Layer):
    """Non-overlapping average pooling; trailing rows and columns are dropped."""

    kind = "avgpool"

    def __init__(self, size: int):
        """Pool over size×size windows."""
        super().__init__()
        self.size = size

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Average every window."""
        self._cache = x.shape
        return _blocks(x, self.size).mean(axis=-1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Spread the gradient evenly over every window."""
        shape = self._recorded()
        area = self.size * self.size
        blocks = np.repeat(grad[..., None] / area, area, axis=-1)
        return _unblocks(blocks.astype(grad.dtype), self.size, shape)


class Flatten(Layer):
    """Flatten every sample, row-major over (H, W, C)."""

    kind = "flatten"

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Reshape to (N, H*W*C)."""
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Restore the image shape."""
        return grad.reshape(self._recorded())


class Dense(Layer):
    """Fully connected layer."""

    kind = "dense"

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: Optional[np.random.Generator] = None,
    ):
        """Initialise He-uniform weights of shape (in, out) and zero bias."""
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params["weight"] = he_uniform(
            rng, (in_features, out_features), in_features
        )
        self.params["bias"] = np.zeros(out_features, dtype=np.float32)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Affine map of a (N, D) batch."""
        self._cache = x
        return x @ self.params["weight"] + self.params["bias"]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        """Gradients of weight, bias and input."""
        x = self._recorded()
        self.grads = {"weight": x.T @ grad, "bias": grad.sum(axis=0)}
        return grad @ self.params["weight"].T
