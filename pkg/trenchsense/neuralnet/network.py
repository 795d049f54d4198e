"""Instantiated models: parameters, forward and reverse passes."""

import copy
import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.neuralnet.exceptions import ModelStateError
from trenchsense.neuralnet.layers import (
    AvgPool,
    BatchNorm,
    Conv2D,
    Dense,
    Flatten,
    Layer,
    MaxPool,
    ReLU,
)
from trenchsense.neuralnet.specs import (
    AvgPoolSpec,
    BatchNormSpec,
    Conv2DSpec,
    DenseSpec,
    FlattenSpec,
    MaxPoolSpec,
    ModelSpec,
    ReLUSpec,
)

logger = logging.getLogger(__name__)


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error over every sample and output."""
    return float(np.mean((predictions.astype(np.float64) - targets) ** 2))


class Network:
    """A ModelSpec with its parameters, running statistics and gradients.

    Inputs are (N, H, W, C) float batches matching ``spec.input_shape``;
    outputs are (N, 3). A network is created in training mode.
    """

    def __init__(self, spec: ModelSpec, seed: int = 0):
        """Build every layer, drawing initial weights from ``seed``."""
        self.spec = spec
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.layers: List[Layer] = []
        shape = tuple(spec.input_shape)
        layer_specs = zip(spec.all_layers(), spec.shapes(), strict=True)
        for layer_spec, out_shape in layer_specs:
            self.layers.append(self._build(layer_spec, shape, rng))
            shape = out_shape
        for layer in self.layers:
            if isinstance(layer, Conv2D):
                layer.propagate = False
                break
        self._predictions: Optional[np.ndarray] = None

    @staticmethod
    def _build(layer_spec, shape: tuple, rng: np.random.Generator) -> Layer:
        if isinstance(layer_spec, Conv2DSpec):
            return Conv2D(
                shape[-1],
                layer_spec.out_channels,
                layer_spec.kernel,
                layer_spec.stride,
                layer_spec.padding,
                rng=rng,
            )
        if isinstance(layer_spec, BatchNormSpec):
            return BatchNorm(layer_spec.channels)
        if isinstance(layer_spec, ReLUSpec):
            return ReLU()
        if isinstance(layer_spec, MaxPoolSpec):
            return MaxPool(layer_spec.size)
        if isinstance(layer_spec, AvgPoolSpec):
            return AvgPool(layer_spec.size)
        if isinstance(layer_spec, FlattenSpec):
            return Flatten()
        if isinstance(layer_spec, DenseSpec):
            return Dense(shape[0], layer_spec.out_features, rng=rng)
        raise DomainError(f"unknown layer {layer_spec!r}")

    @property
    def training(self) -> bool:
        """Whether batch normalisation uses batch statistics."""
        return self.layers[0].training

    def train_mode(self) -> "Network":
        """Use batch statistics and update running statistics."""
        for layer in self.layers:
            layer.training = True
        return self

    def eval_mode(self) -> "Network":
        """Use running statistics; outputs no longer depend on the batch."""
        for layer in self.layers:
            layer.training = False
        return self

    @property
    def dtype(self):
        """Floating point type of the parameters."""
        return next(self.parameters())[1].dtype

    def named(self, store: str) -> Iterator[Tuple[str, np.ndarray]]:
        """Iterate over ``params``, ``grads`` or ``buffers`` in layer order."""
        for index, layer in enumerate(self.layers):
            for name, value in getattr(layer, store).items():
                yield f"{index:02d}.{layer.kind}.{name}", value

    def parameters(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Trainable arrays, by name, in layer order."""
        return self.named("params")

    def gradients(self) -> Dict[str, np.ndarray]:
        """Gradients of the last backward pass, by parameter name."""
        return dict(self.named("grads"))

    def buffers(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Batch-norm running statistics, by name, in layer order."""
        return self.named("buffers")

    def parameter_count(self, include_buffers: bool = False) -> int:
        """Number of trainable scalars, plus running statistics if asked."""
        total = sum(value.size for _, value in self.parameters())
        if include_buffers:
            total += sum(value.size for _, value in self.buffers())
        return total

    def state(self) -> Dict[str, np.ndarray]:
        """Copy of every parameter and buffer."""
        return {
            name: value.copy()
            for name, value in (*self.parameters(), *self.buffers())
        }

    def load_state(self, state: Dict[str, np.ndarray]):
        """Overwrite parameters and buffers with a ``state()`` snapshot.

        Raises:
            DomainError: when a name or shape does not match.
        """
        targets = dict((*self.parameters(), *self.buffers()))
        if set(targets) != set(state):
            missing = sorted(set(targets) ^ set(state))
            raise DomainError(f"state does not match the network: {missing}")
        for name, target in targets.items():
            value = np.asarray(state[name])
            if value.shape != target.shape:
                raise DomainError(
                    f"{name} has shape {value.shape}, expected {target.shape}"
                )
            target[...] = value

    def astype(self, dtype) -> "Network":
        """Copy of the network with parameters and buffers cast to ``dtype``."""
        clone = copy.deepcopy(self)
        for layer in clone.layers:
            layer.astype(dtype)
            layer.clear()
        clone._predictions = None
        return clone

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Predict (N, 3) outputs and record the pass for ``backward``.

        Raises:
            DomainError: when the batch does not match the input shape.
        """
        batch = np.asarray(batch)
        if batch.ndim != 4 or batch.shape[1:] != tuple(self.spec.input_shape):
            raise DomainError(
                f"{self.spec.name} expects (N, *{tuple(self.spec.input_shape)}) "
                f"inputs, got {batch.shape}"
            )
        x = batch.astype(self.dtype, copy=False)
        for layer in self.layers:
            x = layer.forward(x)
        self._predictions = x
        return x

    def backward(
        self, targets: np.ndarray, scale: float = 1.0
    ) -> Dict[str, np.ndarray]:
        """Gradients of ``scale`` times the batch MSE against ``targets``.

        Raises:
            ModelStateError: when no forward pass was recorded.
        """
        if self._predictions is None:
            raise ModelStateError("backward called before forward")
        predictions = self._predictions
        targets = np.asarray(targets, dtype=predictions.dtype)
        if targets.shape != predictions.shape:
            raise DomainError(
                f"targets of shape {targets.shape} for predictions {predictions.shape}"
            )
        grad = (2.0 * scale / predictions.size) * (predictions - targets)
        grad = grad.astype(predictions.dtype)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
            if grad is None:
                break
        return self.gradients()

    def signature(self) -> List[np.ndarray]:
        """Activation pattern of the last forward pass (ReLU and max-pool)."""
        return [
            layer.signature()
            for layer in self.layers
            if layer.signature() is not None
        ]

    def predict(self, batch: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """Eval-mode predictions, in chunks; the recorded pass is discarded."""
        previous = self.training
        self.eval_mode()
        try:
            chunks = [
                self.forward(batch[start : start + batch_size])
                for start in range(0, len(batch), batch_size)
            ]
        finally:
            if previous:
                self.train_mode()
            self._predictions = None
            for layer in self.layers:
                layer.clear()
        if not chunks:
            return np.zeros((0, self.spec.head.out_features), dtype=self.dtype)
        return np.concatenate(chunks)
