"""Central finite-difference checks of the reverse pass, in float64.

A perturbed coordinate is skipped when either side of the difference changes
which units a ReLU keeps or which element a max-pool selects: the loss is not
differentiable across that switch.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from trenchsense.neuralnet.network import Network, mse_loss
from trenchsense.neuralnet.specs import (
    AvgPoolSpec,
    BatchNormSpec,
    Conv2DSpec,
    FlattenSpec,
    MaxPoolSpec,
    ModelSpec,
    ReLUSpec,
    output_shape,
)

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
TOLERANCE = 1e-3


@dataclass
class GradcheckReport:
    """Relative error of every checked tensor."""

    errors: Dict[str, float] = field(default_factory=dict)
    checked: int = 0
    skipped: int = 0

    @property
    def max_error(self) -> float:
        """Worst relative error over every tensor."""
        return max(self.errors.values(), default=0.0)

    def passed(self, tolerance: float = TOLERANCE) -> bool:
        """Whether every tensor agrees within ``tolerance``."""
        return self.max_error < tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max|a - n| over the largest magnitude of either tensor."""
    if analytic.size == 0:
        return 0.0
    scale = max(np.abs(analytic).max(), np.abs(numeric).max())
    if scale == 0:
        return 0.0
    return float(np.abs(analytic - numeric).max() / scale)


def _same(left: List[np.ndarray], right: List[np.ndarray]) -> bool:
    return len(left) == len(right) and all(
        np.array_equal(a, b) for a, b in zip(left, right, strict=True)
    )


def _check_tensors(
    tensors: List[Tuple[str, np.ndarray]],
    analytic: Dict[str, np.ndarray],
    loss: Callable[[], float],
    signature: Callable[[], List[np.ndarray]],
    base_signature: List[np.ndarray],
    step: float,
    report: GradcheckReport,
):
    for name, tensor in tensors:
        numeric = np.zeros_like(tensor)
        kept = np.zeros(tensor.shape, dtype=bool)
        for index in np.ndindex(tensor.shape):
            original = tensor[index]
            tensor[index] = original + step
            plus, plus_signature = loss(), signature()
            tensor[index] = original - step
            minus, minus_signature = loss(), signature()
            tensor[index] = original
            if not (
                _same(plus_signature, base_signature)
                and _same(minus_signature, base_signature)
            ):
                report.skipped += 1
                continue
            numeric[index] = (plus - minus) / (2 * step)
            kept[index] = True
            report.checked += 1
        report.errors[name] = relative_error(analytic[name][kept], numeric[kept])
        logger.debug("%s: relative error %.3e", name, report.errors[name])


def check_network(
    network: Network,
    batch: np.ndarray,
    targets: np.ndarray,
    step: float = DEFAULT_STEP,
) -> GradcheckReport:
    """Compare ``backward`` with central differences of the batch MSE.

    The network is copied to float64 and keeps its train or eval mode.
    """
    double = network.astype(np.float64)
    batch = np.asarray(batch, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)

    def loss() -> float:
        return mse_loss(double.forward(batch), targets)

    double.forward(batch)
    base_signature = [value.copy() for value in double.signature()]
    analytic = {
        name: value.copy() for name, value in double.backward(targets).items()
    }
    report = GradcheckReport()
    _check_tensors(
        list(double.parameters()),
        analytic,
        loss,
        double.signature,
        base_signature,
        step,
        report,
    )
    if report.skipped:
        logger.warning(
            "Skipped %s of %s coordinates at activation switches",
            report.skipped,
            report.skipped + report.checked,
        )
    return report


def check_layer(
    layer_spec,
    input_shape: Tuple[int, ...],
    batch: int = 2,
    seed: int = 0,
    step: float = DEFAULT_STEP,
) -> GradcheckReport:
    """Check one layer, parameters and input, on a random linear functional.

    The loss is ``sum(layer(x) * R)`` for a fixed random input ``x`` and
    projection ``R``.
    """
    rng = np.random.default_rng(seed)
    layer = Network._build(layer_spec, tuple(input_shape), rng)
    layer.astype(np.float64)
    if hasattr(layer, "propagate"):
        layer.propagate = True
    layer.training = True

    x = rng.normal(size=(batch, *input_shape))
    out_shape = output_shape(layer_spec, tuple(input_shape))
    projection = rng.normal(size=(batch, *out_shape))

    def loss() -> float:
        return float(np.sum(layer.forward(x) * projection))

    def signature() -> List[np.ndarray]:
        value = layer.signature()
        return [] if value is None else [value]

    layer.forward(x)
    base_signature = [value.copy() for value in signature()]
    d_input = layer.backward(projection)
    analytic = {name: value.copy() for name, value in layer.grads.items()}
    analytic["input"] = d_input

    report = GradcheckReport()
    _check_tensors(
        [*layer.params.items(), ("input", x)],
        analytic,
        loss,
        signature,
        base_signature,
        step,
        report,
    )
    return report


def gradient_spec(channels: int = 2, size: int = 8) -> ModelSpec:
    """Tiny model holding every layer type, for gradient checks."""
    return ModelSpec(
        name="tiny",
        input_shape=(size, size, channels),
        layers=[
            Conv2DSpec(out_channels=2, kernel=3, padding="same"),
            BatchNormSpec(channels=2),
            ReLUSpec(),
            MaxPoolSpec(size=2),
            Conv2DSpec(out_channels=2, kernel=3),
            BatchNormSpec(channels=2),
            ReLUSpec(),
            AvgPoolSpec(size=2),
            FlattenSpec(),
        ],
    )


def gradient_batch(
    spec: ModelSpec, batch: int = 4, seed: Optional[int] = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """Random inputs and targets for a model specification."""
    rng = np.random.default_rng(seed)
    inputs = rng.uniform(0.0, 1.0, size=(batch, *spec.input_shape))
    targets = rng.uniform(0.0, 1.0, size=(batch, spec.head.out_features))
    return inputs, targets
