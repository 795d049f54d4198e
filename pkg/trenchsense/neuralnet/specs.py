"""Declarative model specifications and the CNN_n family."""

import logging
from typing import Annotated, Callable, Dict, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from trenchsense.core.exceptions import DomainError
from trenchsense.core.utils import stable_hash

logger = logging.getLogger(__name__)

INPUT_SHAPE = (60, 60, 25)
OUTPUTS = 3

Shape = Tuple[int, ...]


class _LayerSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Conv2DSpec(_LayerSpec):
    """Convolution with an odd square kernel."""

    kind: Literal["conv2d"] = "conv2d"
    out_channels: int = Field(gt=0)
    kernel: int = Field(gt=0)
    stride: int = Field(default=1, gt=0)
    padding: Literal["valid", "same"] = "valid"


class BatchNormSpec(_LayerSpec):
    """Batch normalisation over ``channels`` feature maps."""

    kind: Literal["batchnorm"] = "batchnorm"
    channels: int = Field(gt=0)


class ReLUSpec(_LayerSpec):
    """Rectified linear unit."""

    kind: Literal["relu"] = "relu"


class MaxPoolSpec(_LayerSpec):
    """Non-overlapping max pooling."""

    kind: Literal["maxpool"] = "maxpool"
    size: int = Field(default=2, gt=0)


class AvgPoolSpec(_LayerSpec):
    """Non-overlapping average pooling."""

    kind: Literal["avgpool"] = "avgpool"
    size: int = Field(default=2, gt=0)


class FlattenSpec(_LayerSpec):
    """Flatten to one vector per sample."""

    kind: Literal["flatten"] = "flatten"


class DenseSpec(_LayerSpec):
    """Fully connected layer."""

    kind: Literal["dense"] = "dense"
    out_features: int = Field(gt=0)


LayerSpec = Annotated[
    Union[
        Conv2DSpec,
        BatchNormSpec,
        ReLUSpec,
        MaxPoolSpec,
        AvgPoolSpec,
        FlattenSpec,
        DenseSpec,
    ],
    Field(discriminator="kind"),
]


def output_shape(layer: _LayerSpec, shape: Shape) -> Shape:
    """Static output shape of one layer for a per-sample input shape.

    Raises:
        DomainError: when the layer cannot consume that shape.
    """
    if isinstance(layer, Conv2DSpec):
        if len(shape) != 3:
            raise DomainError(f"conv2d expects an (H, W, C) input, got {shape}")
        if layer.kernel % 2 != 1:
            raise DomainError(f"conv2d kernel must be odd, got {layer.kernel}")
        height, width, _ = shape
        pad = (layer.kernel - 1) // 2 if layer.padding == "same" else 0
        out_h = (height + 2 * pad - layer.kernel) // layer.stride + 1
        out_w = (width + 2 * pad - layer.kernel) // layer.stride + 1
        if out_h < 1 or out_w < 1:
            raise DomainError(f"conv2d kernel {layer.kernel} exceeds input {shape}")
        return (out_h, out_w, layer.out_channels)
    if isinstance(layer, BatchNormSpec):
        if shape[-1] != layer.channels:
            raise DomainError(
                f"batchnorm over {layer.channels} channels got input {shape}"
            )
        return shape
    if isinstance(layer, ReLUSpec):
        return shape
    if isinstance(layer, (MaxPoolSpec, AvgPoolSpec)):
        if len(shape) != 3 or shape[0] < layer.size or shape[1] < layer.size:
            raise DomainError(f"{layer.kind} of size {layer.size} cannot pool {shape}")
        return (shape[0] // layer.size, shape[1] // layer.size, shape[2])
    if isinstance(layer, FlattenSpec):
        size = 1
        for extent in shape:
            size *= extent
        return (size,)
    if isinstance(layer, DenseSpec):
        if len(shape) != 1:
            raise DomainError(f"dense expects a flat input, got {shape}")
        return (layer.out_features,)
    raise DomainError(f"unknown layer {layer!r}")


class ModelSpec(BaseModel):
    """A sequential model: body layers then a dense head."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    input_shape: Tuple[int, int, int] = INPUT_SHAPE
    layers: List[LayerSpec]
    head: DenseSpec = DenseSpec(out_features=OUTPUTS)

    @model_validator(mode="after")
    def check_shapes(self):
        """Run static shape inference end to end."""
        if self.head.out_features != OUTPUTS:
            raise ValueError(f"the head must output {OUTPUTS} values")
        self.shapes()
        return self

    def all_layers(self) -> List[_LayerSpec]:
        """Body layers followed by the head."""
        return [*self.layers, self.head]

    def shapes(self) -> List[Shape]:
        """Per-sample output shape of every layer, head included."""
        shape: Shape = tuple(self.input_shape)
        shapes = []
        for layer in self.all_layers():
            shape = output_shape(layer, shape)
            shapes.append(shape)
        return shapes

    def conv_output_shapes(self) -> List[Shape]:
        """Output shapes of the convolutions, in order."""
        return [
            shape
            for layer, shape in zip(self.all_layers(), self.shapes(), strict=True)
            if isinstance(layer, Conv2DSpec)
        ]

    def parameter_count(self, include_buffers: bool = False) -> int:
        """Number of trainable scalars, plus batch-norm running statistics."""
        total = 0
        shape: Shape = tuple(self.input_shape)
        for layer in self.all_layers():
            if isinstance(layer, Conv2DSpec):
                total += (layer.kernel**2 * shape[-1] + 1) * layer.out_channels
            elif isinstance(layer, BatchNormSpec):
                total += (4 if include_buffers else 2) * layer.channels
            elif isinstance(layer, DenseSpec):
                total += (shape[0] + 1) * layer.out_features
            shape = output_shape(layer, shape)
        return total

    def spec_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the specification."""
        return stable_hash(self.model_dump(mode="json"))


def conv_block(out_channels: int, kernel: int, padding: str = "valid") -> list:
    """A convolution followed by batch normalisation and ReLU."""
    return [
        Conv2DSpec(out_channels=out_channels, kernel=kernel, padding=padding),
        BatchNormSpec(channels=out_channels),
        ReLUSpec(),
    ]


def _cnn_1() -> ModelSpec:
    return ModelSpec(
        name="CNN_1",
        layers=[
            *conv_block(64, 7),
            MaxPoolSpec(size=2),
            AvgPoolSpec(size=3),
            FlattenSpec(),
        ],
    )


def _cnn_3() -> ModelSpec:
    return ModelSpec(
        name="CNN_3",
        layers=[
            *conv_block(64, 7),
            MaxPoolSpec(size=2),
            *conv_block(64, 3),
            MaxPoolSpec(size=2),
            *conv_block(128, 3, "same"),
            AvgPoolSpec(size=2),
            FlattenSpec(),
        ],
    )


def _cnn_5_body() -> list:
    return [
        *conv_block(64, 7),
        MaxPoolSpec(size=2),
        *conv_block(64, 3),
        MaxPoolSpec(size=2),
        *conv_block(96, 3, "same"),
        *conv_block(128, 3, "same"),
        *conv_block(128, 3),
    ]


def _cnn_5() -> ModelSpec:
    return ModelSpec(
        name="CNN_5",
        layers=[*_cnn_5_body(), AvgPoolSpec(size=2), FlattenSpec()],
    )


def _cnn_7() -> ModelSpec:
    return ModelSpec(
        name="CNN_7",
        layers=[
            *_cnn_5_body(),
            *conv_block(128, 3, "same"),
            *conv_block(128, 3, "same"),
            AvgPoolSpec(size=2),
            FlattenSpec(),
        ],
    )


MODEL_REGISTRY: Dict[str, Callable[[], ModelSpec]] = {
    "CNN_1": _cnn_1,
    "CNN_3": _cnn_3,
    "CNN_5": _cnn_5,
    "CNN_7": _cnn_7,
}


def build_model(name: str) -> ModelSpec:
    """Return the specification of a model of the CNN_n family.

    Raises:
        DomainError: when the name is not part of the family.
    """
    try:
        factory = MODEL_REGISTRY[name]
    except KeyError as e:
        raise DomainError(
            f"Model '{name}' not found. Available models: {list(MODEL_REGISTRY)}"
        ) from e
    spec = factory()
    logger.debug("Built %s with %s parameters", name, spec.parameter_count())
    return spec
