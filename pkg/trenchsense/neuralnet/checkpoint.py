"""Checkpoint files.

Layout::

    8 bytes   magic b"TSCKPT\\r\\n"
    4 bytes   format version, little-endian uint32
    4 bytes   header length in bytes, little-endian uint32
    n bytes   UTF-8 JSON header: model spec, spec hash, array manifest, metadata
    rest      every parameter then every batch-norm buffer, in layer order,
              as little-endian float32
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from trenchsense.neuralnet.exceptions import CheckpointError
from trenchsense.neuralnet.layers import BN_EPSILON, BN_MOMENTUM
from trenchsense.neuralnet.network import Network
from trenchsense.neuralnet.specs import ModelSpec

logger = logging.getLogger(__name__)

MAGIC = b"TSCKPT\r\n"
FORMAT_VERSION = 1
PREFIX = struct.Struct("<8sII")
BLOB_DTYPE = np.dtype("<f4")


def save_checkpoint(
    network: Network, path: Path, metadata: Optional[Dict[str, Any]] = None
) -> Path:
    """Write a network's parameters and running statistics.

    Raises:
        CheckpointError: when the file cannot be written.
    """
    path = Path(path)
    arrays = [*network.parameters(), *network.buffers()]
    header = {
        "spec": network.spec.model_dump(mode="json"),
        "spec_hash": network.spec.spec_hash(),
        "arrays": [
            {"name": name, "shape": list(value.shape)} for name, value in arrays
        ],
        "metadata": {
            "init_seed": network.seed,
            "batchnorm_epsilon": BN_EPSILON,
            "batchnorm_momentum": BN_MOMENTUM,
            **(metadata or {}),
        },
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    blob = b"".join(
        np.ascontiguousarray(value, dtype=BLOB_DTYPE).tobytes() for _, value in arrays
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(
            PREFIX.pack(MAGIC, FORMAT_VERSION, len(encoded)) + encoded + blob
        )
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info("Saved %s checkpoint to %s", network.spec.name, path)
    return path


def read_header(path: Path) -> Tuple[Dict[str, Any], bytes]:
    """Read and check the prefix and header; return the header and the blob."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    if len(payload) < PREFIX.size:
        raise CheckpointError(f"{path} is shorter than the checkpoint prefix")
    magic, version, length = PREFIX.unpack_from(payload)
    if magic != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path} uses unsupported checkpoint version {version}")
    end = PREFIX.size + length
    if len(payload) < end:
        raise CheckpointError(f"{path} is truncated inside its header")
    try:
        header = json.loads(payload[PREFIX.size : end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path} has a corrupt header: {e}") from e
    return header, payload[end:]


def load_checkpoint(
    path: Path, expected: Optional[ModelSpec] = None
) -> Tuple[Network, Dict[str, Any]]:
    """Rebuild a network, in eval mode, and return it with its metadata.

    Args:
        path: Checkpoint file.
        expected: When given, the checkpoint must hold exactly this model.

    Raises:
        CheckpointError: on a magic or version mismatch, a truncated blob, a
            spec hash that does not match the stored spec or ``expected``.
    """
    header, blob = read_header(path)
    try:
        spec = ModelSpec.model_validate(header["spec"])
    except (KeyError, ValidationError) as e:
        raise CheckpointError(f"{path} holds an invalid model spec: {e}") from e
    if spec.spec_hash() != header.get("spec_hash"):
        raise CheckpointError(f"{path}: the stored spec does not match its hash")
    if expected is not None and expected.spec_hash() != spec.spec_hash():
        raise CheckpointError(
            f"{path} holds a {spec.name} model, cannot load it as {expected.name}"
        )

    network = Network(spec, seed=header.get("metadata", {}).get("init_seed", 0))
    manifest = header.get("arrays", [])
    names = [name for name, _ in (*network.parameters(), *network.buffers())]
    if [entry["name"] for entry in manifest] != names:
        raise CheckpointError(f"{path}: the array manifest does not match {spec.name}")

    expected_size = sum(int(np.prod(entry["shape"])) for entry in manifest)
    if len(blob) != expected_size * BLOB_DTYPE.itemsize:
        raise CheckpointError(
            f"{path} holds {len(blob)} parameter bytes, "
            f"expected {expected_size * BLOB_DTYPE.itemsize}"
        )
    values = np.frombuffer(blob, dtype=BLOB_DTYPE)
    state = {}
    offset = 0
    for entry in manifest:
        size = int(np.prod(entry["shape"]))
        state[entry["name"]] = (
            values[offset : offset + size].reshape(entry["shape"]).astype(np.float32)
        )
        offset += size
    network.load_state(state)
    network.eval_mode()
    return network, header.get("metadata", {})
