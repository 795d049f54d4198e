"""Dataset manifest, reproducible stratified splits and split loading."""

import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from trenchsense.core.exceptions import DataError, DomainError
from trenchsense.dataset.samples import read_sample
from trenchsense.optics.geometry import DEFAULT_WINDOW_MM

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
SPLITS = ("train", "val", "test")
MIN_SAMPLES_PER_POINT = 3

SplitName = Literal["train", "val", "test"]


class StratificationError(DataError):
    """Raised when a contact point has too few samples to appear in every split."""


class ManifestEntry(BaseModel):
    """One sample file and its provenance."""

    model_config = ConfigDict(frozen=True)

    path: str
    label: Tuple[float, float, float]
    seed: int
    point: Tuple[float, float]
    split: Optional[SplitName] = None


class DatasetManifest(BaseModel):
    """Index of a generated dataset."""

    model_config = ConfigDict(frozen=True)

    format_version: int = MANIFEST_VERSION
    generator_config_hash: str
    seed: int
    split_seed: Optional[int] = None
    window: float = DEFAULT_WINDOW_MM
    entries: List[ManifestEntry] = []

    @model_validator(mode="after")
    def check_unique_paths(self):
        """Reject manifests listing the same sample twice."""
        paths = [entry.path for entry in self.entries]
        if len(paths) != len(set(paths)):
            raise ValueError("a sample path appears more than once")
        return self

    def write(self, path: Path) -> Path:
        """Write the manifest as JSON."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.model_dump_json(indent=1) + "\n", encoding="utf-8")
        except OSError as e:
            raise DataError(f"Cannot write manifest {path}: {e}") from e
        return path

    @classmethod
    def read(cls, path: Path) -> "DatasetManifest":
        """Read a manifest written by ``write``."""
        path = Path(path)
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise DataError(f"Cannot read manifest {path}: {e}") from e
        except ValidationError as e:
            raise DataError(f"Invalid manifest {path}: {e}") from e

    def entries_of(self, split: SplitName) -> List[ManifestEntry]:
        """Entries assigned to a split."""
        return [entry for entry in self.entries if entry.split == split]


def _allocate(
    sizes: Dict[Tuple[float, float], int], fraction: float, target: int, floor: int
) -> Dict[Tuple[float, float], int]:
    """Spread ``target`` samples over groups by largest remainder, >= floor each."""
    quotas = {point: fraction * size for point, size in sizes.items()}
    counts = {point: max(floor, math.floor(quota)) for point, quota in quotas.items()}
    order = sorted(quotas, key=lambda point: quotas[point] - math.floor(quotas[point]))
    missing = target - sum(counts.values())
    # Hand out (or take back) single samples, largest remainders first
    for point in reversed(order):
        if missing <= 0:
            break
        counts[point] += 1
        missing -= 1
    for point in order:
        if missing >= 0:
            break
        if counts[point] > floor:
            counts[point] -= 1
            missing += 1
    return counts


def split(
    manifest: DatasetManifest,
    fractions: Sequence[float] = (0.70, 0.15, 0.15),
    seed: int = 0,
) -> DatasetManifest:
    """Assign every entry to train, val or test, stratified by contact point.

    Split sizes are the rounded fractions of the total count. Each contact
    point contributes at least one sample to every split; inside a point the
    assignment is a seeded random permutation.

    Raises:
        DomainError: when the fractions do not sum to one.
        StratificationError: when a contact point has fewer than 3 samples.
    """
    if len(fractions) != len(SPLITS) or not math.isclose(sum(fractions), 1.0):
        raise DomainError(
            f"split fractions must be three values summing to 1: {fractions}"
        )

    groups: Dict[Tuple[float, float], List[int]] = defaultdict(list)
    for index, entry in enumerate(manifest.entries):
        groups[entry.point].append(index)
    for point, members in groups.items():
        if len(members) < MIN_SAMPLES_PER_POINT:
            raise StratificationError(
                f"contact point {point} has {len(members)} samples, "
                f"at least {MIN_SAMPLES_PER_POINT} are needed"
            )

    total = len(manifest.entries)
    sizes = {point: len(members) for point, members in groups.items()}
    val = _allocate(sizes, fractions[1], round(fractions[1] * total), floor=1)
    test = _allocate(sizes, fractions[2], round(fractions[2] * total), floor=1)

    rng = np.random.default_rng(seed)
    assignment: List[Optional[str]] = [None] * total
    for point in sorted(groups):
        members = groups[point]
        order = rng.permutation(len(members))
        n_val, n_test = val[point], test[point]
        if n_val + n_test >= len(members):
            raise StratificationError(
                f"contact point {point} leaves no training sample"
            )
        for rank, position in enumerate(order):
            if rank < n_val:
                name = "val"
            elif rank < n_val + n_test:
                name = "test"
            else:
                name = "train"
            assignment[members[position]] = name

    entries = [
        entry.model_copy(update={"split": name})
        for entry, name in zip(manifest.entries, assignment, strict=True)
    ]
    counts = {name: assignment.count(name) for name in SPLITS}
    logger.info("Split %s samples into %s", total, counts)
    return manifest.model_copy(update={"entries": entries, "split_seed": seed})


def load_split(
    manifest: DatasetManifest, root: Path, name: SplitName
) -> Tuple[np.ndarray, np.ndarray]:
    """Load the channels (N, 25, 60, 60) and labels (N, 3) of one split."""
    entries = manifest.entries_of(name)
    if not entries:
        raise DataError(f"the {name} split is empty")
    samples = [
        read_sample(Path(root) / entry.path, manifest.window) for entry in entries
    ]
    channels = np.stack([sample.channels for sample in samples])
    labels = np.array([sample.label for sample in samples], dtype=np.float64)
    return channels, labels
