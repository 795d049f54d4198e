"""
Test the dataset manifest and its stratified splits
"""

from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from trenchsense.core.exceptions import DataError, DomainError
from trenchsense.dataset.manifest import (
    DatasetManifest,
    ManifestEntry,
    StratificationError,
    load_split,
    split,
)
from trenchsense.dataset.samples import Sample, write_sample


def _manifest(points=10, per_point=10):
    entries = [
        ManifestEntry(
            path=f"samples/p{p:03d}_r{r:03d}.tsb",
            label=(4.0 + p, 8.0, 0.5),
            seed=p * 100 + r,
            point=(1.0 + p % 5, 1.0 + p // 5),
        )
        for p in range(points)
        for r in range(per_point)
    ]
    return DatasetManifest(generator_config_hash="h", seed=0, entries=entries)


def test_split_sizes():
    """100 samples split into 70, 15 and 15."""
    result = split(_manifest(), seed=3)

    counts = Counter(entry.split for entry in result.entries)
    assert counts == {"train": 70, "val": 15, "test": 15}
    assert result.split_seed == 3


def test_split_is_stratified_by_point():
    """Every contact point appears in every split."""
    result = split(_manifest(points=7, per_point=9), seed=1)

    for name in ("train", "val", "test"):
        points = {entry.point for entry in result.entries_of(name)}
        assert len(points) == 7


def test_split_sizes_for_uneven_counts():
    """Split sizes are the rounded fractions of the total."""
    result = split(_manifest(points=7, per_point=9), seed=1)

    counts = Counter(entry.split for entry in result.entries)
    assert counts["val"] == round(0.15 * 63)
    assert counts["test"] == round(0.15 * 63)
    assert sum(counts.values()) == 63


def test_split_is_reproducible():
    """The same seed assigns the same entries; another seed shuffles them."""
    manifest = _manifest()

    first = [entry.split for entry in split(manifest, seed=5).entries]
    again = [entry.split for entry in split(manifest, seed=5).entries]
    other = [entry.split for entry in split(manifest, seed=6).entries]

    assert first == again
    assert first != other


def test_split_rejects_sparse_points():
    """A point with fewer than three samples cannot be stratified."""
    with pytest.raises(StratificationError, match="has 2 samples"):
        split(_manifest(points=2, per_point=2))


@pytest.mark.parametrize("fractions", [(0.5, 0.5, 0.5), (0.8, 0.2)])
def test_split_rejects_bad_fractions(fractions):
    """Fractions must be three values summing to one."""
    with pytest.raises(DomainError, match="split fractions"):
        split(_manifest(), fractions)


def test_manifest_rejects_duplicate_paths():
    """A sample may only be listed once."""
    entry = ManifestEntry(path="a.tsb", label=(1.0, 1.0, 1.0), seed=0, point=(1, 1))

    with pytest.raises(ValidationError, match="appears more than once"):
        DatasetManifest(generator_config_hash="h", seed=0, entries=[entry, entry])


def test_manifest_write_and_read(tmp_path):
    """A written manifest reads back equal."""
    manifest = split(_manifest(points=3, per_point=5))

    path = manifest.write(tmp_path / "data" / "manifest.json")

    assert DatasetManifest.read(path) == manifest


def test_manifest_read_errors(tmp_path):
    """Missing or malformed manifests are data errors."""
    with pytest.raises(DataError, match="Cannot read manifest"):
        DatasetManifest.read(tmp_path / "absent.json")

    path = tmp_path / "manifest.json"
    path.write_text('{"seed": "many"}')
    with pytest.raises(DataError, match="Invalid manifest"):
        DatasetManifest.read(path)


def test_load_split(tmp_path):
    """A split loads as stacked channels and labels."""
    entries = []
    for index, name in enumerate(("train", "train", "val")):
        channels = np.full((25, 60, 60), index, dtype=np.uint8)
        label = (4.0, 6.0, 0.1 * (index + 1))
        path = f"samples/s{index}.tsb"
        write_sample(Sample(channels, label), tmp_path / path)
        entries.append(
            ManifestEntry(path=path, label=label, seed=index, point=(1, 1), split=name)
        )
    manifest = DatasetManifest(generator_config_hash="h", seed=0, entries=entries)

    channels, labels = load_split(manifest, tmp_path, "train")

    assert channels.shape == (2, 25, 60, 60)
    assert channels[1].max() == 1
    np.testing.assert_allclose(labels[:, 2], [0.1, 0.2])
    with pytest.raises(DataError, match="the test split is empty"):
        load_split(manifest, tmp_path, "test")
