"""
Test synthetic dataset generation
"""

from unittest import mock

import pytest

from trenchsense.core.exceptions import DataError, DomainError
from trenchsense.dataset import generator
from trenchsense.dataset.generator import Sweep, generate
from trenchsense.dataset.samples import read_sample

GRID = [(3.0, 3.0), (2.0, 4.0)]


@pytest.fixture
def sweep():
    """Two levels, two repeats."""
    return Sweep(z_min=0.5, z_max=1.0, z_steps=2, repeats=2)


def _generate(root, geometry, material, render_config, sweep, **kwargs):
    return generate(
        geometry, material, render_config, GRID, sweep, root, seed=9, **kwargs
    )


def test_generate_writes_labelled_samples(
    tmp_path, geometry, material, render_config, sweep
):
    """One file per point, level and repeat, labelled in mm."""
    manifest = _generate(tmp_path, geometry, material, render_config, sweep)

    assert len(manifest.entries) == 8
    first = manifest.entries[0]
    assert first.path == "samples/p000_z000_r000.tsb"
    assert first.label == (8.0, 8.0, 0.5)
    assert manifest.entries[-1].label == (6.0, 10.0, 1.0)
    assert read_sample(tmp_path / first.path).label == (8.0, 8.0, 0.5)
    assert len({entry.seed for entry in manifest.entries}) == 8
    assert manifest.seed == 9


def test_generate_is_independent_of_job_count(
    tmp_path, geometry, material, render_config, sweep
):
    """Serial and parallel runs write byte-identical files."""
    serial = _generate(tmp_path / "a", geometry, material, render_config, sweep)
    parallel = _generate(
        tmp_path / "b", geometry, material, render_config, sweep, jobs=2
    )

    assert serial == parallel
    for entry in serial.entries:
        first = (tmp_path / "a" / entry.path).read_bytes()
        assert first == (tmp_path / "b" / entry.path).read_bytes()


def test_generator_hash_ignores_seed(
    tmp_path, geometry, material, render_config, sweep
):
    """The configuration hash tracks the generator settings, not the seed."""
    first = generate(
        geometry, material, render_config, GRID, sweep, tmp_path / "a", seed=1
    )
    second = generate(
        geometry, material, render_config, GRID, sweep, tmp_path / "b", seed=2
    )
    third = generate(
        geometry, material, render_config, GRID[:1], sweep, tmp_path / "c", seed=1
    )

    assert first.generator_config_hash == second.generator_config_hash
    assert first.generator_config_hash != third.generator_config_hash


def test_generate_preview(tmp_path, geometry, material, render_config, sweep):
    """The preview frame is written on request."""
    _generate(tmp_path, geometry, material, render_config, sweep, preview=True)

    assert (tmp_path / "preview.pgm").read_bytes().startswith(b"P5")


def test_generate_cleans_up_after_failure(
    tmp_path, geometry, material, render_config, sweep
):
    """An aborted run leaves no partial sample behind."""
    real_write = generator.write_sample
    calls = []

    def flaky_write(sample, path):
        calls.append(path)
        if len(calls) > 3:
            raise DataError(f"Cannot write sample {path}: disk full")
        return real_write(sample, path)

    with (
        mock.patch.object(generator, "write_sample", side_effect=flaky_write),
        pytest.raises(DataError, match="disk full"),
    ):
        _generate(tmp_path, geometry, material, render_config, sweep)

    assert not list(tmp_path.rglob("*.tsb"))


@pytest.mark.parametrize(
    "arguments, message",
    [
        ({"z_max": 1.75}, "must lie within"),
        ({"z_min": 1.0, "z_max": 0.5}, "must lie within"),
        ({"z_steps": 0}, "z_steps and repeats must be at least 1"),
        ({"repeats": 0}, "z_steps and repeats must be at least 1"),
    ],
)
def test_sweep_validation(arguments, message):
    """Sweeps stay within the trained displacement range."""
    with pytest.raises(DomainError, match=message):
        Sweep(**arguments)


def test_sweep_levels():
    """Levels are evenly spaced, ends included."""
    levels = Sweep(z_min=0.1, z_max=1.5, z_steps=11).levels()

    assert levels[0] == pytest.approx(0.1)
    assert levels[-1] == pytest.approx(1.5)
    assert len(levels) == 11
