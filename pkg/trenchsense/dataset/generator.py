"""Generation of labelled synthetic datasets."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from trenchsense.core.exceptions import DomainError
from trenchsense.core.utils import stable_hash
from trenchsense.dataset.manifest import DatasetManifest, ManifestEntry
from trenchsense.dataset.samples import MAX_TRAINING_Z, Sample, crop_25, write_sample
from trenchsense.mechanics.field import build_deformation_field
from trenchsense.mechanics.stiffness import DEFAULT_STIFFNESS_K
from trenchsense.mechanics.types import ContactLoad, MaterialParams
from trenchsense.optics.geometry import SensorGeometry
from trenchsense.optics.imageio import write_pgm
from trenchsense.optics.render import RenderConfig, render

logger = logging.getLogger(__name__)

SAMPLES_DIR = "samples"


@dataclass(frozen=True)
class Sweep:
    """Displacement levels and repeats applied at every contact point."""

    z_min: float = 0.1
    z_max: float = 1.5
    z_steps: int = 11
    repeats: int = 10

    def __post_init__(self):
        """Validate the sweep."""
        if not 0 <= self.z_min <= self.z_max <= MAX_TRAINING_Z:
            raise DomainError(
                f"z sweep [{self.z_min}, {self.z_max}] mm must lie within "
                f"[0, {MAX_TRAINING_Z}] mm"
            )
        if self.z_steps < 1 or self.repeats < 1:
            raise DomainError("z_steps and repeats must be at least 1")

    @classmethod
    def from_config(cls, section) -> "Sweep":
        """Build from the ``dataset`` section of a run configuration."""
        return cls(section.z_min, section.z_max, section.z_steps, section.repeats)

    def levels(self) -> np.ndarray:
        """Displacement levels, in mm."""
        return np.linspace(self.z_min, self.z_max, self.z_steps)


@dataclass(frozen=True)
class _Job:
    """All the repeats of one (point, displacement) pair."""

    point_index: int
    z_index: int
    point: Tuple[float, float]
    displacement_z: float
    repeats: int
    seed: int
    root: Path
    geometry: SensorGeometry
    material: MaterialParams
    render_config: RenderConfig
    k: float
    alpha: Optional[float]
    nodes: int

    def sample_seed(self, repeat: int) -> int:
        """Noise seed of one repeat, independent of the job count."""
        sequence = np.random.SeedSequence(
            [self.seed, self.point_index, self.z_index, repeat]
        )
        return int(sequence.generate_state(1)[0])

    def relative_path(self, repeat: int) -> str:
        """Location of one sample file under the dataset root."""
        return (
            f"{SAMPLES_DIR}/p{self.point_index:03d}"
            f"_z{self.z_index:03d}_r{repeat:03d}.tsb"
        )


def _run_job(job: _Job) -> List[ManifestEntry]:
    load = ContactLoad.from_displacement(
        job.point[0], job.point[1], job.displacement_z, job.k
    )
    field = build_deformation_field(
        load, job.geometry, job.material, alpha=job.alpha, nodes=job.nodes
    )
    label = (
        job.geometry.grid_to_mm(job.point[0]),
        job.geometry.grid_to_mm(job.point[1]),
        float(job.displacement_z),
    )
    entries = []
    for repeat in range(job.repeats):
        seed = job.sample_seed(repeat)
        image = render(field, job.geometry, job.render_config.with_seed(seed), label)
        sample = Sample(
            crop_25(image, job.geometry, job.render_config), label, job.geometry.window
        )
        path = job.relative_path(repeat)
        write_sample(sample, job.root / path)
        entries.append(
            ManifestEntry(path=path, label=label, seed=seed, point=job.point)
        )
    return entries


def generator_hash(
    geometry: SensorGeometry,
    material: MaterialParams,
    render_config: RenderConfig,
    grid: Sequence[Tuple[float, float]],
    sweep: Sweep,
    k: float,
    alpha: Optional[float],
    nodes: int,
) -> str:
    """Hash of everything but the seed that determines a generated dataset."""
    return stable_hash(
        {
            "render": render_config.config_hash(geometry),
            "material": asdict(material),
            "grid": [list(point) for point in grid],
            "sweep": asdict(sweep),
            "k": k,
            "alpha": alpha,
            "nodes": nodes,
        }
    )


def generate(
    geometry: SensorGeometry,
    material: MaterialParams,
    render_config: RenderConfig,
    grid: Sequence[Tuple[float, float]],
    sweep: Sweep,
    root: Path,
    seed: int = 0,
    jobs: int = 1,
    k: float = DEFAULT_STIFFNESS_K,
    alpha: Optional[float] = None,
    nodes: int = 161,
    preview: bool = False,
) -> DatasetManifest:
    """Render and write one sample per (point, displacement, repeat).

    Sample noise seeds derive from ``seed`` and the sample indices only, so the
    files are byte-identical whatever the number of worker processes.

    Args:
        geometry: Trench layout.
        material: Film material.
        render_config: Camera model; its own seed is replaced per sample.
        grid: Contact points as (grid x, grid y) indices.
        sweep: Displacement levels and repeats.
        root: Dataset directory; samples go to ``root/samples``.
        seed: Dataset seed.
        jobs: Worker processes; 1 renders in the calling process.
        k: Stiffness coefficient in mN/mm.
        alpha: Stress-free triangle height override, in metres.
        nodes: Deflection field resolution.
        preview: Also write ``root/preview.pgm``, the frame of the first point
            at the largest displacement.

    Raises:
        DataError: when a sample cannot be written. Files written by the
            aborted run are removed.
    """
    root = Path(root)
    levels = sweep.levels()
    work = [
        _Job(
            point_index=point_index,
            z_index=z_index,
            point=(float(point[0]), float(point[1])),
            displacement_z=float(z),
            repeats=sweep.repeats,
            seed=seed,
            root=root,
            geometry=geometry,
            material=material,
            render_config=render_config,
            k=k,
            alpha=alpha,
            nodes=nodes,
        )
        for point_index, point in enumerate(grid)
        for z_index, z in enumerate(levels)
    ]
    config_hash = generator_hash(
        geometry, material, render_config, grid, sweep, k, alpha, nodes
    )
    logger.info(
        "Generating %s samples (%s points, %s levels, %s repeats) with %s jobs",
        len(work) * sweep.repeats,
        len(grid),
        len(levels),
        sweep.repeats,
        jobs,
    )

    entries: List[ManifestEntry] = []
    try:
        if jobs > 1 and len(work) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                for batch in executor.map(_run_job, work):
                    entries.extend(batch)
        else:
            for index, job in enumerate(work, start=1):
                entries.extend(_run_job(job))
                logger.debug("Generated job %s/%s", index, len(work))
        if preview and work:
            _write_preview(_preview_job(work), root)
    except Exception:
        _cleanup(root, work)
        raise

    logger.info("Generated %s samples under %s", len(entries), root)
    return DatasetManifest(
        generator_config_hash=config_hash,
        seed=seed,
        window=geometry.window,
        entries=entries,
    )


def _preview_job(work: List[_Job]) -> _Job:
    first = work[0].point_index
    return [job for job in work if job.point_index == first][-1]


def _write_preview(job: _Job, root: Path):
    load = ContactLoad.from_displacement(
        job.point[0], job.point[1], job.displacement_z, job.k
    )
    field = build_deformation_field(
        load, job.geometry, job.material, alpha=job.alpha, nodes=job.nodes
    )
    cfg = job.render_config.with_seed(job.sample_seed(0))
    write_pgm(render(field, job.geometry, cfg), root / "preview.pgm")


def _cleanup(root: Path, work: List[_Job]):
    """Remove every file an aborted generation may have written."""
    removed = 0
    for job in work:
        for repeat in range(job.repeats):
            path = root / job.relative_path(repeat)
            if path.exists():
                path.unlink()
                removed += 1
    (root / "preview.pgm").unlink(missing_ok=True)
    logger.warning("Generation aborted, removed %s partial sample files", removed)
