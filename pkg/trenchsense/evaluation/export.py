"""CSV and JSON reports of the evaluation stage."""

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

from trenchsense.core.exceptions import DataError
from trenchsense.evaluation.calibration import CalibrationRecord
from trenchsense.evaluation.ellipse import ErrorEllipse
from trenchsense.evaluation.metrics import AXES, AxisMetrics, ResidualStats
from trenchsense.evaluation.models import ModelComparison
from trenchsense.evaluation.replay import ReplayResult


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path


def _write_json(path: Path, payload) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e
    return path


def _number(value: float) -> str:
    return "nan" if math.isnan(value) else repr(float(value))


def write_metrics_csv(metrics: Dict[str, AxisMetrics], path: Path) -> Path:
    """One row per coordinate: mse, rmse, mae, r_squared, r_squared_defined."""
    return _write_rows(
        path,
        ["axis", "mse", "rmse", "mae", "r_squared", "r_squared_defined"],
        (
            [
                axis,
                _number(value.mse),
                _number(value.rmse),
                _number(value.mae),
                _number(value.r_squared),
                str(value.r_squared_defined).lower(),
            ]
            for axis, value in metrics.items()
        ),
    )


def write_residuals_json(stats: Dict[str, ResidualStats], path: Path) -> Path:
    """Histograms and quartiles of every coordinate."""
    return _write_json(path, {axis: asdict(value) for axis, value in stats.items()})


def write_ellipse_json(ellipse: ErrorEllipse, path: Path) -> Path:
    """Ellipse centre, semi-axes (major, minor), orientation and coverage."""
    return _write_json(path, asdict(ellipse))


def write_calibration(
    records: Dict[tuple, CalibrationRecord], csv_path: Path, json_path: Path
) -> List[Path]:
    """Per-point k and R² as CSV, and the full records with their pairs as JSON."""
    rows = (
        [
            int(record.point[0]),
            int(record.point[1]),
            repr(float(record.k)),
            repr(float(record.r_squared)),
        ]
        for record in records.values()
    )
    return [
        _write_rows(csv_path, ["grid_x", "grid_y", "k_mN_per_mm", "r_squared"], rows),
        _write_json(
            json_path,
            {
                "fit": "F = k*z through the origin, R² against the mean force",
                "records": [asdict(record) for record in records.values()],
            },
        ),
    ]


def write_replay_csv(result: ReplayResult, path: Path) -> Path:
    """One row per frame: time, predictions, force, truths and residuals."""
    header = [
        "t_s",
        "pred_x_mm",
        "pred_y_mm",
        "pred_z_mm",
        "force_mN",
        "true_x_mm",
        "true_y_mm",
        "true_z_mm",
        "res_x_mm",
        "res_y_mm",
        "res_z_mm",
    ]
    rows = (
        [
            repr(float(t)),
            *(repr(float(v)) for v in predicted),
            repr(float(force)),
            *(repr(float(v)) for v in truth),
            *(repr(float(v)) for v in residual),
        ]
        for t, predicted, force, truth, residual in zip(
            result.times,
            result.predictions,
            result.forces,
            result.truths,
            result.residuals,
            strict=True,
        )
    )
    return _write_rows(path, header, rows)


def write_comparison_csv(
    rows: Iterable[Tuple[str, ModelComparison]], path: Path
) -> Path:
    """One row per model and run: seed (or ``mean``), MSE and residual IQR in mm."""
    return _write_rows(
        path,
        ["model", "seed", "mse_x", "mse_y", "mse_z", "iqr_x", "iqr_y", "iqr_z"],
        (
            [
                comparison.name,
                run,
                *(_number(comparison.mse[axis]) for axis in AXES),
                *(_number(comparison.iqr[axis]) for axis in AXES),
            ]
            for run, comparison in rows
        ),
    )
