"""CSV export of deformation fields and oracle comparisons."""

import csv
from pathlib import Path
from typing import Iterable, Tuple

from trenchsense.core.exceptions import DataError
from trenchsense.mechanics.oracle import OracleComparison
from trenchsense.mechanics.types import DeformationField, TrenchOpening


def _number(value: float) -> str:
    return repr(float(value))


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}") from e


def write_field_csv(field: DeformationField, path: Path) -> Path:
    """Write the deflection map, one row per grid node."""
    axis_mm = field.axis * 1e3
    with _open(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["position_mm_x", "position_mm_y", "deflection_m"])
        for iy, y in enumerate(axis_mm):
            for ix, x in enumerate(axis_mm):
                deflection = _number(field.deflection[iy, ix])
                writer.writerow([f"{x:.6f}", f"{y:.6f}", deflection])
    return path


def write_openings_table(field: DeformationField, path: Path) -> Path:
    """Write the 5×5 opening table with the lateral cross shifts."""
    with _open(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "row",
                "col",
                "delta_left_m",
                "delta_right_m",
                "total_m",
                "shift_x_m",
                "shift_y_m",
            ]
        )
        for row, openings in enumerate(field.trench_openings, start=1):
            for col, opening in enumerate(openings, start=1):
                shift = field.cross_shifts[row - 1, col - 1]
                writer.writerow(
                    [
                        row,
                        col,
                        _number(opening.delta_left),
                        _number(opening.delta_right),
                        _number(opening.total),
                        _number(shift[0]),
                        _number(shift[1]),
                    ]
                )
    return path


def write_comparison_csv(rows: Iterable[OracleComparison], path: Path) -> Path:
    """Write analytical and oracle openings for a force sweep."""
    with _open(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "location",
                "position_mm",
                "force_mn",
                "analytical_left_m",
                "analytical_right_m",
                "analytical_total_m",
                "oracle_left_m",
                "oracle_right_m",
                "oracle_total_m",
                "relative_discrepancy",
            ]
        )
        for item in rows:
            writer.writerow(
                [
                    item.location,
                    f"{item.position * 1e3:g}",
                    f"{item.force * 1e3:g}",
                    _number(item.analytical.delta_left),
                    _number(item.analytical.delta_right),
                    _number(item.analytical.total),
                    _number(item.oracle.delta_left),
                    _number(item.oracle.delta_right),
                    _number(item.oracle.total),
                    f"{item.discrepancy:.6f}",
                ]
            )
    return path


def write_openings_csv(
    rows: Iterable[Tuple[str, float, float, TrenchOpening]], path: Path
) -> Path:
    """Write closed-form strip openings, one row per (location, force, notch)."""
    with _open(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "location",
                "force_mn",
                "notch_mm",
                "delta_left_m",
                "delta_right_m",
                "total_m",
            ]
        )
        for location, force, position, opening in rows:
            writer.writerow(
                [
                    location,
                    f"{force * 1e3:g}",
                    f"{position * 1e3:g}",
                    _number(opening.delta_left),
                    _number(opening.delta_right),
                    _number(opening.total),
                ]
            )
    return path
