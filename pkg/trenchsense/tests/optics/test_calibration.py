"""
Test camera response calibration
"""

import csv

import pytest

from trenchsense.mechanics.field import build_deformation_field
from trenchsense.mechanics.stiffness import DEFAULT_STIFFNESS_K
from trenchsense.mechanics.types import ContactLoad
from trenchsense.optics.analysis import brightness_metric
from trenchsense.optics.calibration import (
    TARGET_BRIGHTNESS_RATIO,
    BrightnessRow,
    brightness_table,
    calibrate_gain,
    write_brightness_csv,
)
from trenchsense.optics.exceptions import CalibrationError
from trenchsense.optics.render import render


def test_calibrated_gain_reaches_brightness_ratio(
    geometry, material, quiet_render_config
):
    """After calibration the 1.5 mm frame is about 3.2 times the 0.5 mm one."""
    cfg = calibrate_gain(geometry, material, quiet_render_config)

    rows = brightness_table(geometry, material, cfg)

    assert [row.displacement_z for row in rows] == [0.5, 1.0, 1.5]
    assert rows[0].ratio == 1.0
    assert rows[-1].ratio == pytest.approx(TARGET_BRIGHTNESS_RATIO, rel=0.01)
    assert rows[0].brightness < rows[1].brightness < rows[2].brightness


def test_noisy_frames_keep_brightness_ratio(geometry, material, render_config):
    """Camera noise moves the measured ratio by less than 20%."""
    cfg = calibrate_gain(geometry, material, render_config)

    rows = brightness_table(geometry, material, cfg)

    assert rows[-1].ratio == pytest.approx(TARGET_BRIGHTNESS_RATIO, rel=0.2)


def test_brightness_table_follows_the_load(geometry, material, quiet_render_config):
    """An off-centre load is measured around its own cross."""
    rows = brightness_table(geometry, material, quiet_render_config, (1.0,), (2, 2))

    load = ContactLoad.from_displacement(2, 2, 1.0, DEFAULT_STIFFNESS_K)
    image = render(
        build_deformation_field(load, geometry, material), geometry, quiet_render_config
    )
    assert rows[0].brightness == brightness_metric(image, center=(120.0, 120.0))
    assert rows[0].brightness != brightness_metric(image)


def test_calibration_keeps_other_settings(geometry, material, render_config):
    """Only the gain changes."""
    cfg = calibrate_gain(geometry, material, render_config)

    assert cfg.noise_sigma == render_config.noise_sigma
    assert cfg.gamma == render_config.gamma
    assert cfg.gain > 0


def test_calibration_rejects_unreachable_ratio(geometry, material, render_config):
    """A ratio no gain can produce is a calibration error."""
    with pytest.raises(CalibrationError, match="is outside the reachable range"):
        calibrate_gain(geometry, material, render_config, target=1000.0)


def test_brightness_grows_with_displacement(geometry, material, render_config):
    """Deeper presses give brighter central regions, noise included."""
    rows = brightness_table(geometry, material, render_config)

    assert rows[0].brightness < rows[1].brightness < rows[2].brightness


def test_write_brightness_csv(tmp_path):
    """The sweep is written with one row per displacement."""
    rows = [BrightnessRow(0.5, 4.0, 1.0), BrightnessRow(1.5, 12.8, 3.2)]

    path = write_brightness_csv(rows, tmp_path / "brightness.csv")

    with path.open(encoding="utf-8") as handle:
        written = list(csv.reader(handle))
    assert written == [
        ["displacement_mm", "brightness", "ratio"],
        ["0.5", "4.0", "1.0"],
        ["1.5", "12.8", "3.2"],
    ]
