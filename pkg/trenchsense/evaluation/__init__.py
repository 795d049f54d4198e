"""Force calibration, metrics, error ellipses and replay."""
