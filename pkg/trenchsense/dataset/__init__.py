"""Synthetic dataset generation, preprocessing and splits."""
