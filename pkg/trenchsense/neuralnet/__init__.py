"""Minimal numpy convolutional network engine."""
