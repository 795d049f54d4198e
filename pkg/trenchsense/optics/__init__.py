"""Synthetic camera frames and brightness analysis."""
