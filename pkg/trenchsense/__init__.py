"""Digital twin of a micro-trench vision-based tactile sensor."""

__version__ = "0.1.0"
