"""
Utils functions used across trenchsense
"""

import hashlib
import json
import time
from typing import Any

import numpy as np


def stable_hash(payload: Any) -> str:
    """Return a SHA-256 hex digest of a JSON-serialisable payload.

    Keys are sorted and separators fixed so that two equal payloads always hash
    to the same digest, whatever the dict insertion order.
    """
    encoded = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(encoded.encode("utf-8")).hexdigest()


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Build an independent generator for one work item of a seeded run."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


class Timeit:
    """A utility context manager to time a stage of a command."""

    total_time = 0.0

    def __init__(self, stdout, sentence=None):
        """Set the sentence to be displayed for timing information."""
        self.sentence = sentence
        self.start = None
        self.stdout = stdout
        self.elapsed = 0.0

    def __enter__(self):
        """Start timer upon entering context manager."""
        self.start = time.perf_counter()
        if self.sentence:
            self.stdout.write(f"{self.sentence}...")
        return self

    def __exit__(self, exc_type, exc_value, exc_tb):
        """Stop timer and display result upon leaving context manager."""
        self.elapsed = time.perf_counter() - self.start
        if exc_type is None and self.sentence:
            self.stdout.write(f" Took {self.elapsed:g} seconds\n")
        self.__class__.total_time += self.elapsed
        return False
