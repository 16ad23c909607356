"""Small input-validation helpers used at API boundaries."""

from __future__ import annotations

import numpy as np


def as_f64(values, name: str) -> np.ndarray:
    """Coerce to a float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_length(arr: np.ndarray, expected: int, name: str) -> np.ndarray:
    if arr.size != expected:
        raise ValueError(f"{name} has length {arr.size}, expected {expected}")
    return arr.reshape(-1)


def check_token_ids(tokens, vocab_size: int) -> np.ndarray:
    ids = np.asarray(tokens)
    if ids.ndim != 1:
        raise ValueError("token ids must be a 1-d sequence")
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        bad = int(ids[(ids < 0) | (ids >= vocab_size)][0])
        raise ValueError(f"token id {bad} outside vocabulary of size {vocab_size}")
    return ids.astype(np.int64)


def check_positive(value, name: str):
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
