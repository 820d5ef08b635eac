"""Input validation helpers for vectors and text, shared by the estimator layer."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyText, ZeroVector


def check_vector(values: Sequence[float] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float array; check finiteness and (optionally) length."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {vec.shape[0]}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("vector contains non-finite values")
    return vec


def check_nonzero_norm(vec: np.ndarray) -> float:
    """L2 norm of ``vec``; raises ZeroVector when it vanishes."""
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroVector("zero-norm vector has no direction")
    return norm


def check_matrix(rows: Iterable[Sequence[float]] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float matrix with a consistent row dimension."""
    mat = np.asarray(rows, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {mat.shape}")
    if dim is not None and mat.shape[1] != dim:
        raise DimensionMismatch(f"expected row dimension {dim}, got {mat.shape[1]}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix contains non-finite values")
    return mat


def check_text(text: str) -> str:
    """Require a non-empty (after trimming) string; returns it unchanged."""
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    if not text.strip():
        raise EmptyText("text is empty or whitespace-only")
    return text


def check_positive_int(value: int, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value
