"""Per-column standardization (zero mean, unit variance)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drowse.models.errors import DimensionMismatch, ZeroVarianceColumn


@dataclass(frozen=True)
class Standardizer:
    mean: tuple[float, ...]
    sd: tuple[float, ...]  # population standard deviation, all > 0


def fit_standardizer(X, column_names: list[str] | None = None) -> Standardizer:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 rows")
    mean = X.mean(axis=0)
    sd = np.sqrt(((X - mean) ** 2).mean(axis=0))
    for j, s in enumerate(sd):
        if s == 0.0:
            raise ZeroVarianceColumn(j, column_names[j] if column_names else None)
    return Standardizer(mean=tuple(float(m) for m in mean), sd=tuple(float(s) for s in sd))


def _check_width(std: Standardizer, X: np.ndarray) -> None:
    if X.shape[-1] != len(std.mean):
        raise DimensionMismatch(f"expected {len(std.mean)} columns, got {X.shape[-1]}")


def apply_standardizer(std: Standardizer, X):
    X = np.asarray(X, dtype=float)
    _check_width(std, X)
    return (X - np.array(std.mean)) / np.array(std.sd)


def invert_standardizer(std: Standardizer, X):
    X = np.asarray(X, dtype=float)
    _check_width(std, X)
    return X * np.array(std.sd) + np.array(std.mean)
