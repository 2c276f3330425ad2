"""Ordinary least squares fit via the normal equations.

The solve is a hand-rolled Gaussian elimination with partial pivoting; when
the Gram matrix is near singular a tiny ridge (1e-10 x trace) is added before
one retry.  numpy is used only as array plumbing here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drowse.models.errors import DegenerateDesign, DimensionMismatch

RIDGE_SCALE = 1e-10
_PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class LinearModel:
    weights: tuple[float, ...]  # aligned to the feature order of the training matrix
    intercept: float


def solve_linear_system(A, b) -> np.ndarray:
    """Solve A x = b by Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("square system required")
    scale = np.abs(A).max()
    if scale == 0.0:
        raise DegenerateDesign("all-zero system")
    aug = np.hstack([A, b[:, None]])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(aug[col:, col])))
        pivot = aug[pivot_row, col]
        if abs(pivot) <= _PIVOT_RTOL * scale:
            raise DegenerateDesign(f"near-zero pivot at column {col}")
        if pivot_row != col:
            aug[[col, pivot_row]] = aug[[pivot_row, col]]
        factors = aug[col + 1 :, col] / aug[col, col]
        aug[col + 1 :, col:] -= factors[:, None] * aug[col, col:]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (aug[row, n] - aug[row, row + 1 : n] @ x[row + 1 : n]) / aug[row, row]
    return x


def fit_ols(X, y) -> LinearModel:
    """Least-squares weights and intercept minimizing ||y - Xw - c||^2."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n, d = X.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({n},)")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("X and y must be finite")
    if n <= d:
        raise DegenerateDesign(f"need more rows than columns, got {n} rows x {d} columns")
    design = np.hstack([np.ones((n, 1)), X])
    gram = design.T @ design
    rhs = design.T @ y
    try:
        coef = solve_linear_system(gram, rhs)
    except DegenerateDesign:
        ridge = RIDGE_SCALE * float(np.trace(gram)) * np.eye(d + 1)
        coef = solve_linear_system(gram + ridge, rhs)
    return LinearModel(weights=tuple(float(w) for w in coef[1:]), intercept=float(coef[0]))


def predict_linear(model: LinearModel, x) -> float | np.ndarray:
    """dot(weights, x) + intercept; accepts one row or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    w = np.array(model.weights)
    if x.shape[-1] != w.shape[0]:
        raise DimensionMismatch(f"expected {w.shape[0]} features, got {x.shape[-1]}")
    result = x @ w + model.intercept
    return float(result) if result.ndim == 0 else result
