"""Principal component analysis by cyclic Jacobi eigendecomposition.

d is tiny (4 features), so exact Jacobi rotations on the covariance beat any
iterative scheme.  Eigenvalues are mean squared projections (covariance
normalized by n), which makes the reconstruction-error identity
sum-of-squared-residuals = n x (sum of dropped eigenvalues) hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drowse.models.errors import BadK, DimensionMismatch

JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class PcaModel:
    mean: tuple[float, ...]
    components: tuple[tuple[float, ...], ...]  # k rows, each an orthonormal direction
    eigenvalues: tuple[float, ...]  # k values, descending


def jacobi_eigh(A, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues/vectors of a symmetric matrix via cyclic Jacobi rotations.

    Returns (eigenvalues desc, eigenvectors as rows, paired with values).
    """
    A = np.array(A, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d) or not np.allclose(A, A.T, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("symmetric matrix required")
    V = np.eye(d)
    scale = np.abs(A).max()
    if scale == 0.0:
        return np.zeros(d), V
    threshold = tol * scale
    for _ in range(100):  # sweeps; quadratic convergence makes this generous
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off = max(off, abs(A[p, q]))
                if abs(A[p, q]) <= threshold:
                    continue
                # rotation angle zeroing A[p,q]
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                V = V @ rot
        if off <= threshold:
            break
    eigenvalues = np.diag(A).copy()
    order = np.argsort(-eigenvalues)
    eigenvalues = eigenvalues[order]
    vectors = V[:, order].T
    # deterministic sign: largest-magnitude entry of each vector is positive
    for i in range(d):
        j = int(np.argmax(np.abs(vectors[i])))
        if vectors[i, j] < 0:
            vectors[i] = -vectors[i]
    return eigenvalues, vectors


def fit_pca(X, k: int) -> PcaModel:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 rows")
    n, d = X.shape
    if not 1 <= k <= d:
        raise BadK(f"k must be in 1..{d}, got {k}")
    mean = X.mean(axis=0)
    centered = X - mean
    covariance = centered.T @ centered / n
    eigenvalues, vectors = jacobi_eigh(covariance)
    eigenvalues = np.maximum(eigenvalues, 0.0)  # clip float-negative zeros
    return PcaModel(
        mean=tuple(float(m) for m in mean),
        components=tuple(tuple(float(v) for v in row) for row in vectors[:k]),
        eigenvalues=tuple(float(v) for v in eigenvalues[:k]),
    )


def transform_pca(model: PcaModel, X):
    """Mean-centered projection onto the retained components."""
    X = np.asarray(X, dtype=float)
    components = np.array(model.components)
    if X.shape[-1] != components.shape[1]:
        raise DimensionMismatch(f"expected {components.shape[1]} features, got {X.shape[-1]}")
    return (X - np.array(model.mean)) @ components.T


def inverse_transform_pca(model: PcaModel, Z):
    Z = np.asarray(Z, dtype=float)
    components = np.array(model.components)
    if Z.shape[-1] != components.shape[0]:
        raise DimensionMismatch(f"expected {components.shape[0]} components, got {Z.shape[-1]}")
    return Z @ components + np.array(model.mean)
