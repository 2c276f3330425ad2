"""Epsilon-insensitive support vector regression trained by SMO.

The dual is solved over the stacked vector beta = [alpha; alpha*] with signs
s = [+1...; -1...]: minimize 1/2 beta' Qbar beta + p' beta subject to
s'beta = 0 and 0 <= beta <= C, where Qbar[u,v] = s_u s_v K(x_u, x_v) and
p = [eps - y; eps + y].  Working pairs are chosen maximal-violating-first
with second-order selection of the partner; iteration stops once the maximal
KKT violation drops below tol.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from drowse.models.errors import DimensionMismatch

DEFAULT_C = 1.0
DEFAULT_EPSILON = 0.1
KKT_TOL = 1e-3
MAX_ITER = 1_000_000
_CURVATURE_FLOOR = 1e-12


class NoConvergence(Warning):
    """SMO hit the iteration cap; the returned model is the best iterate."""


@dataclass(frozen=True)
class Kernel:
    kind: str  # "rbf" | "linear"
    gamma: float | None = None  # required for rbf

    def __post_init__(self) -> None:
        if self.kind not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("rbf kernel needs gamma > 0")


def default_gamma(X: np.ndarray) -> float:
    """1 / (d * mean column variance); falls back to 1.0 on constant data."""
    d = X.shape[1]
    mean_var = float(((X - X.mean(axis=0)) ** 2).mean())
    if mean_var <= 0.0:
        return 1.0
    return 1.0 / (d * mean_var)


def kernel_matrix(kernel: Kernel, A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if kernel.kind == "linear":
        return A @ B.T
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-kernel.gamma * sq)


@dataclass
class SmoResult:
    beta: np.ndarray  # stacked [alpha; alpha*], length 2n
    bias: float
    kkt_violation: float
    iterations: int
    converged: bool


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    tol: float = KKT_TOL,
    max_iter: int = MAX_ITER,
) -> SmoResult:
    """Solve the epsilon-SVR dual for a precomputed kernel matrix."""
    n = K.shape[0]
    s = np.concatenate([np.ones(n), -np.ones(n)])
    beta = np.zeros(2 * n)
    grad = np.concatenate([epsilon - y, epsilon + y])
    diag = np.concatenate([np.diag(K), np.diag(K)])

    iterations = 0
    violation = 0.0
    while iterations < max_iter:
        neg_sg = -s * grad
        up = ((s > 0) & (beta < C)) | ((s < 0) & (beta > 0))
        low = ((s > 0) & (beta > 0)) | ((s < 0) & (beta < C))
        if not up.any() or not low.any():
            violation = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(neg_sg[up])])
        m_up = float(neg_sg[i])
        m_low = float(neg_sg[low].min())
        violation = m_up - m_low
        if violation < tol:
            break

        # second-order partner: maximal objective decrease gain^2 / curvature
        cand_idx = np.flatnonzero(low & (neg_sg < m_up))
        gain = m_up - neg_sg[cand_idx]
        curvature = diag[i] + diag[cand_idx] - 2.0 * K[i % n, cand_idx % n]
        curvature = np.maximum(curvature, _CURVATURE_FLOOR)
        j = int(cand_idx[np.argmax(gain * gain / curvature)])

        a = max(float(diag[i] + diag[j] - 2.0 * K[i % n, j % n]), _CURVATURE_FLOOR)
        derivative = float(s[i] * grad[i] - s[j] * grad[j])  # < 0 by selection
        cap_i = C - beta[i] if s[i] > 0 else beta[i]
        cap_j = beta[j] if s[j] > 0 else C - beta[j]
        step = min(-derivative / a, cap_i, cap_j)
        if step <= 0.0:
            break
        # beta moves by (s_i * step, -s_j * step); with s^2 = 1 the gradient
        # update Qbar[:,i] dbeta_i + Qbar[:,j] dbeta_j reduces to:
        beta[i] += s[i] * step
        beta[j] -= s[j] * step
        grad += step * (s * np.tile(K[:, i % n] - K[:, j % n], 2))
        iterations += 1

    neg_sg = -s * grad
    up = ((s > 0) & (beta < C)) | ((s < 0) & (beta > 0))
    low = ((s > 0) & (beta > 0)) | ((s < 0) & (beta < C))
    if up.any() and low.any():
        bias = (float(neg_sg[up].max()) + float(neg_sg[low].min())) / 2.0
    else:
        bias = float(np.mean(y)) if n else 0.0
    return SmoResult(
        beta=beta,
        bias=bias,
        kkt_violation=max(violation, 0.0),
        iterations=iterations,
        converged=violation < tol,
    )


def dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray, epsilon: float) -> float:
    """1/2 theta' K theta + eps * sum(beta) - y' theta."""
    n = K.shape[0]
    theta = beta[:n] - beta[n:]
    return float(0.5 * theta @ K @ theta + epsilon * beta.sum() - y @ theta)


@dataclass(frozen=True)
class SvrModel:
    support_vectors: tuple[tuple[float, ...], ...]
    coefficients: tuple[float, ...]  # alpha - alpha* per support vector
    bias: float
    kernel: Kernel
    C: float
    epsilon: float
    kkt_violation: float
    converged: bool
    n_iter: int


def fit_svr(
    X,
    y,
    C: float = DEFAULT_C,
    epsilon: float = DEFAULT_EPSILON,
    kernel: Kernel | None = None,
    tol: float = KKT_TOL,
    max_iter: int = MAX_ITER,
) -> SvrModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D matrix")
    n = X.shape[0]
    if y.shape != (n,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({n},)")
    if C <= 0:
        raise ValueError("C must be > 0")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if kernel is None:
        kernel = Kernel("rbf", gamma=default_gamma(X))

    K = kernel_matrix(kernel, X, X)
    result = smo_solve(K, y, C, epsilon, tol=tol, max_iter=max_iter)
    if not result.converged:
        warnings.warn(
            f"SMO stopped after {result.iterations} iterations "
            f"with KKT violation {result.kkt_violation:.3e}",
            NoConvergence,
        )
    theta = result.beta[:n] - result.beta[n:]
    support = np.flatnonzero(theta != 0.0)
    return SvrModel(
        support_vectors=tuple(tuple(float(v) for v in X[i]) for i in support),
        coefficients=tuple(float(theta[i]) for i in support),
        bias=result.bias,
        kernel=kernel,
        C=float(C),
        epsilon=float(epsilon),
        kkt_violation=result.kkt_violation,
        converged=result.converged,
        n_iter=result.iterations,
    )


def predict_svr(model: SvrModel, x) -> float | np.ndarray:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if not model.support_vectors:
        return model.bias if single else np.full(x.shape[0], model.bias)
    sv = np.array(model.support_vectors)
    if x.shape[-1] != sv.shape[1]:
        raise DimensionMismatch(f"expected {sv.shape[1]} features, got {x.shape[-1]}")
    k = kernel_matrix(model.kernel, np.atleast_2d(x), sv)
    result = k @ np.array(model.coefficients) + model.bias
    return float(result[0]) if single else result
