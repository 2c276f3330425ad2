"""Brute-force oracles used by the model tests.

These deliberately avoid the library's own solvers: OLS is checked against a
pseudo-inverse, and the SVR dual against a dense projected-gradient QP with
an exact bisection projection onto {0 <= beta <= C, s'beta = 0}.
"""

from __future__ import annotations

import numpy as np


def pinv_ols_oracle(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coefficients via SVD pseudo-inverse; returns (weights, intercept)."""
    design = np.hstack([np.ones((X.shape[0], 1)), X])
    coef = np.linalg.pinv(design) @ y
    return coef[1:], float(coef[0])


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-gamma * sq)


def project_box_hyperplane(z: np.ndarray, s: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection onto {0 <= beta <= C, s'beta = 0} by bisection on mu."""

    def projected(mu: float) -> np.ndarray:
        return np.clip(z - mu * s, 0.0, C)

    lo, hi = -(np.abs(z).max() + C + 1.0), np.abs(z).max() + C + 1.0
    for _ in range(90):  # interval shrinks below float resolution well before this
        mid = 0.5 * (lo + hi)
        if s @ projected(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return projected(0.5 * (lo + hi))


def qp_svr_oracle(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    steps: int = 3_000,
) -> np.ndarray:
    """Solve the stacked epsilon-SVR dual by accelerated projected gradient."""
    n = K.shape[0]
    s = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - y, epsilon + y])
    Qtile = np.vstack([K, K])

    def grad(beta: np.ndarray) -> np.ndarray:
        theta = beta[:n] - beta[n:]
        ktheta = Qtile @ theta  # stacked K theta
        return s * ktheta + p

    # Gershgorin bound on the largest eigenvalue of Qbar
    lipschitz = 2.0 * np.abs(K).sum(axis=1).max()
    eta = 1.0 / lipschitz
    beta = project_box_hyperplane(np.zeros(2 * n), s, C)
    momentum = beta.copy()
    t_acc = 1.0
    prev_obj = np.inf
    for step in range(steps):
        candidate = project_box_hyperplane(momentum - eta * grad(momentum), s, C)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc))
        momentum = candidate + ((t_acc - 1.0) / t_next) * (candidate - beta)
        beta, t_acc = candidate, t_next
        if step % 25 == 24:  # restart acceleration when progress reverses
            obj = dual_objective(K, y, beta, epsilon)
            if obj > prev_obj:
                momentum = beta.copy()
                t_acc = 1.0
            prev_obj = obj
    return beta


def dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray, epsilon: float) -> float:
    n = K.shape[0]
    theta = beta[:n] - beta[n:]
    return float(0.5 * theta @ K @ theta + epsilon * beta.sum() - y @ theta)
