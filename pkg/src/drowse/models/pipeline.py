"""Trainable prediction pipelines: ols | pca-ols | svr.

Features are standardized before PCA and SVR but not before plain OLS, so
OLS coefficients stay in raw feature units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drowse.models.linear import LinearModel, fit_ols, predict_linear
from drowse.models.pca import PcaModel, fit_pca, transform_pca
from drowse.models.scaling import Standardizer, apply_standardizer, fit_standardizer
from drowse.models.svr import Kernel, SvrModel, fit_svr, predict_svr

PIPELINE_KINDS = ("ols", "pca-ols", "svr")


@dataclass(frozen=True)
class Pipeline:
    kind: str
    feature_names: tuple[str, ...]
    standardizer: Standardizer | None = None
    pca: PcaModel | None = None
    linear: LinearModel | None = None
    svr: SvrModel | None = None


def fit_pipeline(
    kind: str,
    X,
    y,
    feature_names: tuple[str, ...],
    pca_k: int | None = None,
    C: float = 1.0,
    epsilon: float = 0.1,
    kernel: Kernel | None = None,
) -> Pipeline:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind not in PIPELINE_KINDS:
        raise ValueError(f"unknown pipeline kind {kind!r}; expected one of {PIPELINE_KINDS}")
    if X.shape[1] != len(feature_names):
        raise ValueError("feature_names must match X columns")
    if kind == "ols":
        return Pipeline(kind=kind, feature_names=tuple(feature_names), linear=fit_ols(X, y))
    std = fit_standardizer(X, column_names=list(feature_names))
    Z = apply_standardizer(std, X)
    if kind == "svr":
        return Pipeline(
            kind=kind,
            feature_names=tuple(feature_names),
            standardizer=std,
            svr=fit_svr(Z, y, C=C, epsilon=epsilon, kernel=kernel),
        )
    # pca-ols: reduce by one dimension (4 features -> 3 components), then OLS
    if pca_k is None:
        pca_k = max(1, X.shape[1] - 1)
    pca = fit_pca(Z, pca_k)
    projected = transform_pca(pca, Z)
    return Pipeline(
        kind=kind,
        feature_names=tuple(feature_names),
        standardizer=std,
        pca=pca,
        linear=fit_ols(projected, y),
    )


def predict_pipeline(pipeline: Pipeline, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if pipeline.standardizer is not None:
        X = apply_standardizer(pipeline.standardizer, X)
    if pipeline.pca is not None:
        X = transform_pca(pipeline.pca, X)
    if pipeline.kind == "svr":
        result = predict_svr(pipeline.svr, X)
        return np.atleast_1d(result)
    return np.atleast_1d(predict_linear(pipeline.linear, X))
