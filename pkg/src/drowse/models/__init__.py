"""From-scratch numeric core: standardization, OLS, PCA, epsilon-SVR, Pearson r."""

from drowse.models.errors import (
    ConstantInput,
    DegenerateDesign,
    DimensionMismatch,
    BadK,
    ZeroVarianceColumn,
)
from drowse.models.linear import LinearModel, fit_ols, predict_linear
from drowse.models.pca import PcaModel, fit_pca, transform_pca
from drowse.models.pipeline import Pipeline, fit_pipeline, predict_pipeline
from drowse.models.scaling import Standardizer, apply_standardizer, fit_standardizer, invert_standardizer
from drowse.models.serialize import load_pipeline, loads_pipeline, dumps_pipeline, save_pipeline
from drowse.models.stats import pearson_r
from drowse.models.svr import Kernel, SvrModel, fit_svr, predict_svr

__all__ = [
    "BadK",
    "ConstantInput",
    "DegenerateDesign",
    "DimensionMismatch",
    "Kernel",
    "LinearModel",
    "PcaModel",
    "Pipeline",
    "Standardizer",
    "SvrModel",
    "ZeroVarianceColumn",
    "apply_standardizer",
    "dumps_pipeline",
    "fit_ols",
    "fit_pca",
    "fit_pipeline",
    "fit_standardizer",
    "fit_svr",
    "invert_standardizer",
    "load_pipeline",
    "loads_pipeline",
    "pearson_r",
    "predict_linear",
    "predict_pipeline",
    "predict_svr",
    "save_pipeline",
    "transform_pca",
]
