"""Model files: one self-describing JSON text document per trained pipeline.

Floats are written with Python's shortest round-trip repr, so
serialize -> deserialize -> predict is bit-identical to the original model.
"""

from __future__ import annotations

import json

from drowse.models.linear import LinearModel
from drowse.models.pca import PcaModel
from drowse.models.pipeline import PIPELINE_KINDS, Pipeline
from drowse.models.scaling import Standardizer
from drowse.models.svr import Kernel, SvrModel

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Document is not a valid serialized model."""


def _standardizer_doc(std: Standardizer | None):
    if std is None:
        return None
    return {"mean": list(std.mean), "sd": list(std.sd)}


def _pca_doc(pca: PcaModel | None):
    if pca is None:
        return None
    return {
        "mean": list(pca.mean),
        "components": [list(row) for row in pca.components],
        "eigenvalues": list(pca.eigenvalues),
    }


def _linear_doc(model: LinearModel | None):
    if model is None:
        return None
    return {"weights": list(model.weights), "intercept": model.intercept}


def _svr_doc(model: SvrModel | None):
    if model is None:
        return None
    return {
        "support_vectors": [list(row) for row in model.support_vectors],
        "coefficients": list(model.coefficients),
        "bias": model.bias,
        "kernel": {"kind": model.kernel.kind, "gamma": model.kernel.gamma},
        "C": model.C,
        "epsilon": model.epsilon,
        "kkt_violation": model.kkt_violation,
        "converged": model.converged,
        "n_iter": model.n_iter,
    }


def dumps_pipeline(pipeline: Pipeline) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "kind": pipeline.kind,
        "feature_names": list(pipeline.feature_names),
        "standardizer": _standardizer_doc(pipeline.standardizer),
        "pca": _pca_doc(pipeline.pca),
        "linear": _linear_doc(pipeline.linear),
        "svr": _svr_doc(pipeline.svr),
    }
    return json.dumps(doc, indent=2) + "\n"


def loads_pipeline(text: str) -> Pipeline:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a model document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_VERSION:
        raise ModelFormatError("unsupported or missing model format version")
    kind = doc.get("kind")
    if kind not in PIPELINE_KINDS:
        raise ModelFormatError(f"unknown pipeline kind {kind!r}")
    try:
        std = doc["standardizer"]
        standardizer = (
            Standardizer(mean=tuple(std["mean"]), sd=tuple(std["sd"])) if std else None
        )
        pca_doc = doc["pca"]
        pca = (
            PcaModel(
                mean=tuple(pca_doc["mean"]),
                components=tuple(tuple(row) for row in pca_doc["components"]),
                eigenvalues=tuple(pca_doc["eigenvalues"]),
            )
            if pca_doc
            else None
        )
        linear_doc = doc["linear"]
        linear = (
            LinearModel(weights=tuple(linear_doc["weights"]), intercept=linear_doc["intercept"])
            if linear_doc
            else None
        )
        svr_doc = doc["svr"]
        svr = (
            SvrModel(
                support_vectors=tuple(tuple(row) for row in svr_doc["support_vectors"]),
                coefficients=tuple(svr_doc["coefficients"]),
                bias=svr_doc["bias"],
                kernel=Kernel(svr_doc["kernel"]["kind"], svr_doc["kernel"]["gamma"]),
                C=svr_doc["C"],
                epsilon=svr_doc["epsilon"],
                kkt_violation=svr_doc["kkt_violation"],
                converged=svr_doc["converged"],
                n_iter=svr_doc["n_iter"],
            )
            if svr_doc
            else None
        )
        return Pipeline(
            kind=kind,
            feature_names=tuple(doc["feature_names"]),
            standardizer=standardizer,
            pca=pca,
            linear=linear,
            svr=svr,
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc


def save_pipeline(path: str, pipeline: Pipeline) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_pipeline(pipeline))


def load_pipeline(path: str) -> Pipeline:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_pipeline(fh.read())
