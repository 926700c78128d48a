"""Versioned text model files for fitted Super Learners.

The file is JSON: header fields (``format_version``, ``family``,
``feature_names``, scaler statistics), an ``ensemble`` section (learner
order, weights, folds, seed) and one section per learner. Trees are stored
in pre-order, internal nodes as ``[feature, threshold]`` and leaves as
``["leaf", value]``. Floats are written in shortest round-trip form, so
loading and re-saving reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .corpus import Scaler
from .errors import DataError
from .learners import LearnerModel, LearnerSpec, TreeEnsemble
from .superlearner import SuperLearnerModel

FORMAT_VERSION = 1


def _tree_to_nodes(t: TreeEnsemble, k: int) -> list:
    a, b = t.offsets[k], t.offsets[k + 1]
    nodes = []
    for i in range(a, b):
        if t.feature[i] < 0:
            nodes.append(["leaf", float(t.value[i])])
        else:
            nodes.append([int(t.feature[i]), float(t.threshold[i])])
    return nodes


def _nodes_to_tree(nodes) -> TreeEnsemble:
    m = len(nodes)
    feature = np.full(m, -1, dtype=np.int64)
    threshold = np.zeros(m)
    value = np.zeros(m)
    right = np.full(m, -1, dtype=np.int64)
    for i, node in enumerate(nodes):
        if node[0] == "leaf":
            value[i] = float(node[1])
        else:
            feature[i] = int(node[0])
            threshold[i] = float(node[1])
    # subtree sizes by reverse scan: children always follow their parent
    size = np.zeros(m + 1, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        if feature[i] < 0:
            size[i] = 1
        else:
            left = i + 1
            if left >= m or left + size[left] >= m:
                raise DataError("malformed tree: internal node without two children")
            right[i] = left + size[left]
            size[i] = 1 + size[left] + size[right[i]]
    if size[0] != m:
        raise DataError("malformed tree: node count does not match pre-order structure")
    return TreeEnsemble(feature, threshold, right, value, np.array([0, m], dtype=np.int64))


def _learner_to_dict(model: LearnerModel) -> dict:
    spec = asdict(model.spec)
    if model.trees is not None:
        fit = {"kind": "trees", "trees": [_tree_to_nodes(model.trees, k) for k in range(model.trees.n_trees)]}
    elif model.coef is not None:
        fit = {"kind": "regression", "coef": [float(c) for c in model.coef]}
    else:
        fit = {"kind": "mean", "mean": float(model.mean)}
    return {"name": model.spec.name, "spec": spec, "fit": fit}


def _learner_from_dict(d, feature_names) -> LearnerModel:
    spec = LearnerSpec(**d["spec"])
    fit = d["fit"]
    model = LearnerModel(spec=spec, feature_names=tuple(feature_names))
    if fit["kind"] == "trees":
        model.trees = TreeEnsemble.concat([_nodes_to_tree(t) for t in fit["trees"]])
    elif fit["kind"] == "regression":
        model.coef = np.array(fit["coef"], dtype=float)
    elif fit["kind"] == "mean":
        model.mean = float(fit["mean"])
    else:
        raise DataError(f"unknown fitted kind {fit['kind']!r}")
    return model


def model_to_dict(m: SuperLearnerModel, meta=None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "meta": dict(meta or {}),
        "family": m.family,
        "feature_names": list(m.feature_names),
        "scaler": m.scaler.to_dict() if m.scaler is not None else None,
        "ensemble": {
            "learners": m.names,
            "weights": [float(w) for w in m.weights],
            "cv_risk": [float(r) for r in m.cv_risk],
            "folds": int(m.folds),
            "seed": int(m.seed),
        },
        "learners": [_learner_to_dict(mod) for mod in m.models],
    }


def dumps(m: SuperLearnerModel, meta=None) -> str:
    return json.dumps(model_to_dict(m, meta), indent=1) + "\n"


def loads(text: str) -> tuple[SuperLearnerModel, dict]:
    """Parse a model file; returns the model and its ``meta`` mapping."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid: {exc}") from exc
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported model format_version {version!r}")
    names = tuple(d["feature_names"])
    models = [_learner_from_dict(ld, names) for ld in d["learners"]]
    ens = d["ensemble"]
    if [mod.spec.name for mod in models] != ens["learners"]:
        raise DataError("ensemble learner order does not match learner sections")
    model = SuperLearnerModel(
        library=[mod.spec for mod in models],
        weights=np.array(ens["weights"], dtype=float),
        models=models,
        family=d["family"],
        feature_names=names,
        folds=int(ens["folds"]),
        seed=int(ens["seed"]),
        cv_risk=np.array(ens["cv_risk"], dtype=float),
        scaler=Scaler.from_dict(d["scaler"]) if d.get("scaler") else None,
    )
    return model, d.get("meta", {})


def save(path, m: SuperLearnerModel, meta=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(m, meta))


def load(path) -> tuple[SuperLearnerModel, dict]:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
