"""Base learners with a uniform train/predict contract.

Kinds mirror the roles of a typical stacking library: a constant ``mean``
benchmark, a ridge-penalised ``regression`` (logistic for the binomial
family), a single CART ``tree``, ``bagged_trees`` and a ``random_forest``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _cart

log = logging.getLogger(__name__)

KINDS = ("mean", "regression", "tree", "bagged_trees", "random_forest")
FAMILIES = ("binomial", "gaussian")


@dataclass(frozen=True)
class LearnerSpec:
    name: str
    kind: str
    family: str = "binomial"
    tree_count: int = 200
    bag_count: int = 250
    features_per_split: int | None = None  # None: floor(sqrt(p))
    max_depth: int | None = None
    min_leaf: int = 5
    ridge_penalty: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}; expected one of {KINDS}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.tree_count < 1 or self.bag_count < 1:
            raise ValueError("tree_count and bag_count must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.ridge_penalty < 0:
            raise ValueError("ridge_penalty must be >= 0")

    def with_family(self, family: str) -> "LearnerSpec":
        return replace(self, family=family)


@dataclass
class TreeEnsemble:
    """Concatenated pre-order node arrays for one or more trees.

    ``feature[i] == -1`` marks a leaf. The left child of internal node ``i``
    is ``i + 1``; ``right[i]`` is relative to the tree's offset.
    """

    feature: np.ndarray
    threshold: np.ndarray
    right: np.ndarray
    value: np.ndarray
    offsets: np.ndarray

    @property
    def n_trees(self) -> int:
        return len(self.offsets) - 1

    def tree(self, k: int) -> "TreeEnsemble":
        a, b = self.offsets[k], self.offsets[k + 1]
        return TreeEnsemble(
            self.feature[a:b].copy(),
            self.threshold[a:b].copy(),
            self.right[a:b].copy(),
            self.value[a:b].copy(),
            np.array([0, b - a], dtype=np.int64),
        )

    @classmethod
    def concat(cls, trees) -> "TreeEnsemble":
        sizes = [len(t.feature) for t in trees]
        return cls(
            np.concatenate([t.feature for t in trees]).astype(np.int64),
            np.concatenate([t.threshold for t in trees]).astype(float),
            np.concatenate([t.right for t in trees]).astype(np.int64),
            np.concatenate([t.value for t in trees]).astype(float),
            np.r_[0, np.cumsum(sizes)].astype(np.int64),
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        return _cart.predict_ensemble(X, self.feature, self.threshold, self.right, self.value, self.offsets)


@dataclass
class LearnerModel:
    spec: LearnerSpec
    feature_names: tuple
    mean: float | None = None
    coef: np.ndarray | None = None  # intercept first
    trees: TreeEnsemble | None = None
    notes: list = field(default_factory=list)

    @property
    def kind(self) -> str:
        """Fitted kind; may be ``mean`` after a fallback."""
        if self.trees is not None:
            return "trees"
        if self.coef is not None:
            return "regression"
        return "mean"


def _as_arrays(X, feature_names=None):
    if hasattr(X, "values") and hasattr(X, "columns"):
        return np.asarray(X.values, dtype=float), tuple(X.columns)
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError("X must be two-dimensional")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(arr.shape[1]))
    return arr, names


def features_per_split(spec: LearnerSpec, p: int) -> int:
    """Configured features per split, clipped into ``[1, p]``."""
    if spec.kind == "tree" or spec.kind == "bagged_trees":
        return p
    m = spec.features_per_split if spec.features_per_split is not None else math.isqrt(p)
    return max(1, min(p, m))


def _tree_seeds(seed: int, count: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2**31 - 1, size=count, dtype=np.int64)


def _fit_regression(X, y, family, penalty, max_iter=100, tol=1e-10):
    # canonical row order: the fit must not depend on how rows were presented
    order = np.lexsort(np.column_stack([X, y]).T[::-1])
    X = X[order]
    y = y[order]
    n, p = X.shape
    A = np.column_stack([np.ones(n), X])
    P = penalty * np.eye(p + 1)
    P[0, 0] = 0.0
    if family == "gaussian":
        return np.linalg.solve(A.T @ A + P + 1e-12 * np.eye(p + 1), A.T @ y)
    beta = np.zeros(p + 1)
    ybar = math.fsum(y) / n
    beta[0] = math.log(ybar / (1 - ybar))
    for _ in range(max_iter):
        eta = np.clip(A @ beta, -30, 30)
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = np.maximum(mu * (1 - mu), 1e-10)
        H = (A * w[:, None]).T @ A + P + 1e-12 * np.eye(p + 1)
        g = A.T @ (y - mu) - P @ beta
        step = np.linalg.solve(H, g)
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            break
    return beta


def train(spec: LearnerSpec, X, y, feature_names=None) -> LearnerModel:
    """Fit one learner. ``X`` is a FeatureMatrix or a 2-D array."""
    X, names = _as_arrays(X, feature_names)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if p == 0:
        raise ValueError("no feature columns")
    if n != y.size:
        raise ValueError(f"X has {n} rows but y has {y.size}")
    if n < 2:
        raise ValueError("need at least 2 training rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite training data")
    if spec.family == "binomial" and not np.all((y == 0) | (y == 1)):
        raise ValueError("binomial family needs 0/1 targets")

    model = LearnerModel(spec=spec, feature_names=names)
    if spec.kind == "mean":
        model.mean = math.fsum(y) / n
        return model

    if spec.kind == "regression":
        if spec.family == "binomial" and (y.min() == y.max()):
            log.warning("learner %s: single-class response, falling back to the mean", spec.name)
            model.notes.append("single-class fallback to mean")
            model.mean = math.fsum(y) / n
            return model
        model.coef = _fit_regression(X, y, spec.family, spec.ridge_penalty)
        return model

    if spec.kind == "tree":
        count, bootstrap = 1, False
    elif spec.kind == "bagged_trees":
        count, bootstrap = spec.bag_count, True
    else:
        count, bootstrap = spec.tree_count, True
    mtry = features_per_split(spec, p)
    depth = -1 if spec.max_depth is None else spec.max_depth
    arrays = _cart.grow_ensemble(
        np.ascontiguousarray(X), np.ascontiguousarray(y), _tree_seeds(spec.seed, count),
        bootstrap, mtry, spec.min_leaf, depth,
    )
    model.trees = TreeEnsemble(*arrays)
    return model


def check_columns(model_names, names):
    if tuple(model_names) != tuple(names):
        raise ValueError(
            f"feature columns do not match the fitted model: expected {list(model_names)}, got {list(names)}"
        )


def predict(model: LearnerModel, X, feature_names=None) -> np.ndarray:
    """One score per row; binomial scores are clamped to [0, 1]."""
    X, names = _as_arrays(X, feature_names if feature_names is not None else model.feature_names)
    check_columns(model.feature_names, names)
    if X.shape[1] != len(model.feature_names):
        raise ValueError(f"expected {len(model.feature_names)} feature columns, got {X.shape[1]}")
    if model.trees is not None:
        out = model.trees.predict(X)
    elif model.coef is not None:
        eta = model.coef[0] + X @ model.coef[1:]
        if model.spec.family == "binomial":
            out = 1.0 / (1.0 + np.exp(-np.clip(eta, -30, 30)))
        else:
            out = eta
    else:
        out = np.full(X.shape[0], model.mean)
    if model.spec.family == "binomial":
        out = np.clip(out, 0.0, 1.0)
    return out
