"""Super Learner: V-fold level-one predictions, simplex meta-weights, refit and nested CV."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .learners import LearnerSpec, _as_arrays, check_columns, predict, train
from .nnls import simplex_least_squares

log = logging.getLogger(__name__)

ENSEMBLE = "SuperLearner"
DISCRETE = "DiscreteSL"


@dataclass
class LevelOneMatrix:
    Z: np.ndarray
    folds: np.ndarray
    library: list
    # (fold, learner name, message) for every substituted column block
    failures: list = field(default_factory=list)

    @property
    def names(self) -> list:
        return [s.name for s in self.library]

    def cv_risk(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.mean((self.Z - y[:, None]) ** 2, axis=0)


@dataclass
class SuperLearnerModel:
    library: list
    weights: np.ndarray
    models: list
    family: str
    feature_names: tuple
    folds: int
    seed: int
    cv_risk: np.ndarray
    scaler: object = None

    @property
    def names(self) -> list:
        return [s.name for s in self.library]


@dataclass
class CvReport:
    """Held-out risk per outer fold for the ensemble, the discrete SL and every learner."""

    methods: list
    risks: dict  # method -> list of per-fold risks
    folds: int

    def mean(self, method) -> float:
        return float(np.mean(self.risks[method]))

    def se(self, method) -> float:
        r = np.asarray(self.risks[method], dtype=float)
        if r.size < 2:
            return 0.0
        return float(r.std(ddof=1) / math.sqrt(r.size))

    def rows(self):
        """``(method, fold, risk)`` rows, folds numbered from 1."""
        for m in self.methods:
            for k, r in enumerate(self.risks[m], start=1):
                yield m, k, r


def fold_assignment(n: int, V: int, seed: int) -> np.ndarray:
    """Seeded permutation dealt round-robin into ``V`` folds (sizes differ by at most one)."""
    if V < 2:
        raise ValueError(f"need at least 2 folds, got {V}")
    if n < V:
        raise ValueError(f"cannot make {V} folds from {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.empty(n, dtype=int)
    folds[perm] = np.arange(n) % V
    return folds


def _check_library(library):
    if not library:
        raise ValueError("learner library is empty")
    names = [s.name for s in library]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate learner names in library: {names}")


def build_level_one(library, X, y, V=10, seed=0, feature_names=None) -> LevelOneMatrix:
    _check_library(library)
    X, names = _as_arrays(X, feature_names)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    folds = fold_assignment(n, V, seed)
    Z = np.empty((n, len(library)))
    failures = []
    for v in range(V):
        held = folds == v
        fit_rows = ~held
        for l, spec in enumerate(library):
            try:
                model = train(spec, X[fit_rows], y[fit_rows], names)
                Z[held, l] = predict(model, X[held], names)
            except Exception as exc:  # a failing learner must not abort the ensemble
                log.warning("learner %s failed on fold %d (%s); substituting the fold mean", spec.name, v, exc)
                failures.append((v, spec.name, str(exc)))
                Z[held, l] = math.fsum(y[fit_rows]) / fit_rows.sum()
    if not np.all(np.isfinite(Z)):
        raise ArithmeticError("non-finite level-one predictions")
    return LevelOneMatrix(Z, folds, list(library), failures)


def solve_simplex_weights(Z, y) -> np.ndarray:
    """Convex weights minimising the squared error of ``Z @ w`` against ``y``."""
    Z = Z.Z if isinstance(Z, LevelOneMatrix) else np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if Z.shape[0] != y.size:
        raise ValueError("Z and y differ in row count")
    if not np.all(np.isfinite(Z)):
        raise ValueError("non-finite level-one matrix")
    return simplex_least_squares(Z, y)


def _refit(library, X, y, names):
    models = []
    for spec in library:
        try:
            models.append(train(spec, X, y, names))
        except Exception as exc:
            log.warning("learner %s failed on the full data (%s); substituting the mean", spec.name, exc)
            mean_spec = LearnerSpec(name=spec.name, kind="mean", family=spec.family)
            models.append(train(mean_spec, X, y, names))
    return models


def fit_super_learner(library, X, y, V=10, seed=0, feature_names=None, scaler=None) -> SuperLearnerModel:
    X, names = _as_arrays(X, feature_names)
    y = np.asarray(y, dtype=float).ravel()
    families = {s.family for s in library}
    if len(families) != 1:
        raise ValueError(f"library mixes families {sorted(families)}")
    level_one = build_level_one(library, X, y, V, seed, names)
    weights = solve_simplex_weights(level_one, y)
    return SuperLearnerModel(
        library=list(library),
        weights=weights,
        models=_refit(library, X, y, names),
        family=families.pop(),
        feature_names=names,
        folds=V,
        seed=seed,
        cv_risk=level_one.cv_risk(y),
        scaler=scaler,
    )


def learner_predictions(m: SuperLearnerModel, X, feature_names=None) -> np.ndarray:
    """``n x L`` matrix of each refit learner's predictions."""
    X, names = _as_arrays(X, feature_names if feature_names is not None else m.feature_names)
    check_columns(m.feature_names, names)
    return np.column_stack([predict(mod, X, names) for mod in m.models])


def predict_ensemble(m: SuperLearnerModel, X, feature_names=None) -> np.ndarray:
    P = learner_predictions(m, X, feature_names)
    out = P @ m.weights
    if m.family == "binomial":
        out = np.clip(out, 0.0, 1.0)
    return out


def cross_validate_ensemble(library, X, y, V_outer=10, V_inner=10, seed=0, feature_names=None) -> CvReport:
    """Nested CV: a full Super Learner per outer fold, scored on the held-out fold.

    Each learner's held-out risk comes from its refit on the outer
    complement; the discrete SL is the learner with the lowest inner CV risk.
    """
    _check_library(library)
    X, names = _as_arrays(X, feature_names)
    y = np.asarray(y, dtype=float).ravel()
    outer = fold_assignment(X.shape[0], V_outer, seed)
    methods = [ENSEMBLE, DISCRETE] + [s.name for s in library]
    risks = {m: [] for m in methods}
    for v in range(V_outer):
        held = outer == v
        inner_seed = int(np.random.default_rng([seed, v]).integers(2**31 - 1))
        sl = fit_super_learner(library, X[~held], y[~held], V_inner, inner_seed, names)
        P = learner_predictions(sl, X[held], names)
        ens = P @ sl.weights
        if sl.family == "binomial":
            ens = np.clip(ens, 0.0, 1.0)
        yv = y[held]
        risks[ENSEMBLE].append(float(np.mean((ens - yv) ** 2)))
        learner_risk = np.mean((P - yv[:, None]) ** 2, axis=0)
        for l, spec in enumerate(library):
            risks[spec.name].append(float(learner_risk[l]))
        risks[DISCRETE].append(float(learner_risk[int(np.argmin(sl.cv_risk))]))
    return CvReport(methods, risks, V_outer)
