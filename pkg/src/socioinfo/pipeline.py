"""Experiment orchestration: features, split, scaling, SL1-SL4 fits, evaluation and CV reports.

Every output is a deterministic function of the inputs, the configuration
and its seeds; nothing time- or host-dependent is written.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import modelio
from .config import Config
from .corpus import (
    FeatureMatrix,
    apply_scaler,
    extract_features,
    find_duplicates,
    fit_scaler,
    format_number,
    load_manifest,
    read_feature_matrix,
    split_indices,
    write_feature_matrix,
)
from .errors import DataError, EnvironmentFault
from .measures import FEATURE_NAMES
from .metrics import classification_summary, mse_risk
from .superlearner import cross_validate_ensemble, fit_super_learner, predict_ensemble

log = logging.getLogger(__name__)

SCORE_COLUMN = "score"
TABLE_MEASURES = ("auc", "balanced_accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ModelFormula:
    name: str
    outcome: str  # "label" or "external_score"
    predictors: tuple  # subset of ("network_features", "external_score")
    family: str

    @property
    def needs_score(self) -> bool:
        return self.outcome == "external_score" or "external_score" in self.predictors


FORMULAS = {
    "SL1": ModelFormula("SL1", "label", ("network_features",), "binomial"),
    "SL2": ModelFormula("SL2", "external_score", ("network_features",), "gaussian"),
    "SL3": ModelFormula("SL3", "label", ("external_score",), "binomial"),
    "SL4": ModelFormula("SL4", "label", ("network_features", "external_score"), "binomial"),
}


def design(formula: ModelFormula, scaled: FeatureMatrix):
    """Predictor matrix and response for one formula from a scaled feature matrix.

    Rows must all carry an external score when the formula uses it.
    """
    if formula.needs_score and not scaled.has_score.all():
        missing = [rid for rid, ok in zip(scaled.ids, scaled.has_score) if not ok]
        raise DataError(f"{formula.name} needs external scores; missing for {len(missing)} records: {missing[:10]}")
    parts, names = [], []
    if "network_features" in formula.predictors:
        parts.append(scaled.values)
        names.extend(scaled.columns)
    if "external_score" in formula.predictors:
        parts.append(scaled.scores[:, None])
        names.append(SCORE_COLUMN)
    X = FeatureMatrix(scaled.ids, names, np.column_stack(parts), scaled.labels, scaled.scores)
    y = scaled.labels.astype(float) if formula.outcome == "label" else scaled.scores.copy()
    return X, y


def usable_rows(formula: ModelFormula, m: FeatureMatrix, allow_missing: bool) -> FeatureMatrix:
    if not formula.needs_score or m.has_score.all():
        return m
    missing = [rid for rid, ok in zip(m.ids, m.has_score) if not ok]
    if not allow_missing:
        raise DataError(
            f"{formula.name} needs external scores; missing for {len(missing)} records: "
            f"{', '.join(missing[:10])}{' ...' if len(missing) > 10 else ''}"
        )
    log.warning("%s: excluding %d records without an external score", formula.name, len(missing))
    return m.take(np.flatnonzero(m.has_score))


def _library(cfg: Config, formula: ModelFormula):
    return [replace(spec, family=formula.family) for spec in cfg.library]


def _mkdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EnvironmentFault(f"cannot create directory {path}: {exc}") from exc
    return path


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise EnvironmentFault(f"cannot write {path}: {exc}") from exc


def _num(v) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format_number(v)


# ---------------------------------------------------------------------------
# extract


def extract(manifest, cfg: Config, out_dir) -> FeatureMatrix:
    """Features for every manifest record, written to ``features.csv``; duplicates to ``duplicates.csv``."""
    out = _mkdir(Path(out_dir))
    records = load_manifest(manifest)
    matrix = extract_features(records, cfg.k)
    write_feature_matrix(out / "features.csv", matrix)
    write_duplicates(out / "duplicates.csv", matrix)
    return matrix


def write_duplicates(path, matrix: FeatureMatrix) -> list:
    groups = find_duplicates(matrix)
    label = dict(zip(matrix.ids, matrix.labels))
    rows = []
    for g, members in enumerate(groups, start=1):
        mixed = len({label[r] for r in members}) > 1
        if mixed:
            log.warning("duplicate group %d has conflicting labels: %s", g, members)
        rows.extend((g, rid, int(label[rid]), int(mixed)) for rid in members)
    _write_csv(Path(path), ("group", "id", "label", "conflicting_labels"), rows)
    return groups


# ---------------------------------------------------------------------------
# train


@dataclass
class TrainResult:
    train: FeatureMatrix
    test: FeatureMatrix
    scaler: object
    models: dict  # formula name -> SuperLearnerModel


def split_and_scale(matrix: FeatureMatrix, cfg: Config):
    tr, te = split_indices(len(matrix), cfg.split_ratio, cfg.seed, matrix.labels, cfg.stratified)
    train, test = matrix.take(tr), matrix.take(te)
    scaler = fit_scaler(train)
    return train, test, scaler


def train_models(matrix: FeatureMatrix, cfg: Config, out_dir=None) -> TrainResult:
    """Split, scale on the training rows and fit every configured formula."""
    matrix = matrix.select(FEATURE_NAMES) if matrix.columns != FEATURE_NAMES else matrix
    train, test, scaler = split_and_scale(matrix, cfg)
    scaled = apply_scaler(scaler, train)
    models = {}
    for name in cfg.formulas:
        formula = FORMULAS[name]
        rows = usable_rows(formula, scaled, cfg.allow_missing_scores)
        X, y = design(formula, rows)
        log.info("fitting %s on %d rows, %d predictors", name, len(X), len(X.columns))
        models[name] = fit_super_learner(_library(cfg, formula), X, y, cfg.folds, cfg.seed, scaler=scaler)
    result = TrainResult(train, test, scaler, models)
    if out_dir is not None:
        write_training_outputs(Path(out_dir), result)
    return result


def write_training_outputs(out: Path, result: TrainResult) -> None:
    model_dir = _mkdir(out / "models")
    rows = [(rid, "train") for rid in result.train.ids] + [(rid, "test") for rid in result.test.ids]
    _write_csv(out / "split.csv", ("id", "set"), rows)
    table = []
    for name, m in result.models.items():
        f = FORMULAS[name]
        meta = {"formula": name, "outcome": f.outcome, "predictors": list(f.predictors)}
        try:
            modelio.save(model_dir / f"{name}.json", m, meta)
        except OSError as exc:
            raise EnvironmentFault(f"cannot write model {name}: {exc}") from exc
        for learner, risk, w in zip(m.names, m.cv_risk, m.weights):
            table.append((name, learner, _num(float(risk)), _num(float(w))))
    _write_csv(out / "learners.csv", ("model", "learner", "cv_risk", "weight"), table)


def read_split(path) -> dict:
    sets = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                sets[row["id"]] = row["set"]
    except OSError as exc:
        raise EnvironmentFault(f"cannot read split file {path}: {exc}") from exc
    return sets


def load_models(model_dir, formulas) -> dict:
    models = {}
    for name in formulas:
        path = Path(model_dir) / f"{name}.json"
        if not path.exists():
            raise EnvironmentFault(f"missing model file {path}")
        models[name] = modelio.load(path)[0]
    return models


# ---------------------------------------------------------------------------
# evaluate


def evaluate(test: FeatureMatrix, models: dict, cfg: Config, out_dir) -> dict:
    """Score the test rows with every model and write metrics, curves and predictions.

    Returns ``{model: {measure: value}}``. SL2 predicts the external score,
    so only its squared-error risk is reported.
    """
    out = _mkdir(Path(out_dir))
    curve_dir = _mkdir(out / "curves")
    table = {}
    metric_rows = []
    pred_cols = {}
    for name, m in models.items():
        formula = FORMULAS[name]
        rows = usable_rows(formula, test, cfg.allow_missing_scores)
        if m.scaler is None:
            raise DataError(f"model {name} carries no scaler")
        X, y = design(formula, apply_scaler(m.scaler, rows))
        scores = predict_ensemble(m, X)
        pred_cols[name] = dict(zip(rows.ids, scores))
        entry = {}
        if formula.outcome == "label":
            rep = classification_summary(scores, y, cfg.threshold)
            entry.update(rep.measures())
            if rep.roc_points:
                _write_csv(curve_dir / f"roc_{name}.csv", ("threshold", "x", "y"),
                           [(_num(t), _num(x), _num(v)) for t, x, v in rep.roc_points])
                _write_csv(curve_dir / f"pr_{name}.csv", ("threshold", "x", "y"),
                           [(_num(t), _num(x), _num(v)) for t, x, v in rep.pr_points])
        entry["risk"] = mse_risk(scores, y)
        table[name] = entry
        metric_rows.extend((name, k, _num(float(v))) for k, v in entry.items())
        if formula.outcome == "label":
            metric_rows.extend((name, k, str(getattr(rep, k))) for k in ("tp", "fp", "tn", "fn"))
    _write_csv(out / "metrics.csv", ("model", "measure", "value"), metric_rows)
    header = ("model",) + TABLE_MEASURES + ("risk",)
    _write_csv(out / "comparison.csv", header,
               [(n,) + tuple(_num(float(e[k])) if k in e else "" for k in header[1:]) for n, e in table.items()])
    pred_rows = []
    for i, rid in enumerate(test.ids):
        score = "" if math.isnan(test.scores[i]) else _num(float(test.scores[i]))
        cells = [_num(float(pred_cols[n][rid])) if rid in pred_cols[n] else "" for n in models]
        pred_rows.append([rid, int(test.labels[i]), score] + cells)
    _write_csv(out / "predictions.csv", ("id", "label", "score") + tuple(models), pred_rows)
    return table


# ---------------------------------------------------------------------------
# full runs


def run_pipeline(source, cfg: Config, out_dir, from_features=False) -> dict:
    """Manifest (or feature file) in; features, models, metrics and curves out."""
    out = _mkdir(Path(out_dir))
    if from_features:
        matrix = read_feature_matrix(source)
        write_duplicates(out / "duplicates.csv", matrix)
    else:
        matrix = extract(source, cfg, out)
    result = train_models(matrix, cfg, out)
    return evaluate(result.test, result.models, cfg, out)


def run_cv(matrix: FeatureMatrix, cfg: Config, out_dir) -> dict:
    """Nested cross-validation of every formula on the scaled training split.

    Writes ``cv_<formula>.csv`` with ``method,fold,risk`` rows and a
    ``cv_summary.csv`` of means and standard errors.
    """
    out = _mkdir(Path(out_dir))
    matrix = matrix.select(FEATURE_NAMES) if matrix.columns != FEATURE_NAMES else matrix
    train, _, scaler = split_and_scale(matrix, cfg)
    scaled = apply_scaler(scaler, train)
    reports = {}
    summary = []
    for name in cfg.formulas:
        formula = FORMULAS[name]
        X, y = design(formula, usable_rows(formula, scaled, cfg.allow_missing_scores))
        log.info("cross-validating %s", name)
        rep = cross_validate_ensemble(_library(cfg, formula), X, y, cfg.outer_folds, cfg.folds, cfg.seed)
        reports[name] = rep
        _write_csv(out / f"cv_{name}.csv", ("method", "fold", "risk"),
                   [(m, k, _num(r)) for m, k, r in rep.rows()])
        summary.extend((name, m, _num(rep.mean(m)), _num(rep.se(m))) for m in rep.methods)
    _write_csv(out / "cv_summary.csv", ("model", "method", "mean_risk", "se"), summary)
    return reports
