"""Corpus manifests, feature matrices, train/test splitting, scaling and duplicate detection."""

from __future__ import annotations

import csv
import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, EnvironmentFault
from .graph import read_edge_list
from .measures import FEATURE_NAMES, feature_vector

log = logging.getLogger(__name__)

MANIFEST_HEADER = ("id", "label", "score", "path")


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    label: int
    score: float | None
    path: Path

    def __post_init__(self):
        if self.label not in (0, 1):
            raise DataError(f"record {self.id}: label must be 0 or 1, got {self.label!r}")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise DataError(f"record {self.id}: score {self.score} outside [0, 1]")


def _parse_label(text, where):
    try:
        value = int(text)
    except ValueError:
        raise DataError(f"{where}: label {text!r} is not an integer") from None
    if value not in (0, 1):
        raise DataError(f"{where}: label must be 0 or 1, got {value}")
    return value


def _parse_score(text, where):
    text = text.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{where}: score {text!r} is not a number") from None
    if not (0.0 <= value <= 1.0):
        raise DataError(f"{where}: score {value} outside [0, 1]")
    return value


def load_manifest(path) -> list[CorpusRecord]:
    """Read ``id,label,score,path`` rows. Network paths resolve against the manifest's directory."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise EnvironmentFault(f"cannot open manifest {path}: {exc}") from exc
    base = path.parent
    records = []
    seen = set()
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise DataError(f"{path}: header must be {','.join(MANIFEST_HEADER)}")
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"{path.name} row {rowno}"
            if len(row) != 4:
                raise DataError(f"{where}: expected 4 fields, got {len(row)}")
            rid = row[0].strip()
            if rid in seen:
                raise DataError(f"{where}: duplicate id {rid!r}")
            seen.add(rid)
            records.append(
                CorpusRecord(rid, _parse_label(row[1], where), _parse_score(row[2], where), base / row[3].strip())
            )
    return records


def write_manifest(path, records, relative_to=None) -> None:
    path = Path(path)
    base = Path(relative_to) if relative_to is not None else path.parent
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for r in records:
            rel = os.path.relpath(r.path, base)
            w.writerow([r.id, r.label, "" if r.score is None else format_number(r.score), Path(rel).as_posix()])


def format_number(v) -> str:
    """Shortest exact text for a float; integral values are written without a fraction."""
    v = float(v)
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


@dataclass
class FeatureMatrix:
    """Rows of named numeric features plus labels and optional external scores.

    Missing scores are NaN in ``scores``.
    """

    ids: tuple
    columns: tuple
    values: np.ndarray
    labels: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        self.ids = tuple(self.ids)
        self.columns = tuple(self.columns)
        self.values = np.asarray(self.values, dtype=float).reshape(len(self.ids), len(self.columns))
        self.labels = np.asarray(self.labels, dtype=int).ravel()
        self.scores = np.asarray(self.scores, dtype=float).ravel()
        if len(set(self.columns)) != len(self.columns):
            raise DataError("duplicate column names")
        if not (len(self.labels) == len(self.scores) == len(self.ids)):
            raise DataError("ids, labels and scores differ in length")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def has_score(self) -> np.ndarray:
        return ~np.isnan(self.scores)

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        return FeatureMatrix(
            tuple(self.ids[i] for i in rows), self.columns, self.values[rows], self.labels[rows], self.scores[rows]
        )

    def select(self, columns) -> "FeatureMatrix":
        idx = [self.columns.index(c) for c in columns]
        return FeatureMatrix(self.ids, tuple(columns), self.values[:, idx], self.labels, self.scores)

    def with_score_column(self, name="score") -> "FeatureMatrix":
        """Append the external score as a predictor column."""
        return FeatureMatrix(
            self.ids, self.columns + (name,), np.column_stack([self.values, self.scores]), self.labels, self.scores
        )


def extract_features(records, k=2) -> FeatureMatrix:
    rows = []
    for r in records:
        try:
            net = read_edge_list(r.path)
        except OSError as exc:
            raise EnvironmentFault(f"record {r.id}: cannot read network {r.path}: {exc}") from exc
        fv = feature_vector(net, k)
        rows.append([fv[c] for c in FEATURE_NAMES])
    values = np.array(rows, dtype=float).reshape(len(records), len(FEATURE_NAMES))
    return FeatureMatrix(
        tuple(r.id for r in records),
        FEATURE_NAMES,
        values,
        [r.label for r in records],
        [np.nan if r.score is None else r.score for r in records],
    )


def write_feature_matrix(path, m: FeatureMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "label", "score") + m.columns)
        for i, rid in enumerate(m.ids):
            score = "" if math.isnan(m.scores[i]) else format_number(m.scores[i])
            w.writerow([rid, int(m.labels[i]), score] + [format_number(v) for v in m.values[i]])


def read_feature_matrix(path) -> FeatureMatrix:
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise EnvironmentFault(f"cannot open feature matrix {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:3]) != ("id", "label", "score"):
            raise DataError(f"{path}: header must start with id,label,score")
        columns = tuple(header[3:])
        ids, labels, scores, values = [], [], [], []
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path.name} row {rowno}"
            if len(row) != len(header):
                raise DataError(f"{where}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0])
            labels.append(_parse_label(row[1], where))
            s = _parse_score(row[2], where)
            scores.append(np.nan if s is None else s)
            try:
                values.append([float(v) for v in row[3:]])
            except ValueError:
                raise DataError(f"{where}: non-numeric feature value") from None
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate ids")
    return FeatureMatrix(ids, columns, np.array(values, dtype=float).reshape(len(ids), len(columns)), labels, scores)


def split_indices(n, ratio=0.8, seed=0, labels=None, stratified=False):
    """Row indices ``(train, test)`` from a seeded random permutation.

    Train size is ``round(ratio * n)``. With ``stratified`` each class is
    split separately at the same ratio.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie strictly between 0 and 1, got {ratio}")
    if n < 2:
        raise DataError(f"cannot split {n} rows")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        cut = min(max(int(round(ratio * n)), 1), n - 1)
        return np.sort(perm[:cut]), np.sort(perm[cut:])
    labels = np.asarray(labels)
    train, test = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        perm = rng.permutation(members)
        cut = int(round(ratio * len(members)))
        train.extend(perm[:cut])
        test.extend(perm[cut:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def train_test_split(matrix: FeatureMatrix, ratio=0.8, seed=0, stratified=False):
    tr, te = split_indices(len(matrix), ratio, seed, matrix.labels, stratified)
    return matrix.take(tr), matrix.take(te)


@dataclass(frozen=True)
class Scaler:
    columns: tuple
    mean: np.ndarray
    sd: np.ndarray

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "mean": [float(v) for v in self.mean], "sd": [float(v) for v in self.sd]}

    @classmethod
    def from_dict(cls, d) -> "Scaler":
        return cls(tuple(d["columns"]), np.array(d["mean"], dtype=float), np.array(d["sd"], dtype=float))


def fit_scaler(train: FeatureMatrix) -> Scaler:
    """Column means and sample (n - 1) standard deviations of the training matrix."""
    x = train.values
    if x.shape[0] < 2:
        raise DataError("need at least 2 rows to fit a scaler")
    mean = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1)
    return Scaler(train.columns, mean, sd)


def apply_scaler(s: Scaler, m: FeatureMatrix) -> FeatureMatrix:
    if tuple(m.columns) != tuple(s.columns):
        raise ValueError(f"scaler columns {list(s.columns)} do not match matrix columns {list(m.columns)}")
    safe = np.where(s.sd > 0, s.sd, 1.0)
    scaled = np.where(s.sd > 0, (m.values - s.mean) / safe, 0.0)
    return FeatureMatrix(m.ids, m.columns, scaled, m.labels, m.scores)


def find_duplicates(matrix: FeatureMatrix) -> list[list]:
    """Groups of row ids whose feature values are exactly equal (singletons omitted)."""
    groups = defaultdict(list)
    for rid, row in zip(matrix.ids, matrix.values):
        # + 0.0 folds -0.0 into 0.0 so byte keys compare numerically
        groups[(row + 0.0).tobytes()].append(rid)
    return [g for g in groups.values() if len(g) > 1]
