"""Key-value configuration: shipped defaults, an optional user file, then overrides."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources

from .errors import DataError, EnvironmentFault
from .learners import LearnerSpec
from .synth import PROFILE_KINDS, GeneratorProfile, profile_from_mapping

FORMULA_NAMES = ("SL1", "SL2", "SL3", "SL4")

_LEARNER_INT = ("tree_count", "bag_count", "min_leaf", "seed")
_LEARNER_OPT_INT = ("features_per_split", "max_depth")


@dataclass
class Config:
    seed: int = 7
    split_ratio: float = 0.8
    stratified: bool = False
    k: int = 2
    folds: int = 10
    outer_folds: int = 10
    threshold: float = 0.5
    formulas: tuple = FORMULA_NAMES
    allow_missing_scores: bool = False
    library: list = field(default_factory=list)
    profiles: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    score_noise_sd: float = 0.35
    score_flip_prob: float = 0.05
    corpus_seed: int = 7
    raw: configparser.ConfigParser | None = None


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=None)
    cp.optionxform = str
    return cp


def default_text() -> str:
    return resources.files("socioinfo").joinpath("data/defaults.ini").read_text(encoding="utf-8")


def _learner(name, section) -> LearnerSpec:
    kwargs = {"name": name}
    for key, raw in section.items():
        raw = raw.strip()
        if key == "kind":
            kwargs[key] = raw
        elif key in _LEARNER_INT:
            kwargs[key] = int(raw)
        elif key in _LEARNER_OPT_INT:
            kwargs[key] = int(raw) if raw else None
        elif key == "ridge_penalty":
            kwargs[key] = float(raw)
        else:
            raise DataError(f"unknown key {key!r} in [learner.{name}]")
    if "kind" not in kwargs:
        raise DataError(f"[learner.{name}] needs a kind")
    return LearnerSpec(**kwargs)


def apply_override(cp: configparser.ConfigParser, assignment: str) -> None:
    """Apply one ``section.key=value`` override (section names may contain dots)."""
    if "=" not in assignment:
        raise DataError(f"override {assignment!r} is not of the form section.key=value")
    lhs, value = assignment.split("=", 1)
    section, dot, key = lhs.strip().rpartition(".")
    if not dot or not section or not key:
        raise DataError(f"override {assignment!r} is not of the form section.key=value")
    if not cp.has_section(section):
        cp.add_section(section)
    cp.set(section, key, value.strip())


def load_config(path=None, overrides=()) -> Config:
    cp = _parser()
    cp.read_string(default_text(), source="defaults.ini")
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh, source=str(path))
        except OSError as exc:
            raise EnvironmentFault(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        apply_override(cp, item)
    try:
        return _build(cp)
    except (ValueError, KeyError, configparser.Error) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"invalid configuration: {exc}") from exc


def _build(cp) -> Config:
    p = cp["pipeline"]
    formulas = tuple(s.strip() for s in p.get("formulas").split(",") if s.strip())
    for f in formulas:
        if f not in FORMULA_NAMES:
            raise DataError(f"unknown formula {f!r}; expected some of {FORMULA_NAMES}")
    names = [s.strip() for s in p.get("library").split(",") if s.strip()]
    library = []
    for name in names:
        sect = f"learner.{name}"
        if not cp.has_section(sect):
            raise DataError(f"library names {name!r} but there is no [{sect}] section")
        library.append(_learner(name, cp[sect]))
    profiles = {}
    for sect in cp.sections():
        if sect.startswith("profile."):
            kind = sect.split(".", 1)[1]
            if kind not in PROFILE_KINDS:
                raise DataError(f"unknown profile [{sect}]")
            profiles[kind] = profile_from_mapping(kind, dict(cp[sect]))
    c = cp["corpus"]
    counts = {k: c.getint(k) for k in PROFILE_KINDS if k in c}
    cfg = Config(
        seed=p.getint("seed"),
        split_ratio=p.getfloat("split_ratio"),
        stratified=p.getboolean("stratified"),
        k=p.getint("k"),
        folds=p.getint("folds"),
        outer_folds=p.getint("outer_folds"),
        threshold=p.getfloat("threshold"),
        formulas=formulas,
        allow_missing_scores=p.getboolean("allow_missing_scores"),
        library=library,
        profiles=profiles,
        counts=counts,
        score_noise_sd=c.getfloat("score_noise_sd"),
        score_flip_prob=c.getfloat("score_flip_prob"),
        corpus_seed=c.getint("seed"),
        raw=cp,
    )
    if cfg.k < 1:
        raise DataError("k must be >= 1")
    if cfg.folds < 2 or cfg.outer_folds < 2:
        raise DataError("fold counts must be >= 2")
    if not 0.0 < cfg.split_ratio < 1.0:
        raise DataError("split_ratio must lie strictly between 0 and 1")
    if not 0.0 <= cfg.threshold <= 1.0:
        raise DataError("threshold must lie in [0, 1]")
    return cfg


def default_profile(kind) -> GeneratorProfile:
    return load_config().profiles[kind]
