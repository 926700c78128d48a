"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 environment error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import load_config
from .corpus import read_feature_matrix
from .errors import DataError, EnvironmentFault
from .synth import PROFILE_KINDS, SynthConfig, generate_corpus

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ENV = 0, 1, 2, 3

log = logging.getLogger("socioinfo")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag dest -> config override key
_FLAG_KEYS = {
    "seed": "pipeline.seed",
    "k": "pipeline.k",
    "folds": "pipeline.folds",
    "outer_folds": "pipeline.outer_folds",
    "split_ratio": "pipeline.split_ratio",
    "threshold": "pipeline.threshold",
    "formulas": "pipeline.formulas",
    "library": "pipeline.library",
}


def _common(p):
    p.add_argument("--config", type=Path, help="key-value config file layered over the defaults")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config key; repeatable")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _pipeline_flags(p):
    p.add_argument("--seed", type=int, help="split and fold seed")
    p.add_argument("--k", type=int, help="k-core threshold")
    p.add_argument("--folds", type=int, help="Super Learner folds")
    p.add_argument("--split-ratio", type=float, help="training share")
    p.add_argument("--threshold", type=float, help="classification cutoff")
    p.add_argument("--formulas", help="comma-separated subset of SL1,SL2,SL3,SL4")
    p.add_argument("--library", help="comma-separated learner names")
    p.add_argument("--allow-missing-scores", action="store_true",
                   help="drop records without an external score from SL2-SL4 instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="socioinfo", description="Bot classification from ego-network features.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic corpus (edge lists + manifest)")
    _common(g)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--seed", type=int, help="master generator seed (corpus.seed)")
    g.add_argument("--count", action="append", default=[], metavar="KIND=N",
                   help=f"records per profile ({', '.join(PROFILE_KINDS)}); repeatable")
    g.add_argument("--score-noise-sd", type=float)
    g.add_argument("--score-flip-prob", type=float)

    e = sub.add_parser("extract", help="compute the 33 network features for a manifest")
    _common(e)
    e.add_argument("manifest", type=Path)
    e.add_argument("--out", type=Path, required=True)
    e.add_argument("--k", type=int, help="k-core threshold")

    t = sub.add_parser("train", help="split, scale and fit SL1-SL4 from a feature file")
    _common(t)
    _pipeline_flags(t)
    t.add_argument("features", type=Path)
    t.add_argument("--out", type=Path, required=True)

    ev = sub.add_parser("evaluate", help="score the held-out split with trained models")
    _common(ev)
    _pipeline_flags(ev)
    ev.add_argument("features", type=Path)
    ev.add_argument("--models", type=Path, required=True, help="output directory of 'train'")
    ev.add_argument("--out", type=Path, required=True)

    pp = sub.add_parser("pipeline", help="extract, train and evaluate in one run")
    _common(pp)
    _pipeline_flags(pp)
    pp.add_argument("manifest", type=Path)
    pp.add_argument("--out", type=Path, required=True)
    pp.add_argument("--from-features", action="store_true", help="treat the input as a feature file")

    cv = sub.add_parser("cv", help="nested cross-validation of every formula")
    _common(cv)
    _pipeline_flags(cv)
    cv.add_argument("--outer-folds", type=int)
    cv.add_argument("manifest", type=Path)
    cv.add_argument("--out", type=Path, required=True)
    cv.add_argument("--from-features", action="store_true", help="treat the input as a feature file")
    return parser


def _config(args):
    overrides = list(args.overrides)
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides.append(f"{key}={value}")
    if getattr(args, "allow_missing_scores", False):
        overrides.append("pipeline.allow_missing_scores=true")
    if args.command == "generate":
        if args.seed is not None:
            overrides.append(f"corpus.seed={args.seed}")
        if args.score_noise_sd is not None:
            overrides.append(f"corpus.score_noise_sd={args.score_noise_sd}")
        if args.score_flip_prob is not None:
            overrides.append(f"corpus.score_flip_prob={args.score_flip_prob}")
        for item in args.count:
            kind, _, n = item.partition("=")
            if kind not in PROFILE_KINDS:
                raise DataError(f"unknown profile kind in --count {item!r}")
            overrides.append(f"corpus.{kind}={n}")
    return load_config(args.config, overrides)


def _matrix(args, cfg, out):
    if args.from_features:
        return read_feature_matrix(args.manifest)
    return pipeline.extract(args.manifest, cfg, out)


def run(args) -> None:
    cfg = _config(args)
    if args.command == "generate":
        sc = SynthConfig(
            counts=cfg.counts,
            profiles=cfg.profiles,
            score_noise_sd=cfg.score_noise_sd,
            score_flip_prob=cfg.score_flip_prob,
            seed=cfg.corpus_seed,
            output_dir=args.out,
        )
        print(generate_corpus(sc))
    elif args.command == "extract":
        pipeline.extract(args.manifest, cfg, args.out)
        print(args.out / "features.csv")
    elif args.command == "train":
        pipeline.train_models(read_feature_matrix(args.features), cfg, args.out)
        print(args.out / "models")
    elif args.command == "evaluate":
        matrix = read_feature_matrix(args.features)
        sets = pipeline.read_split(args.models / "split.csv")
        test_rows = [i for i, rid in enumerate(matrix.ids) if sets.get(rid) == "test"]
        if not test_rows:
            raise DataError("no test rows of the split file occur in the feature file")
        models = pipeline.load_models(args.models / "models", cfg.formulas)
        table = pipeline.evaluate(matrix.take(test_rows), models, cfg, args.out)
        _print_table(table)
    elif args.command == "pipeline":
        table = pipeline.run_pipeline(args.manifest, cfg, args.out, from_features=args.from_features)
        _print_table(table)
    elif args.command == "cv":
        out = args.out
        reports = pipeline.run_cv(_matrix(args, cfg, out), cfg, out)
        for name, rep in reports.items():
            best = min(rep.methods, key=rep.mean)
            print(f"{name}: lowest mean CV risk {rep.mean(best):.4f} ({best})")


def _print_table(table) -> None:
    cols = pipeline.TABLE_MEASURES + ("risk",)
    print("model  " + "  ".join(f"{c:>17}" for c in cols))
    for name, entry in table.items():
        cells = [f"{entry[c]:17.3f}" if c in entry else f"{'-':>17}" for c in cols]
        print(f"{name:<6} " + "  ".join(cells))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        run(args)
    except EnvironmentFault as exc:
        log.error("%s", exc)
        return EXIT_ENV
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_ENV
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
