"""Command-line driver: features -> FSW pruning -> EDRM/SM/TM -> lexicons -> report.

Usage::

    gestlex --preset fig1 --alpha 0 --sizes 2-3 --mode both --validate --out run.json
    gestlex --input feats.csv --ratings ratings.csv --alpha 0.5 --sizes 2,3,4

The report is JSON with sorted keys and floats rounded to 12 significant
digits, so identical inputs give byte-identical files.  The EDRM, SM and TM
matrices are also written as ``<out stem>_<name>.csv``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver failure,
5 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import FeatureDataset, filter_features, fsw_all, load_features
from .edrm import ScoreMatrices, edrm_matrix, DEFAULT_MAX_ITER
from .ellipsoid import DEFAULT_SCALE_FRACTION
from .errors import ConfigError, DataError, EnumerationCapError, GestlexError, SolverError
from .oracle import PRESETS, SyntheticSpec, brute_force_best_lexicon, generate_synthetic, preset
from .selection import (ENUMERATION_CAP, RatingTable, best_lexicon, load_ratings, sm_matrix,
                        total_measure_matrix)

log = logging.getLogger("gestlex")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_SOLVER, EXIT_CAP = 0, 2, 3, 4, 5
SIG_DIGITS = 12


@dataclass
class RunConfig:
    input: str | None = None
    preset: str | None = None
    synthetic: dict | None = None
    ratings: str | dict | None = None
    alpha: float = 0.0
    scale_fraction: float = DEFAULT_SCALE_FRACTION
    epsilon: float | None = None
    max_iter: int = DEFAULT_MAX_ITER
    sizes: list = field(default_factory=lambda: [2, 3])
    mode: str = "exact"
    include: list = field(default_factory=list)
    exclude: list = field(default_factory=list)
    one_of: list = field(default_factory=list)
    fsw_top_k: int | None = None
    fsw_threshold: float | None = None
    seed: int = 0
    validate: bool = False
    train_fraction: float = 0.3
    force_enumeration: bool = False
    strict_solver: bool = False
    out: str | None = None

    def __post_init__(self):
        sources = [s for s in (self.input, self.preset, self.synthetic) if s is not None]
        if len(sources) != 1:
            raise ConfigError("give exactly one of input, preset or synthetic")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha={self.alpha} outside [0, 1]")
        if not 0.5 <= self.scale_fraction <= 1.0:
            raise ConfigError(f"scale_fraction={self.scale_fraction} outside [0.5, 1]")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be > 0")
        self.sizes = sorted({int(n) for n in self.sizes})
        if not self.sizes or self.sizes[0] < 2:
            raise ConfigError("lexicon sizes must each be >= 2")
        if self.mode not in ("exact", "greedy", "both"):
            raise ConfigError(f"mode must be exact, greedy or both, not {self.mode!r}")
        if self.alpha > 0 and self.ratings is None:
            raise ConfigError("ratings are required when alpha > 0")
        if self.fsw_top_k is not None and self.fsw_threshold is not None:
            raise ConfigError("give at most one of fsw_top_k and fsw_threshold")
        if self.fsw_top_k is not None and self.fsw_top_k < 1:
            raise ConfigError("fsw_top_k must be >= 1")
        if self.fsw_threshold is not None and not self.fsw_threshold > 0:
            raise ConfigError("fsw_threshold must be > 0")
        self.include = list(self.include or [])
        self.exclude = list(self.exclude or [])
        self.one_of = list(self.one_of or [])

    @property
    def modes(self):
        return ["exact", "greedy"] if self.mode == "both" else [self.mode]


# -- serialization -----------------------------------------------------------

def _round(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist())
    if isinstance(x, (np.floating,)):
        return _round(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps_report(report) -> str:
    return json.dumps(_round(report), sort_keys=True, indent=1) + "\n"


def write_matrix_csv(path, labels, matrix):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", *labels])
        for label, row in zip(labels, np.asarray(matrix)):
            w.writerow([label, *(repr(_round(float(v))) for v in row)])


def load_matrix_csv(path):
    """Read a matrix written by :func:`write_matrix_csv`; returns ``(labels, matrix)``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "class":
        raise DataError(f"{path}: not a matrix CSV", line=1)
    labels = rows[0][1:]
    body = rows[1:]
    if [r[0] for r in body] != labels or any(len(r) != len(labels) + 1 for r in body):
        raise DataError(f"{path}: matrix is not square or labels disagree")
    return labels, np.array([[float(v) for v in r[1:]] for r in body])


# -- pipeline ------------------------------------------------------------------

@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except GestlexError as exc:
        if not getattr(exc, "stage", None):
            exc.stage = name
        raise


def _load_dataset(cfg: RunConfig) -> FeatureDataset:
    if cfg.input is not None:
        return load_features(cfg.input)
    if cfg.preset is not None:
        return preset(cfg.preset, seed=cfg.seed)
    spec = SyntheticSpec.from_dict({"seed": cfg.seed, **cfg.synthetic})
    return generate_synthetic(spec)


def _fsw_dict(ds: FeatureDataset):
    return {str(i): float(v) for i, v in zip(ds.feature_index, fsw_all(ds))}


def score_matrices(ds: FeatureDataset, cfg: RunConfig, ratings=None) -> ScoreMatrices:
    with _stage("edrm"):
        S = edrm_matrix(ds, cfg.scale_fraction, epsilon=cfg.epsilon, max_iter=cfg.max_iter)
        if cfg.strict_solver and S.failed_pairs:
            bad = [p for p in S.pairs if not p.ok]
            raise SolverError(f"pair {bad[0].a}-{bad[0].b}: {bad[0].error or 'validity check failed'}",
                              bad[0].as_dict())
    if ratings is None:
        return S
    with _stage("selection"):
        ratings.require(ds.classes)
        sm = sm_matrix(ratings, ds.classes)
        tm = total_measure_matrix(S.edrm, sm, cfg.alpha)
    return dataclasses.replace(S, sm=sm, tm=tm, alpha=cfg.alpha)


def run(cfg: RunConfig) -> dict:
    """Execute one configuration and return the report dictionary.

    When ``cfg.out`` is set the report and matrix CSVs are written as well.
    """
    with _stage("core-data"):
        ds = _load_dataset(cfg)
        fsw_before = _fsw_dict(ds) if ds.n_classes >= 2 else {}
        if cfg.fsw_top_k is not None:
            ds = filter_features(ds, top_k=cfg.fsw_top_k)
        elif cfg.fsw_threshold is not None:
            ds = filter_features(ds, threshold=cfg.fsw_threshold)
        fsw_after = _fsw_dict(ds) if ds.n_classes >= 2 else {}

    ratings = None
    if cfg.ratings is not None:
        with _stage("selection"):
            ratings = (load_ratings(cfg.ratings) if isinstance(cfg.ratings, (str, Path))
                       else RatingTable(cfg.ratings))
    S = score_matrices(ds, cfg, ratings)

    lexicons = {}
    for n in cfg.sizes:
        with _stage("selection"):
            lexicons[str(n)] = {
                mode: best_lexicon(S.tm, S.labels, n, mode, cfg.include, cfg.exclude,
                                   cfg.one_of, force=cfg.force_enumeration,
                                   cap=ENUMERATION_CAP).check(S.tm, S.labels).as_dict()
                for mode in cfg.modes
            }

    report = {
        "config": {k: v for k, v in dataclasses.asdict(cfg).items() if k != "out"},
        "dataset": {
            "classes": list(ds.classes),
            "counts": dict(zip(ds.classes, ds.counts)),
            "n_features": ds.n_features,
            "undersampled": list(ds.undersampled),
        },
        "fsw": {"before": fsw_before, "after": fsw_after,
                "kept_features": list(ds.feature_index)},
        "matrices": {"labels": list(S.labels), "alpha": S.alpha, "edrm": S.edrm,
                     "sm": S.sm, "tm": S.tm},
        "pairs": [p.as_dict() for p in S.pairs],
        "failed_pairs": [list(p) for p in S.failed_pairs],
        "lexicons": lexicons,
    }
    if cfg.validate:
        report["validation"] = validate(ds, cfg, lexicons)
    if cfg.out:
        write_report(report, S, cfg.out)
    return report


def validate(ds, cfg, lexicons):
    out = {}
    for n in cfg.sizes:
        if n > ds.n_classes:
            continue
        with _stage("oracle"):
            bf = brute_force_best_lexicon(ds, n, cfg.train_fraction, cfg.seed)
        ties = {tuple(sorted(t)) for t in bf.ties}
        out[str(n)] = {
            **bf.as_dict(),
            "selection_in_ties": {mode: tuple(lex["members"]) in ties
                                  for mode, lex in lexicons[str(n)].items()},
        }
    return out


def write_report(report, S: ScoreMatrices, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps_report(report), encoding="utf-8")
    for name in ("edrm", "sm", "tm"):
        M = getattr(S, name)
        if M is not None:
            write_matrix_csv(out.with_name(f"{out.stem}_{name}.csv"), S.labels, M)


# -- argument handling ---------------------------------------------------------

def _csv_list(s):
    return [x.strip() for x in s.split(",") if x.strip()]


def parse_sizes(s):
    """``"2-6"`` or ``"2,3,5"`` (or a mix) into a list of ints."""
    if isinstance(s, (list, tuple)):
        return [int(x) for x in s]
    out = []
    try:
        for part in _csv_list(str(s)):
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise ConfigError(f"bad lexicon sizes {s!r}") from None
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="gestlex", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", help="JSON file whose keys mirror the flags; flags win")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="feature CSV: class,image,f1,...,fL")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in synthetic dataset")
    p.add_argument("--ratings", help="ratings CSV: class,rating")
    p.add_argument("--alpha", type=float, help="weight of the subjective measure (default 0)")
    p.add_argument("--scale-fraction", type=float,
                   help=f"ellipsoid size as a fraction of the farthest outlier "
                        f"(default {DEFAULT_SCALE_FRACTION})")
    p.add_argument("--epsilon", type=float, help="surface residual tolerance (default 1e-6*L)")
    p.add_argument("--max-iter", type=int, help="alternating-projection sweep cap")
    p.add_argument("--sizes", help="lexicon sizes, e.g. 2-6 or 2,3,5 (default 2,3)")
    p.add_argument("--mode", choices=["exact", "greedy", "both"])
    p.add_argument("--include", type=_csv_list, help="classes that must be chosen")
    p.add_argument("--exclude", type=_csv_list, help="classes never chosen")
    p.add_argument("--one-of", type=_csv_list, help="at least one of these must be chosen")
    fs = p.add_mutually_exclusive_group()
    fs.add_argument("--fsw-top-k", type=int, help="keep the k strongest features")
    fs.add_argument("--fsw-threshold", type=float, help="keep features with FSW <= threshold")
    p.add_argument("--seed", type=int)
    p.add_argument("--validate", action="store_true", default=None,
                   help="brute-force the recognition-rate best lexicons for comparison")
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--force-enumeration", action="store_true", default=None,
                   help="lift the 1e7 subset cap of the exact search")
    p.add_argument("--strict-solver", action="store_true", default=None,
                   help="abort on the first failed pair instead of scoring it 0")
    p.add_argument("--out", help="report path (JSON); matrices go next to it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    values = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        values = {k.replace("-", "_"): v for k, v in values.items()}
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("config", "verbose")}
    if "input" in flags or "preset" in flags:
        for k in ("input", "preset", "synthetic"):
            values.pop(k, None)
    values.update(flags)
    if "sizes" in values:
        values["sizes"] = parse_sizes(values["sizes"])
    for k in ("include", "exclude", "one_of"):
        if isinstance(values.get(k), str):
            values[k] = _csv_list(values[k])
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    codes = ((ConfigError, EXIT_CONFIG), (DataError, EXIT_DATA), (SolverError, EXIT_SOLVER),
             (EnumerationCapError, EXIT_CAP))
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except GestlexError as exc:
        code = next(c for kind, c in codes if isinstance(exc, kind))
        stage = getattr(exc, "stage", None)
        print(f"gestlex: {stage + ': ' if stage else ''}{exc}", file=sys.stderr)
        return code
    if not cfg.out:
        sys.stdout.write(dumps_report(report))
    for p in report["failed_pairs"]:
        log.warning("pair %s-%s could not be scored; EDRM set to 0", *p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
