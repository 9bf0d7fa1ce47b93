"""Total measure and best-lexicon search.

The score of a lexicon is the sum of its pairwise total measures.  The exact
search enumerates every admissible subset; the greedy search grows the best
pair one class at a time, which is exact for the subjective measure alone but
can miss the optimum once the EDRM contributes.
"""
from __future__ import annotations

import csv
import itertools
import math
from decimal import Decimal
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DataError, EnumerationCapError

__all__ = [
    "RatingTable",
    "LexiconResult",
    "load_ratings",
    "subjective_measure",
    "sm_matrix",
    "total_measure_matrix",
    "lexicon_score",
    "best_lexicon_exact",
    "best_lexicon_greedy",
    "best_lexicon",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 10**7


class RatingTable(dict):
    """Mapping of class label to a suitability rating in ``[0, 1]``."""

    def __init__(self, ratings: Mapping[str, float] | Iterable = ()):
        super().__init__()
        for label, r in dict(ratings).items():
            r = float(r)
            if not 0.0 <= r <= 1.0:
                raise ConfigError(f"rating for {label!r} is {r}, outside [0, 1]")
            self[str(label)] = r

    def require(self, labels):
        missing = [c for c in labels if c not in self]
        if missing:
            raise ConfigError(f"no rating for classes {missing}")


def load_ratings(path) -> RatingTable:
    """Read a ``class,rating`` CSV."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such ratings file: {path}")
    out = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["class", "rating"]:
            raise DataError("header must be 'class,rating'", line=1)
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise DataError("expected 2 columns", line=reader.line_num)
            label = row[0].strip()
            if label in out:
                raise DataError(f"duplicate rating for {label!r}", line=reader.line_num)
            try:
                out[label] = float(row[1])
            except ValueError:
                raise DataError(f"non-numeric rating {row[1]!r}", line=reader.line_num) from None
    try:
        return RatingTable(out)
    except ConfigError as exc:
        raise DataError(str(exc)) from None


def subjective_measure(ratings: Mapping[str, float], a: str, b: str) -> float:
    """Mean of the two classes' ratings.

    Ratings are decimal judgements, so the mean is taken in decimal on each
    rating's shortest round-trip form and rounded once: ``(0.2 + 0.7) / 2``
    gives ``0.45`` rather than the binary ``0.44999999999999996``.
    """
    for c in (a, b):
        if c not in ratings:
            raise KeyError(f"class {c!r} has no rating")
    return float((Decimal(repr(float(ratings[a]))) + Decimal(repr(float(ratings[b])))) / 2)


def sm_matrix(ratings: Mapping[str, float], labels) -> np.ndarray:
    """Subjective-measure matrix over ``labels`` with a zero diagonal."""
    labels = list(labels)
    M = len(labels)
    S = np.zeros((M, M))
    for i, j in itertools.combinations(range(M), 2):
        S[i, j] = S[j, i] = subjective_measure(ratings, labels[i], labels[j])
    return S


def total_measure_matrix(edrm, sm, alpha: float) -> np.ndarray:
    """``alpha * sm + (1 - alpha) * edrm``; the endpoints are returned verbatim."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha={alpha} outside [0, 1]")
    edrm = np.asarray(edrm, dtype=float)
    sm = np.asarray(sm, dtype=float)
    if edrm.shape != sm.shape:
        raise ValueError(f"shape mismatch: {edrm.shape} vs {sm.shape}")
    if alpha == 0.0:
        return edrm.copy()
    if alpha == 1.0:
        return sm.copy()
    return alpha * sm + (1.0 - alpha) * edrm


def lexicon_score(tm, indices) -> float:
    """Sum of ``tm`` over all unordered pairs of ``indices``.

    ``math.fsum`` makes the result independent of summation order, so equal
    multisets of entries give bit-identical scores.
    """
    return math.fsum(tm[i, j] for i, j in itertools.combinations(indices, 2))


@dataclass(frozen=True)
class LexiconResult:
    """Outcome of a lexicon search.

    ``members`` is sorted by label.  ``evaluated_subsets`` counts candidate
    subsets scored and ``evaluated_pairsums`` the matrix entries summed.
    """

    members: tuple
    score: float
    mode: str
    evaluated_subsets: int
    evaluated_pairsums: int

    def check(self, tm, labels):
        idx = [list(labels).index(c) for c in self.members]
        recomputed = lexicon_score(np.asarray(tm, dtype=float), idx)
        if recomputed != self.score:
            raise AssertionError(f"stored score {self.score} != recomputed {recomputed}")
        return self

    def as_dict(self):
        return {
            "members": list(self.members),
            "score": self.score,
            "mode": self.mode,
            "evaluated_subsets": self.evaluated_subsets,
            "evaluated_pairsums": self.evaluated_pairsums,
        }


def _prepare(tm, labels, n, must_include, exclude):
    tm = np.asarray(tm, dtype=float)
    labels = [str(c) for c in labels]
    M = len(labels)
    if tm.shape != (M, M):
        raise ValueError(f"matrix shape {tm.shape} does not match {M} labels")
    if len(set(labels)) != M:
        raise ValueError("labels are not unique")
    must = set(must_include or ())
    excl = set(exclude or ())
    unknown = (must | excl) - set(labels)
    if unknown:
        raise ConfigError(f"unknown classes {sorted(unknown)}")
    if must & excl:
        raise ConfigError(f"classes both included and excluded: {sorted(must & excl)}")
    pool = sorted(c for c in labels if c not in excl)
    if n < 2:
        raise ConfigError("lexicon size must be >= 2")
    if n > len(pool):
        raise ConfigError(f"n={n} exceeds the {len(pool)} available classes")
    if len(must) > n:
        raise ConfigError(f"{len(must)} forced classes do not fit in n={n}")
    pos = {c: i for i, c in enumerate(labels)}
    return tm, pos, pool, sorted(must)


def best_lexicon_exact(tm, labels, n, must_include=(), exclude=(), *, force=False,
                       cap=ENUMERATION_CAP) -> LexiconResult:
    """Best size-``n`` lexicon by exhaustive enumeration.

    Excluded classes are dropped from the lexicon; forced classes are fixed
    and only the remaining ``n - k`` slots are enumerated.  Ties go to the
    lexicographically smallest sorted label sequence.

    Raises
    ------
    EnumerationCapError
        When the number of subsets exceeds ``cap`` and ``force`` is false.
    """
    tm, pos, pool, must = _prepare(tm, labels, n, must_include, exclude)
    free = [c for c in pool if c not in must]
    k = n - len(must)
    count = math.comb(len(free), k)
    if count > cap and not force:
        raise EnumerationCapError(
            f"exact search needs {count} subsets (cap {cap}); use greedy or force", count)
    pairs_per = math.comb(n, 2)
    must_idx = [pos[c] for c in must]
    base = lexicon_score(tm, must_idx)
    best_key = None
    best = None
    for combo in itertools.combinations(free, k):
        members = tuple(sorted(must + list(combo)))
        idx = [pos[c] for c in members]
        score = lexicon_score(tm, idx) if k else base
        key = (-score, members)
        if best_key is None or key < best_key:
            best_key, best = key, (members, score)
    return LexiconResult(best[0], best[1], "exact", count, count * pairs_per)


def best_lexicon_greedy(tm, labels, n, must_include=(), exclude=()) -> LexiconResult:
    """Best size-``n`` lexicon by greedy nesting.

    Starts from the best pair (the forced set when it has two or more classes,
    or the best pair containing the single forced class) and adds, one at a
    time, the class with the largest total measure to the current members.
    Ties go to the smallest label.
    """
    tm, pos, pool, must = _prepare(tm, labels, n, must_include, exclude)
    subsets = 0
    pairsums = 0
    if len(must) >= 2:
        members = list(must)
        score = lexicon_score(tm, [pos[c] for c in members])
        subsets += 1
        pairsums += math.comb(len(members), 2)
    else:
        seeds = itertools.combinations(pool, 2)
        if must:
            seeds = (p for p in seeds if must[0] in p)
        best_key = None
        for p in seeds:
            subsets += 1
            pairsums += 1
            key = (-tm[pos[p[0]], pos[p[1]]], p)
            if best_key is None or key < best_key:
                best_key = key
        members = list(best_key[1])
        score = -best_key[0]
    while len(members) < n:
        best_key = None
        for c in pool:
            if c in members:
                continue
            gain = math.fsum(tm[pos[c], pos[m]] for m in members)
            subsets += 1
            pairsums += len(members)
            key = (-gain, c)
            if best_key is None or key < best_key:
                best_key = key
        members.append(best_key[1])
    members = tuple(sorted(members))
    score = lexicon_score(tm, [pos[c] for c in members])
    return LexiconResult(members, score, "greedy", subsets, pairsums)


def best_lexicon(tm, labels, n, mode="exact", must_include=(), exclude=(), one_of=(),
                 **kw) -> LexiconResult:
    """Dispatch to the exact or greedy search.

    ``one_of`` is a disjunctive constraint: at least one of these classes must
    be chosen.  It is enforced by running the search once per candidate with
    that class forced and keeping the best result; counters are summed.
    """
    search = {"exact": best_lexicon_exact, "greedy": best_lexicon_greedy}.get(mode)
    if search is None:
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "greedy":
        kw.pop("force", None)
        kw.pop("cap", None)
    one_of = sorted(set(one_of or ()))
    must = set(must_include or ())
    if not one_of or must & set(one_of):
        return search(tm, labels, n, must_include, exclude, **kw)
    results = []
    for c in one_of:
        if c in set(exclude or ()):
            continue
        results.append(search(tm, labels, n, sorted(must | {c}), exclude, **kw))
    if not results:
        raise ConfigError("every one_of candidate is excluded")
    best = min(results, key=lambda r: (-r.score, r.members))
    return LexiconResult(best.members, best.score, best.mode,
                         sum(r.evaluated_subsets for r in results),
                         sum(r.evaluated_pairsums for r in results))
