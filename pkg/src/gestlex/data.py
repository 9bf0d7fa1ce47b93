"""Feature-space datasets: CSV ingestion, per-feature statistics and FSW pruning.

A dataset holds, for each gesture class, an ``N_m x L`` matrix of feature
values.  The feature selection weakness (FSW) of a feature is the mean
within-class variance divided by the variance of the class means; small values
mark strong features.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "FeatureDataset",
    "FeatureStats",
    "load_features",
    "write_features",
    "feature_stats",
    "fsw",
    "fsw_all",
    "filter_features",
]


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FeatureDataset:
    """Per-class collections of L-dimensional feature points.

    Parameters
    ----------
    classes : sequence of str
        Unique class labels, in dataset order.
    points : sequence of array_like, each shape (N_m, L)
        Feature matrix of each class, aligned with ``classes``.
    feature_names : sequence of str, optional
        Column names; defaults to ``f1 .. fL``.
    feature_index : sequence of int, optional
        Original column index of each feature, kept across
        :func:`filter_features`.  Defaults to the identity map.
    image_ids : sequence of sequence of str, optional
        Per-class row identifiers, as read from the CSV ``image`` column.
    """

    classes: tuple
    points: tuple
    feature_names: tuple = None
    feature_index: tuple = None
    image_ids: tuple = None
    undersampled: tuple = field(init=False)

    def __post_init__(self):
        classes = tuple(str(c) for c in self.classes)
        if not classes:
            raise DataError("dataset has no classes")
        if len(set(classes)) != len(classes):
            raise DataError("class labels are not unique")
        if len(self.points) != len(classes):
            raise DataError("points must have one matrix per class")
        pts = []
        for label, p in zip(classes, self.points):
            p = np.asarray(p, dtype=float)
            if p.ndim == 1:
                p = p[:, None]
            if p.ndim != 2 or p.shape[1] < 1:
                raise DataError(f"class {label!r}: points must be an N x L matrix")
            if p.shape[0] < 2:
                raise DataError(f"class {label!r}: needs at least 2 points, got {p.shape[0]}")
            if not np.all(np.isfinite(p)):
                raise DataError(f"class {label!r}: non-finite feature value")
            pts.append(_frozen(p))
        dims = {p.shape[1] for p in pts}
        if len(dims) != 1:
            raise DataError(f"classes disagree on feature dimension: {sorted(dims)}")
        L = dims.pop()

        names = self.feature_names
        names = tuple(f"f{i + 1}" for i in range(L)) if names is None else tuple(names)
        index = self.feature_index
        index = tuple(range(L)) if index is None else tuple(int(i) for i in index)
        if len(names) != L or len(index) != L:
            raise DataError("feature_names / feature_index length must equal L")
        ids = self.image_ids
        if ids is None:
            ids = tuple(tuple(str(i) for i in range(p.shape[0])) for p in pts)
        else:
            ids = tuple(tuple(str(i) for i in row) for row in ids)
            if [len(r) for r in ids] != [p.shape[0] for p in pts]:
                raise DataError("image_ids must align with points")

        # recorded, not raised: such classes fit rank-deficient ellipsoids
        under = tuple(c for c, p in zip(classes, pts) if p.shape[0] < L)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "feature_index", index)
        object.__setattr__(self, "image_ids", ids)
        object.__setattr__(self, "undersampled", under)

    @property
    def n_classes(self):
        return len(self.classes)

    @property
    def n_features(self):
        return self.points[0].shape[1]

    @property
    def counts(self):
        return tuple(p.shape[0] for p in self.points)

    def __getitem__(self, label):
        return self.points[self.classes.index(label)]

    def subset(self, labels):
        """Dataset restricted to ``labels`` (in the order given)."""
        idx = [self.classes.index(c) for c in labels]
        return FeatureDataset(
            [self.classes[i] for i in idx],
            [self.points[i] for i in idx],
            self.feature_names,
            self.feature_index,
            [self.image_ids[i] for i in idx],
        )

    def select_features(self, columns):
        """Dataset keeping only ``columns`` (indices into the current features)."""
        columns = [int(c) for c in columns]
        return FeatureDataset(
            self.classes,
            [p[:, columns] for p in self.points],
            [self.feature_names[c] for c in columns],
            [self.feature_index[c] for c in columns],
            self.image_ids,
        )


def load_features(path) -> FeatureDataset:
    """Read a feature CSV with header ``class,image,f1,...,fL``.

    Rows are grouped by class in order of first appearance; row order within a
    class and column order are preserved.  Errors name the offending line.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such feature file: {path}")
    groups: dict[str, list] = {}
    ids: dict[str, list] = {}
    seen = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("empty file (no header)", line=1)
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != "class" or header[1] != "image":
            raise DataError("header must be 'class,image,f1,...,fL'", line=1)
        names = header[2:]
        width = len(header)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise DataError(f"ragged row: expected {width} columns, got {len(row)}", line=line)
            label, image = row[0].strip(), row[1].strip()
            if (label, image) in seen:
                raise DataError(f"duplicate (class, image) pair ({label!r}, {image!r})", line=line)
            seen.add((label, image))
            try:
                values = [float(c) for c in row[2:]]
            except ValueError:
                bad = next(c for c in row[2:] if not _is_float(c))
                raise DataError(f"non-numeric feature value {bad!r}", line=line) from None
            if not all(math.isfinite(v) for v in values):
                raise DataError("non-finite feature value", line=line)
            groups.setdefault(label, []).append(values)
            ids.setdefault(label, []).append(image)
    if not groups:
        raise DataError(f"{path}: dataset is empty (header only)")
    labels = list(groups)
    return FeatureDataset(
        labels,
        [np.array(groups[c]) for c in labels],
        names,
        image_ids=[ids[c] for c in labels],
    )


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_features(dataset: FeatureDataset, path) -> None:
    """Write ``dataset`` in the CSV format read by :func:`load_features`."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "image", *dataset.feature_names])
        for label, pts, ids in zip(dataset.classes, dataset.points, dataset.image_ids):
            for image, row in zip(ids, pts):
                w.writerow([label, image, *(repr(float(v)) for v in row)])


@dataclass(frozen=True)
class FeatureStats:
    """Class means ``(M, L)``, grand mean of class means ``(L,)`` and
    unbiased class variances ``(M, L)``."""

    means: np.ndarray
    grand_mean: np.ndarray
    variances: np.ndarray


def feature_stats(dataset: FeatureDataset) -> FeatureStats:
    means = np.array([p.mean(axis=0) for p in dataset.points])
    variances = np.array([p.var(axis=0, ddof=1) for p in dataset.points])
    # unweighted by class size
    grand = means.mean(axis=0)
    return FeatureStats(_frozen(means), _frozen(grand), _frozen(variances))


def fsw_all(dataset: FeatureDataset) -> np.ndarray:
    """FSW of every feature; ``inf`` where all class means coincide."""
    if dataset.n_classes < 2:
        raise DataError("FSW needs at least 2 classes")
    st = feature_stats(dataset)
    M = dataset.n_classes
    within = st.variances.sum(axis=0) / M
    between = ((st.means - st.grand_mean) ** 2).sum(axis=0) / (M - 1)
    out = np.full(dataset.n_features, np.inf)
    # spread below rounding noise of the means counts as no spread
    scale = np.abs(st.means).max(axis=0)
    ok = between > (64 * np.finfo(float).eps * scale) ** 2
    out[ok] = within[ok] / between[ok]
    return out


def fsw(dataset: FeatureDataset, feature: int) -> float:
    """Feature selection weakness of column ``feature`` (0-based).

    Returns ``math.inf`` when the class means are identical, which marks a
    feature with no discriminative value.

    Examples
    --------
    >>> ds = FeatureDataset(["a", "b"], [[[1.], [2.], [3.]], [[5.], [6.], [7.]]])
    >>> fsw(ds, 0)
    0.125
    """
    if not 0 <= feature < dataset.n_features:
        raise IndexError(f"feature {feature} out of range for L={dataset.n_features}")
    return float(fsw_all(dataset)[feature])


def filter_features(dataset: FeatureDataset, *, top_k: int | None = None,
                    threshold: float | None = None) -> FeatureDataset:
    """Keep the strongest features by FSW.

    Exactly one policy is given: ``top_k`` keeps the ``k`` smallest FSW values
    (ties go to the lower original index), ``threshold`` keeps every feature
    with ``FSW <= threshold``.  Surviving columns keep their original order and
    the result's ``feature_index`` maps back to the original columns.
    """
    if (top_k is None) == (threshold is None):
        raise ValueError("give exactly one of top_k or threshold")
    scores = fsw_all(dataset)
    L = dataset.n_features
    if top_k is not None:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        order = sorted(range(L), key=lambda i: (scores[i], dataset.feature_index[i]))
        keep = sorted(order[: min(top_k, L)])
    else:
        if not threshold > 0:
            raise ValueError("threshold must be > 0")
        keep = [i for i in range(L) if scores[i] <= threshold]
    if not keep:
        raise DataError("feature filter removed every feature")
    return dataset.select_features(keep)
