"""Ground truth for lexicon selection: synthetic data, PCA, one-vs-rest LDA.

The true best lexicon of size ``n`` is the one whose classes are recognised
best by an actual classifier.  This module trains a one-vs-rest Fisher
discriminant on every size-``n`` subset of classes and reports which subsets
reach the highest average recognition rate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .data import FeatureDataset
from .errors import ConfigError, DataError, EnumerationCapError
from .selection import LexiconResult

__all__ = [
    "ClassSpec",
    "SyntheticSpec",
    "generate_synthetic",
    "fig1_spec",
    "preset",
    "PRESETS",
    "PCAModel",
    "fit_pca",
    "pca_features",
    "Classifier",
    "train_classifier",
    "classify",
    "RecognitionReport",
    "recognition_rates",
    "split_dataset",
    "BruteForceResult",
    "brute_force_best_lexicon",
]


# -- synthetic data ----------------------------------------------------------

@dataclass(frozen=True)
class ClassSpec:
    label: str
    mean: tuple
    cov: tuple
    count: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        L = mean.size
        if cov.shape != (L, L):
            raise ConfigError(f"class {self.label!r}: covariance must be {L}x{L}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ConfigError(f"class {self.label!r}: covariance is not symmetric")
        w = np.linalg.eigvalsh(cov)
        if w.min() < -1e-12 * max(1.0, w.max()):
            raise ConfigError(f"class {self.label!r}: covariance is not positive semi-definite")
        if int(self.count) < 2:
            raise ConfigError(f"class {self.label!r}: count must be >= 2")
        object.__setattr__(self, "label", str(self.label))
        object.__setattr__(self, "mean", tuple(mean.tolist()))
        object.__setattr__(self, "cov", tuple(map(tuple, cov.tolist())))
        object.__setattr__(self, "count", int(self.count))


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian clouds, one per class, drawn from a single seeded generator."""

    classes: tuple
    seed: int = 0

    def __post_init__(self):
        classes = tuple(c if isinstance(c, ClassSpec) else ClassSpec(**c) for c in self.classes)
        if not classes:
            raise ConfigError("synthetic spec has no classes")
        if len({len(c.mean) for c in classes}) != 1:
            raise ConfigError("synthetic classes disagree on dimension")
        object.__setattr__(self, "classes", classes)

    @classmethod
    def from_dict(cls, d):
        """Build from ``{"seed": int, "classes": [{label, mean, cov, count}, ...]}``."""
        try:
            return cls(tuple(ClassSpec(**c) for c in d["classes"]), int(d.get("seed", 0)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad synthetic spec: {exc}") from None


def generate_synthetic(spec: SyntheticSpec) -> FeatureDataset:
    rng = np.random.default_rng(spec.seed)
    points = [rng.multivariate_normal(c.mean, c.cov, size=c.count, method="eigh")
              for c in spec.classes]
    L = len(spec.classes[0].mean)
    return FeatureDataset(
        [c.label for c in spec.classes],
        points,
        [f"f{i + 1}" for i in range(L)],
        image_ids=[[f"img{i:04d}" for i in range(c.count)] for c in spec.classes],
    )


def fig1_line(x):
    """Linear separatrix between classes a and e (in the x-y plane)."""
    return 0.4 * x + 1.8


def fig1_curve(x, z):
    """Nonlinear separatrix surface ``y(x, z)`` between classes u and v."""
    return 0.4 * x + np.cos(4 * x) / 4 + np.cos(4 * z) / 4 + 6


def fig1_spec(seed=0, count=70) -> SyntheticSpec:
    """Five classes in 3-D shaped like the feature-space sketch.

    ``a`` and ``e`` are broad clouds centered 0.6 apart on either side of the
    line ``y = 0.4 x + 1.8`` and overlap.  ``u`` and ``v`` are compact clouds
    one unit below and above the surface ``y = 0.4 x + cos(4x)/4 + cos(4z)/4 + 6``.
    ``0`` sits far from all four.
    """
    normal = np.array([-0.4, 1.0, 0.0])
    normal /= np.linalg.norm(normal)
    p_line = np.array([-3.0, fig1_line(-3.0), 0.0])
    y_curve = float(fig1_curve(3.0, 0.0))
    broad = np.diag([0.45, 0.3, 0.3]) ** 2
    thin = np.diag([0.15, 0.12, 0.15]) ** 2
    return SyntheticSpec((
        ClassSpec("0", (0.0, 3.5, 6.0), np.eye(3) * 0.2**2, count),
        ClassSpec("a", p_line - 0.3 * normal, broad, count),
        ClassSpec("e", p_line + 0.3 * normal, broad, count),
        ClassSpec("u", (3.0, y_curve - 1.0, 0.0), thin, count),
        ClassSpec("v", (3.0, y_curve + 1.0, 0.0), thin, count),
    ), seed)


PRESETS = {"fig1": fig1_spec}


def preset(name, seed=0) -> FeatureDataset:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return generate_synthetic(PRESETS[name](seed=seed))


# -- PCA -----------------------------------------------------------------------

@dataclass(frozen=True)
class PCAModel:
    """Principal directions as rows of ``components`` (k x D), strongest first."""

    mean: np.ndarray
    components: np.ndarray
    variances: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) @ self.components.T

    def inverse_transform(self, Z):
        return np.asarray(Z, dtype=float) @ self.components + self.mean


def fit_pca(X, k) -> PCAModel:
    X = np.asarray(X, dtype=float)
    N, D = X.shape
    if N < 2:
        raise DataError("PCA needs at least 2 rows")
    if not 1 <= k <= min(N, D):
        raise ConfigError(f"k={k} must lie in [1, min(N, D)={min(N, D)}]")
    mean = X.mean(axis=0)
    _, s, Vt = np.linalg.svd(X - mean, full_matrices=False)
    comps = Vt[:k]
    idx = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), idx])
    comps = comps * signs[:, None]
    return PCAModel(mean, comps, s[:k] ** 2 / (N - 1))


def pca_features(raw, labels, k) -> FeatureDataset:
    """Project labeled raw rows onto their top-``k`` principal directions.

    Parameters
    ----------
    raw : array_like, shape (N, D)
    labels : sequence of str, length N
        Class of each row; classes appear in order of first occurrence.
    k : int
        Output dimension.
    """
    raw = np.asarray(raw, dtype=float)
    labels = [str(c) for c in labels]
    if len(labels) != raw.shape[0]:
        raise DataError("one label per row is required")
    Z = fit_pca(raw, k).transform(raw)
    order = list(dict.fromkeys(labels))
    lab = np.array(labels)
    return FeatureDataset(order, [Z[lab == c] for c in order],
                          [f"pc{i + 1}" for i in range(k)])


# -- one-vs-rest LDA -------------------------------------------------------------

@dataclass(frozen=True)
class Classifier:
    """One Fisher discriminant per class; class ``k`` accepts ``x`` when
    ``weights[k] @ x > thresholds[k]``."""

    labels: tuple
    weights: np.ndarray
    thresholds: np.ndarray
    ridge_applied: tuple = field(default=())

    @classmethod
    def constant(cls, labels, dim, accept):
        """A classifier whose every discriminant always accepts (or rejects)."""
        K = len(labels)
        t = -np.inf if accept else np.inf
        return cls(tuple(labels), np.zeros((K, dim)), np.full(K, t), (False,) * K)


RIDGE_FLOOR = 1e-8


def train_classifier(train: FeatureDataset) -> Classifier:
    """Fit a class-versus-rest Fisher discriminant for every class.

    Each direction is ``S^-1 (mu_class - mu_rest)`` with ``S`` the summed
    scatter of the class and of the rest about their own means; the threshold
    is the midpoint of the two projected means.  ``S`` is ridged by
    ``1e-8 * trace(S) / L`` when it is numerically singular.
    """
    if train.n_classes < 2:
        raise DataError("one-vs-rest training needs at least 2 classes")
    L = train.n_features
    W, T, ridged = [], [], []
    for k in range(train.n_classes):
        X = train.points[k]
        R = np.vstack([p for j, p in enumerate(train.points) if j != k])
        mu, mr = X.mean(axis=0), R.mean(axis=0)
        S = (X - mu).T @ (X - mu) + (R - mr).T @ (R - mr)
        floor = RIDGE_FLOOR * max(np.trace(S), np.finfo(float).tiny) / L
        applied = bool(np.linalg.eigvalsh(S).min() < floor)
        if applied:
            S = S + floor * np.eye(L)
        w = np.linalg.solve(S, mu - mr)
        W.append(w)
        T.append(w @ (mu + mr) / 2)
        ridged.append(applied)
    return Classifier(train.classes, np.array(W), np.array(T), tuple(ridged))


def classify(clf: Classifier, X) -> np.ndarray:
    """Accept/reject decisions: shape ``(K,)`` for one point, ``(N, K)`` for many."""
    X = np.asarray(X, dtype=float)
    return X @ clf.weights.T > clf.thresholds


@dataclass(frozen=True)
class RecognitionReport:
    within_class_rate: float
    out_of_class_rate: float
    average_rate: float
    within_counts: tuple = (0, 0)
    out_of_class_counts: tuple = (0, 0)

    def as_dict(self):
        return {
            "within_class_rate": self.within_class_rate,
            "out_of_class_rate": self.out_of_class_rate,
            "average_rate": self.average_rate,
        }


def recognition_rates(clf: Classifier, test: FeatureDataset) -> RecognitionReport:
    """Within-class and out-of-class success rates over ``test``.

    Every (test point, discriminant) pair is scored: the point's own
    discriminant should accept it, every other discriminant should reject it.
    """
    unknown = set(test.classes) - set(clf.labels)
    if unknown:
        raise DataError(f"test classes {sorted(unknown)} were not trained")
    within_ok = within_n = out_ok = out_n = 0
    for label, pts in zip(test.classes, test.points):
        if len(pts) == 0:
            continue
        k = clf.labels.index(label)
        D = classify(clf, pts)
        own = D[:, k]
        others = np.delete(D, k, axis=1)
        within_ok += int(own.sum())
        within_n += own.size
        out_ok += int((~others).sum())
        out_n += others.size
    if within_n == 0:
        raise DataError("empty test set")
    w = within_ok / within_n
    o = out_ok / out_n if out_n else 1.0
    return RecognitionReport(w, o, (w + o) / 2, (within_ok, within_n), (out_ok, out_n))


def split_dataset(dataset: FeatureDataset, train_fraction=0.3, seed=0):
    """Seeded per-class train/test split; each side keeps at least 2 rows."""
    if not 0 < train_fraction < 1:
        raise ConfigError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    tr, te, tr_ids, te_ids = [], [], [], []
    for label, pts, ids in zip(dataset.classes, dataset.points, dataset.image_ids):
        N = len(pts)
        if N < 4:
            raise DataError(f"class {label!r} has {N} rows; a split needs at least 4")
        n_tr = min(max(2, round(train_fraction * N)), N - 2)
        perm = rng.permutation(N)
        a, b = np.sort(perm[:n_tr]), np.sort(perm[n_tr:])
        tr.append(pts[a]); te.append(pts[b])
        tr_ids.append([ids[i] for i in a]); te_ids.append([ids[i] for i in b])
    mk = lambda P, I: FeatureDataset(dataset.classes, P, dataset.feature_names,
                                     dataset.feature_index, I)
    return mk(tr, tr_ids), mk(te, te_ids)


@dataclass(frozen=True)
class BruteForceResult:
    """Best lexicon by true recognition rate.

    ``ties`` lists every subset reaching the top average rate; ``best`` is the
    lexicographically first of them with ``score`` set to that rate.
    """

    best: LexiconResult
    report: RecognitionReport
    ties: tuple
    rates: dict

    def as_dict(self):
        return {
            "best": self.best.as_dict(),
            "report": self.report.as_dict(),
            "ties": [list(t) for t in self.ties],
        }


def brute_force_best_lexicon(dataset: FeatureDataset, n, train_fraction=0.3, seed=0,
                             cap=100_000, split=None) -> BruteForceResult:
    """Train and score a classifier on every size-``n`` subset of classes.

    The same seeded train/test split is used for every subset.  Rates are
    ratios of integer counts, so ties are exact.
    """
    M = dataset.n_classes
    if not 2 <= n <= M:
        raise ConfigError(f"n={n} must lie in [2, {M}]")
    count = math.comb(M, n)
    if count > cap:
        raise EnumerationCapError(f"brute force needs {count} subsets (cap {cap})", count)
    train, test = split if split is not None else split_dataset(dataset, train_fraction, seed)
    rates = {}
    reports = {}
    for combo in itertools.combinations(sorted(dataset.classes), n):
        clf = train_classifier(train.subset(combo))
        rep = recognition_rates(clf, test.subset(combo))
        rates[combo] = rep.average_rate
        reports[combo] = rep
    top = max(rates.values())
    ties = tuple(c for c in rates if rates[c] == top)
    best = ties[0]
    return BruteForceResult(
        LexiconResult(best, top, "brute-force", count, 0),
        reports[best], ties, rates)
