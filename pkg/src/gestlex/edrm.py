"""Ellipsoidal distance ratio metric (EDRM).

The EDRM of two classes is the shortest distance between their ellipsoid
surfaces divided by the distance between the ellipsoid centers.  It is 0 for
overlapping classes and tends to 1 as both ellipsoids shrink toward their
centers.

The surface-to-surface distance is found by alternating Euclidean projections
between the two solid ellipsoids.  Both bodies are convex, so for disjoint
ellipsoids the iteration converges to the globally closest pair, and an
iterate that lands inside the other body proves overlap.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import FeatureDataset
from .ellipsoid import (
    DEFAULT_SCALE_FRACTION,
    Ellipsoid,
    default_epsilon,
    fit_ellipsoid,
    project_onto,
)
from .errors import SolverError

__all__ = [
    "DistanceSolution",
    "PairDiagnostics",
    "ScoreMatrices",
    "min_surface_distance",
    "edrm_pair",
    "edrm_matrix",
    "fit_class_ellipsoids",
]

OVERLAP_GAP = 1e-9  # relative to center distance
DEFAULT_MAX_ITER = 20000


@dataclass(frozen=True)
class DistanceSolution:
    """Closest pair of surface points of two ellipsoids and its checks.

    ``residual_a`` / ``residual_b`` are ``|q - 1|`` for each optimal point in
    its own ellipsoid's quadratic form ``q``; ``cross_containment_ok`` holds
    when each optimal point lies strictly outside the other ellipsoid.
    """

    x_a: np.ndarray
    x_b: np.ndarray
    surface_distance: float
    center_distance: float
    overlap: bool
    iterations: int
    residual_a: float
    residual_b: float
    cross_containment_ok: bool
    epsilon: float

    @property
    def edrm(self):
        if self.overlap or self.center_distance == 0.0:
            return 0.0
        return min(self.surface_distance / self.center_distance, 1.0)

    @property
    def checks_ok(self):
        """All four validity checks (always true for an overlap)."""
        if self.overlap:
            return True
        return (self.residual_a < self.epsilon and self.residual_b < self.epsilon
                and self.cross_containment_ok)

    def as_dict(self):
        return {
            "x_a": self.x_a.tolist(),
            "x_b": self.x_b.tolist(),
            "surface_distance": self.surface_distance,
            "center_distance": self.center_distance,
            "overlap": self.overlap,
            "iterations": self.iterations,
            "residual_a": self.residual_a,
            "residual_b": self.residual_b,
            "cross_containment_ok": self.cross_containment_ok,
        }


def _overlap(x, a, b, cd, it, eps):
    return DistanceSolution(x.copy(), x.copy(), 0.0, cd, True, it, 0.0, 0.0, True, eps)


def min_surface_distance(a: Ellipsoid, b: Ellipsoid, tol=None, max_iter=DEFAULT_MAX_ITER,
                         epsilon=None) -> DistanceSolution:
    """Shortest distance between the surfaces of two ellipsoids.

    Parameters
    ----------
    a, b : Ellipsoid
        Ellipsoids of equal dimension.
    tol : float, optional
        Stop once neither iterate moves more than ``tol``.  Defaults to
        ``1e-12`` times the center distance.
    max_iter : int
        Cap on alternating-projection sweeps.
    epsilon : float, optional
        Surface-residual tolerance of the validity checks; ``1e-6 * L`` by
        default.

    Returns
    -------
    DistanceSolution
        ``overlap`` is set, with distance 0, when a center lies inside the
        other ellipsoid or the iterates meet.

    Raises
    ------
    SolverError
        If ``max_iter`` sweeps do not converge; ``diagnostics`` holds the last
        iterates.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    eps = default_epsilon(a.dim) if epsilon is None else epsilon
    cd = float(np.linalg.norm(a.center - b.center))
    if a.quadratic_form(b.center) <= 1.0:
        return _overlap(b.center, a, b, cd, 0, eps)
    if b.quadratic_form(a.center) <= 1.0:
        return _overlap(a.center, a, b, cd, 0, eps)
    tol = 1e-12 * cd if tol is None else tol
    gap_tol = OVERLAP_GAP * cd

    xa = project_onto(a, b.center, eps)
    xb = project_onto(b, xa, eps)
    for it in range(1, max_iter + 1):
        if b.quadratic_form(xa) <= 1.0 or np.linalg.norm(xa - xb) < gap_tol:
            return _overlap(xa, a, b, cd, it, eps)
        xa_new = project_onto(a, xb, eps)
        xb_new = project_onto(b, xa_new, eps)
        move = max(np.linalg.norm(xa_new - xa), np.linalg.norm(xb_new - xb))
        xa, xb = xa_new, xb_new
        if move < tol:
            break
    else:
        raise SolverError(
            f"alternating projection did not converge in {max_iter} sweeps",
            {"x_a": xa.tolist(), "x_b": xb.tolist(), "iterations": max_iter,
             "last_move": float(move), "gap": float(np.linalg.norm(xa - xb))},
        )
    if b.quadratic_form(xa) <= 1.0 or np.linalg.norm(xa - xb) < gap_tol:
        return _overlap(xa, a, b, cd, it, eps)
    return DistanceSolution(
        x_a=xa,
        x_b=xb,
        surface_distance=float(np.linalg.norm(xa - xb)),
        center_distance=cd,
        overlap=False,
        iterations=it,
        residual_a=abs(float(a.quadratic_form(xa)) - 1.0),
        residual_b=abs(float(b.quadratic_form(xb)) - 1.0),
        cross_containment_ok=bool(a.quadratic_form(xb) > 1.0 and b.quadratic_form(xa) > 1.0),
        epsilon=eps,
    )


def edrm_pair(a: Ellipsoid, b: Ellipsoid, **solver_kw) -> float:
    """EDRM of two ellipsoids, in ``[0, 1]``.

    >>> edrm_pair(Ellipsoid.sphere([0, 0, 0]), Ellipsoid.sphere([4, 0, 0]))
    0.5
    """
    return min_surface_distance(a, b, **solver_kw).edrm


@dataclass(frozen=True)
class PairDiagnostics:
    a: str
    b: str
    solution: DistanceSolution | None
    error: str | None = None

    @property
    def ok(self):
        return self.error is None and self.solution.checks_ok

    def as_dict(self):
        d = {"a": self.a, "b": self.b, "ok": self.ok, "error": self.error}
        if self.solution is not None:
            d.update(self.solution.as_dict())
            d["edrm"] = self.solution.edrm
        return d


@dataclass(frozen=True)
class ScoreMatrices:
    """Pairwise score matrices over an ordered lexicon.

    ``tm`` is the total measure ``alpha * sm + (1 - alpha) * edrm``; with no
    ratings (``sm is None``) ``alpha`` is 0 and ``tm`` equals ``edrm``.
    Diagonals are 0 and never read.
    """

    labels: tuple
    edrm: np.ndarray
    tm: np.ndarray
    alpha: float = 0.0
    sm: np.ndarray | None = None
    pairs: tuple = field(default=(), repr=False)
    ellipsoids: tuple = field(default=(), repr=False)

    @property
    def failed_pairs(self):
        return [(p.a, p.b) for p in self.pairs if not p.ok]


def fit_class_ellipsoids(dataset: FeatureDataset, scale_fraction=DEFAULT_SCALE_FRACTION):
    return tuple(fit_ellipsoid(p, scale_fraction) for p in dataset.points)


def edrm_matrix(dataset: FeatureDataset, scale_fraction=DEFAULT_SCALE_FRACTION, *,
                epsilon=None, tol=None, max_iter=DEFAULT_MAX_ITER) -> ScoreMatrices:
    """EDRM of every class pair of ``dataset``.

    A pair whose solve fails, or whose solution fails the validity checks, is
    scored 0 (treated as inseparable) and reported in ``pairs``.
    """
    ells = fit_class_ellipsoids(dataset, scale_fraction)
    M = dataset.n_classes
    D = np.zeros((M, M))
    pairs = []
    for i in range(M):
        for j in range(i + 1, M):
            ci, cj = dataset.classes[i], dataset.classes[j]
            try:
                sol = min_surface_distance(ells[i], ells[j], tol=tol, max_iter=max_iter,
                                           epsilon=epsilon)
            except SolverError as exc:
                pairs.append(PairDiagnostics(ci, cj, None, str(exc)))
                continue
            diag = PairDiagnostics(ci, cj, sol)
            pairs.append(diag)
            if diag.ok:
                D[i, j] = D[j, i] = sol.edrm
    D.setflags(write=False)
    return ScoreMatrices(dataset.classes, D, D, 0.0, None, tuple(pairs), ells)
