"""Class ellipsoids in feature space.

An ellipsoid is stored in its principal frame: a center, an orthonormal matrix
whose columns are the principal directions, and the semi-axis lengths.  The
implied shape matrix is ``E = U diag(semi_axes**2) U^T`` and the surface is
``(y - c)^T E^{-1} (y - c) = 1``; ``E`` is never inverted explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SolverError

__all__ = [
    "Ellipsoid",
    "fit_ellipsoid",
    "contains",
    "project_to_surface",
    "project_onto",
    "default_epsilon",
    "DEFAULT_SCALE_FRACTION",
    "DEGENERATE_AXIS_FLOOR",
]

DEFAULT_SCALE_FRACTION = 0.65
DEGENERATE_AXIS_FLOOR = 1e-9


def default_epsilon(dim):
    """Surface-residual tolerance, grown linearly with dimension."""
    return 1e-6 * dim


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """Ellipsoid ``{y : (y - center)^T E^{-1} (y - center) <= 1}``.

    Attributes
    ----------
    center : ndarray, shape (L,)
    directions : ndarray, shape (L, L)
        Orthonormal; column ``i`` is the direction of ``semi_axes[i]``.
    semi_axes : ndarray, shape (L,)
        Strictly positive.
    degenerate : bool
        True when some axes were floored because the fitted point cloud was
        rank-deficient.
    """

    center: np.ndarray
    directions: np.ndarray
    semi_axes: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        U = np.array(self.directions, dtype=float)
        a = np.array(self.semi_axes, dtype=float).reshape(-1)
        L = c.size
        if U.shape != (L, L) or a.shape != (L,):
            raise ValueError("center, directions and semi_axes disagree on dimension")
        if not np.all(a > 0):
            raise ValueError("semi-axes must be strictly positive")
        if np.abs(U.T @ U - np.eye(L)).max() > 1e-10:
            raise ValueError("directions are not orthonormal")
        for arr in (c, U, a):
            arr.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "semi_axes", a)

    @classmethod
    def sphere(cls, center, radius=1.0):
        center = np.asarray(center, dtype=float)
        L = center.size
        return cls(center, np.eye(L), np.full(L, float(radius)))

    @classmethod
    def axis_aligned(cls, center, semi_axes):
        center = np.asarray(center, dtype=float)
        return cls(center, np.eye(center.size), semi_axes)

    @property
    def dim(self):
        return self.center.size

    @property
    def matrix(self):
        """The shape matrix ``E``."""
        U = self.directions
        return (U * self.semi_axes**2) @ U.T

    def to_local(self, y):
        """Coordinates of ``y`` relative to the center in the principal frame."""
        return (np.asarray(y, dtype=float) - self.center) @ self.directions

    def from_local(self, z):
        return self.center + np.asarray(z, dtype=float) @ self.directions.T

    def quadratic_form(self, y):
        """``(y - c)^T E^{-1} (y - c)``; broadcasts over leading axes of ``y``."""
        z = self.to_local(y) / self.semi_axes
        return np.sum(z * z, axis=-1)

    def scaled(self, factor):
        """Same center and directions, semi-axes multiplied by ``factor``."""
        return Ellipsoid(self.center, self.directions, self.semi_axes * factor, self.degenerate)

    def transformed(self, rotation, translation):
        """Image under ``y -> rotation @ y + translation``."""
        R = np.asarray(rotation, dtype=float)
        return Ellipsoid(R @ self.center + translation, R @ self.directions,
                         self.semi_axes, self.degenerate)


def _canonical_signs(U):
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def fit_ellipsoid(points, scale_fraction=DEFAULT_SCALE_FRACTION) -> Ellipsoid:
    """Fit the bounding ellipsoid of one class's feature points.

    The shape comes from the SVD of the mean-centered ``N x L`` point matrix:
    right singular vectors give the principal directions and the singular
    values the (unscaled) semi-axes.  The ellipsoid is then rescaled so that
    its surface sits at ``scale_fraction`` of the way, in its own metric, from
    the center to the farthest point of the class.  The farthest point
    therefore has quadratic-form value ``1 / scale_fraction**2``.

    Parameters
    ----------
    points : array_like, shape (N, L)
    scale_fraction : float in (0, 1]
        0.9-1.0 suits clean data, 0.6-0.8 noisy data with outliers.

    Returns
    -------
    Ellipsoid
        ``degenerate`` is set when axes had to be floored at
        ``1e-9 * max(semi_axes)``.
    """
    Y = np.asarray(points, dtype=float)
    if Y.ndim != 2 or Y.shape[0] < 2:
        raise DataError("need an N x L point matrix with N >= 2")
    if not 0 < scale_fraction <= 1:
        raise ValueError("scale_fraction must lie in (0, 1]")
    N, L = Y.shape
    center = Y.mean(axis=0)
    Yc = Y - center
    _, s, Vt = np.linalg.svd(Yc, full_matrices=True)
    sv = np.zeros(L)
    sv[: s.size] = s
    if sv[0] <= 0 or not np.any(np.abs(Yc) > 0):
        raise DataError("all points are identical; no ellipsoid can be fitted")
    U = _canonical_signs(Vt.T)
    floor = DEGENERATE_AXIS_FLOOR * sv.max()
    degenerate = bool(np.any(sv < floor))
    sv = np.maximum(sv, floor)
    r = np.sqrt(np.sum((Yc @ U / sv) ** 2, axis=1))
    r_max = r.max()
    return Ellipsoid(center, U, sv * (scale_fraction * r_max), degenerate)


def contains(e: Ellipsoid, y) -> bool:
    """True iff ``y`` lies in the closed solid ellipsoid."""
    y = np.asarray(y, dtype=float)
    if y.shape != (e.dim,):
        raise ValueError(f"point has shape {y.shape}, expected ({e.dim},)")
    return bool(e.quadratic_form(y) <= 1.0)


def _secular_root(az, a2, lo, hi, max_iter):
    """Root of ``sum((az / (a2 + t))**2) - 1`` on ``[lo, hi]``.

    The function is convex and decreasing there, so Newton started at the
    left end climbs monotonically to the root; bisection guards the bracket.
    """
    t = lo
    for it in range(1, max_iter + 1):
        q = az / (a2 + t)
        f = q @ q - 1.0
        if f <= 0.0:
            hi = t
            if f > -4 * np.finfo(float).eps:
                return t, it
        else:
            lo = t
        df = -2.0 * (q @ (q / (a2 + t)))
        step = -f / df if df < 0 else math.inf
        t_new = t + step
        if not lo <= t_new <= hi or not np.isfinite(t_new):
            t_new = 0.5 * (lo + hi)
        if t_new == t or hi - lo <= 4 * np.finfo(float).eps * max(abs(lo), abs(hi), 1e-300):
            return t_new, it
        t = t_new
    raise SolverError("secular equation did not converge",
                      {"lower": lo, "upper": hi, "t": t, "iterations": max_iter})


def project_to_surface(e: Ellipsoid, y, epsilon=None, max_iter=200):
    """Closest point of the ellipsoid surface to ``y`` (Euclidean).

    Works in the principal frame, where the closest point is
    ``x_i = a_i^2 z_i / (a_i^2 + t)`` with ``t`` the Lagrange multiplier
    solving the secular equation ``sum (a_i z_i / (a_i^2 + t))^2 = 1``.
    Exterior points have a unique root ``t > 0``; interior points a unique
    root in ``(-min a_i^2, 0)``, save for the degenerate case in which ``y``
    lies on a shortest-axis hyperplane.

    Raises
    ------
    SolverError
        If the root cannot be bracketed or the result misses the surface by
        more than ``epsilon`` (default ``1e-6 * L``).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (e.dim,):
        raise ValueError(f"point has shape {y.shape}, expected ({e.dim},)")
    eps = default_epsilon(e.dim) if epsilon is None else epsilon
    a = e.semi_axes
    a2 = a * a
    z = e.to_local(y)
    zn = np.linalg.norm(z)
    if zn == 0.0:
        raise ValueError("projection from the center is not unique")
    az = a * z
    qf = float(np.sum((z / a) ** 2))

    if qf == 1.0:
        x = z
        it = 0
    elif qf > 1.0:
        hi = a.max() * zn
        t, it = _secular_root(az, a2, 0.0, hi, max_iter)
        x = a2 * z / (a2 + t)
    else:
        k = int(np.argmin(a))
        amin2 = a2[k]
        tiny = 1e-15 * a.max()
        short = np.isclose(a2, amin2, rtol=1e-14, atol=0.0)
        if np.all(np.abs(z[short]) <= tiny):
            # y sits on the shortest-axis hyperplane: the root may be pinned
            # at t = -amin^2, with the free coordinate set by the constraint
            rest = ~short
            with np.errstate(divide="ignore", invalid="ignore"):
                xr = a2[rest] * z[rest] / (a2[rest] - amin2)
            s = float(np.sum((xr / a[rest]) ** 2)) if rest.any() else 0.0
            if s < 1.0:
                x = np.zeros_like(z)
                x[rest] = xr
                x[k] = a[k] * math.sqrt(1.0 - s)
                it = 0
                return _finish(e, x, eps, it)
            t, it = _secular_root(az[rest], a2[rest], -amin2, 0.0, max_iter)
            x = np.zeros_like(z)
            x[rest] = a2[rest] * z[rest] / (a2[rest] + t)
            return _finish(e, x, eps, it)
        else:
            lo = -amin2 + a[k] * abs(z[k])
            lo = min(lo, 0.0)
            t, it = _secular_root(az, a2, lo, 0.0, max_iter)
        x = a2 * z / (a2 + t)
    return _finish(e, x, eps, it)


def _finish(e, x_local, eps, it):
    res = abs(float(np.sum((x_local / e.semi_axes) ** 2)) - 1.0)
    if not res < eps:
        raise SolverError("projection misses the surface",
                          {"residual": res, "iterations": it, "point": e.from_local(x_local)})
    return e.from_local(x_local)


def project_onto(e: Ellipsoid, y, epsilon=None, max_iter=200):
    """Euclidean projection onto the solid ellipsoid (identity inside)."""
    y = np.asarray(y, dtype=float)
    if e.quadratic_form(y) <= 1.0:
        return y.copy()
    return project_to_surface(e, y, epsilon, max_iter)
