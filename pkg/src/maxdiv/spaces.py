"""Finite spaces with similarities and measures on them.

A :class:`SimilaritySpace` is a finite set of points together with a
nonnegative kernel matrix whose diagonal is strictly positive.  Spaces built
from a metric carry their distance matrix, which is what makes rescaling
possible: the kernel of ``tX`` is ``exp(-t * d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NonmetricPrecomputed,
    NonpositiveDiagonal,
    NonSquare,
    NotMetricOrigin,
    NotProbability,
    SizeMismatch,
    ValidationError,
)

PROBABILITY_TOL = 1e-12

_METRICS = {"euclidean": "euclidean", "l1": "cityblock", "cityblock": "cityblock"}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SimilaritySpace:
    """A finite space with similarities.

    Attributes
    ----------
    kernel : ndarray, shape (n, n)
        ``kernel[i, j]`` is the similarity of point ``i`` to point ``j``.
    labels : tuple of str
        Point identifiers, used for serialization only.
    distances : ndarray or None
        Distance matrix, possibly containing ``inf``.  Present exactly when
        the kernel was derived from it.
    symmetric : bool
        Whether the stored kernel equals its transpose exactly.
    metric_origin : bool
        Whether ``kernel == exp(-distances)``.
    """

    kernel: np.ndarray
    labels: tuple
    distances: np.ndarray | None = None
    symmetric: bool = field(default=False)
    metric_origin: bool = field(default=False)

    @property
    def n(self) -> int:
        return self.kernel.shape[0]

    def __len__(self) -> int:
        return self.n

    def restrict(self, indices: Sequence[int]) -> "SimilaritySpace":
        """Subspace on the given point indices (in the given order)."""
        idx = np.asarray(indices, dtype=int)
        if idx.ndim != 1 or idx.size == 0:
            raise ValidationError("restriction needs a nonempty 1-d index list")
        dist = None if self.distances is None else _frozen(self.distances[np.ix_(idx, idx)])
        return SimilaritySpace(
            kernel=_frozen(self.kernel[np.ix_(idx, idx)]),
            labels=tuple(self.labels[i] for i in idx),
            distances=dist,
            symmetric=self.symmetric,
            metric_origin=self.metric_origin,
        )

    def is_positive_semidefinite(self, floor: float = -1e-10) -> bool:
        """Smallest eigenvalue of the symmetric kernel is at least ``floor``."""
        if not self.symmetric:
            return False
        return bool(np.linalg.eigvalsh(self.kernel)[0] >= floor)


def _default_labels(n: int, labels) -> tuple:
    if labels is None:
        return tuple(str(i) for i in range(n))
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise SizeMismatch(f"got {len(labels)} labels for {n} points")
    return labels


def build_finite_space(kernel, labels: Sequence | None = None) -> SimilaritySpace:
    """Validate an explicit similarity matrix and wrap it as a space.

    Raises
    ------
    NonSquare
        If ``kernel`` is not an n-by-n matrix with n >= 1.
    NegativeEntry
        If some entry is negative.
    NonpositiveDiagonal
        If some diagonal entry is not strictly positive.
    """
    K = np.asarray(kernel, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise NonSquare(f"kernel must be a nonempty square matrix, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValidationError("kernel entries must be finite")
    if np.any(K < 0):
        i, j = np.argwhere(K < 0)[0]
        raise NegativeEntry(f"kernel[{i}, {j}] = {K[i, j]} is negative")
    if np.any(np.diag(K) <= 0):
        i = int(np.flatnonzero(np.diag(K) <= 0)[0])
        raise NonpositiveDiagonal(f"kernel[{i}, {i}] = {K[i, i]} is not positive")
    return SimilaritySpace(
        kernel=_frozen(K),
        labels=_default_labels(K.shape[0], labels),
        distances=None,
        symmetric=bool(np.array_equal(K, K.T)),
        metric_origin=False,
    )


def _check_distances(D: np.ndarray) -> np.ndarray:
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
        raise DimensionMismatch(f"distance matrix must be square, got shape {D.shape}")
    if np.any(np.isnan(D)):
        raise NonmetricPrecomputed("distance matrix contains NaN")
    if np.any(D < 0):
        raise NonmetricPrecomputed("distance matrix has a negative entry")
    if np.any(np.diag(D) != 0):
        raise NonmetricPrecomputed("distance matrix has a nonzero diagonal entry")
    return D


def _from_distances(D: np.ndarray, labels) -> SimilaritySpace:
    # exp(-inf) == 0 exactly, which gives the Kronecker delta for infinite distances
    K = np.exp(-D)
    return SimilaritySpace(
        kernel=_frozen(K),
        labels=_default_labels(D.shape[0], labels),
        distances=_frozen(D),
        symmetric=bool(np.array_equal(K, K.T)),
        metric_origin=True,
    )


def space_from_points(points, metric: str = "euclidean", t: float = 1.0,
                      labels: Sequence | None = None) -> SimilaritySpace:
    """Build ``tX`` from a point cloud with kernel ``exp(-t * d)``.

    Parameters
    ----------
    points : array_like
        Shape (m, k) point coordinates; a 1-d array is read as m points on
        the line.  With ``metric="precomputed"`` this is an m-by-m distance
        matrix instead (``inf`` allowed off the diagonal).
    metric : {"euclidean", "l1", "precomputed"}
    t : float
        Positive scale factor applied to every distance.

    Notes
    -----
    Duplicate points are allowed.  The triangle inequality is never
    checked; a precomputed matrix is only required to be nonnegative with
    zero diagonal.
    """
    if not t > 0 or not np.isfinite(t):
        raise ValidationError(f"scale factor must be positive and finite, got {t}")
    if metric == "precomputed":
        D = _check_distances(np.asarray(points, dtype=float))
    else:
        if metric not in _METRICS:
            raise ValidationError(f"unknown metric {metric!r}")
        P = np.asarray(points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or P.shape[0] == 0 or P.shape[1] == 0:
            raise DimensionMismatch(f"points must be an (m, k) array, got shape {P.shape}")
        if not np.all(np.isfinite(P)):
            raise ValidationError("point coordinates must be finite")
        D = cdist(P, P, metric=_METRICS[metric])
    return _from_distances(t * D, labels)


def scale_space(space: SimilaritySpace, t: float) -> SimilaritySpace:
    """Return ``tX``: distances multiplied by ``t``, kernel raised to the power ``t``."""
    if not space.metric_origin or space.distances is None:
        raise NotMetricOrigin("rescaling needs a space built from distances")
    if not t > 0 or not np.isfinite(t):
        raise ValidationError(f"scale factor must be positive and finite, got {t}")
    return _from_distances(t * space.distances, space.labels)


@dataclass(frozen=True)
class Measure:
    """Nonnegative weights on the points of a finite space."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ValidationError("measure weights must be a 1-d vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("measure weights must be finite and nonnegative")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def is_probability(self, tol: float = PROBABILITY_TOL) -> bool:
        return self.n > 0 and abs(self.total - 1.0) <= tol

    def normalized(self) -> "Measure":
        s = self.total
        if s <= 0:
            raise ValidationError("cannot normalize a zero measure")
        return Measure(self.weights / s)

    def tv_distance(self, other: "Measure") -> float:
        """Total-variation distance, half the l1 distance of the weights."""
        other = as_measure(other, self.n)
        return 0.5 * float(np.abs(self.weights - other.weights).sum())

    @classmethod
    def uniform(cls, n: int) -> "Measure":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, i: int) -> "Measure":
        w = np.zeros(n)
        w[i] = 1.0
        return cls(w)


def as_measure(mu, n: int | None = None) -> Measure:
    """Coerce ``mu`` to a :class:`Measure`, checking its length against ``n``."""
    if not isinstance(mu, Measure):
        mu = Measure(np.asarray(mu, dtype=float))
    if n is not None and mu.n != n:
        raise SizeMismatch(f"measure has {mu.n} weights, space has {n} points")
    return mu


def as_probability(mu, n: int | None = None, tol: float = PROBABILITY_TOL) -> Measure:
    mu = as_measure(mu, n)
    if not mu.is_probability(tol):
        raise NotProbability(f"measure has total mass {mu.total!r}, expected 1")
    return mu
