"""Weightings, magnitude and positive weightings of finite spaces.

A weighting is a vector ``w`` with ``K w = 1``; its total is the magnitude
of the space.  A weighting with nonnegative entries, normalized to total
mass one, is a balanced probability measure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import nnls

from .errors import Asymmetric, Inconsistent, ValidationError, ZeroTotal
from .spaces import Measure, SimilaritySpace

COND_CUTOFF = 1e12
NEG_CLAMP = 1e-12


def default_tol(n: int) -> float:
    """Residual tolerance for weighting feasibility, ``1e-9 * n``."""
    return 1e-9 * max(1, n)


@dataclass(frozen=True)
class Weighting:
    """A solution of ``K w = 1``.

    ``residual`` is ``max |K w - 1|``.  ``unique`` is false when the kernel
    was numerically singular, in which case ``weights`` is one of many
    solutions (all with the same total when the kernel is symmetric).
    """

    weights: np.ndarray
    residual: float
    positive: bool
    unique: bool = True
    condition: float = 1.0

    @property
    def magnitude(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class NoUniqueWeighting(Weighting):
    """Minimum-norm weighting of a numerically singular kernel."""

    unique: bool = False


def _require_symmetric(space: SimilaritySpace):
    if not space.symmetric:
        raise Asymmetric("kernel must be symmetric (magnitude is not well defined otherwise)")


def _make(K, w, unique, cond, cls=Weighting):
    w = np.where((w < 0) & (w >= -NEG_CLAMP), 0.0, w)
    res = float(np.max(np.abs(K @ w - 1.0)))
    return cls(weights=w, residual=res, positive=bool(np.all(w >= 0)),
               unique=unique, condition=cond)


def _lu_condition(K):
    with warnings.catch_warnings():
        # singular kernels are expected here and handled by the caller
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    anorm = np.linalg.norm(K, 1)
    rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    return (lu, piv), cond


def weight_vector(space: SimilaritySpace, cond_cutoff: float = COND_CUTOFF,
                  tol: float | None = None) -> Weighting:
    """Solve ``K w = 1``.

    A pivoted LU factorization with a 1-norm condition estimate decides
    whether the kernel is numerically nonsingular (condition below
    ``cond_cutoff``).  If it is, the unique weighting is returned.
    Otherwise an SVD-based minimum-norm solution is returned as a
    :class:`NoUniqueWeighting`, provided its residual is within ``tol``.

    Raises
    ------
    Asymmetric
        If the kernel is not symmetric.
    Inconsistent
        If the kernel is singular and no weighting exists.
    """
    _require_symmetric(space)
    K = space.kernel
    n = space.n
    tol = default_tol(n) if tol is None else tol
    ones = np.ones(n)
    factors, cond = _lu_condition(K)
    if cond < cond_cutoff:
        w = scipy.linalg.lu_solve(factors, ones, check_finite=False)
        return _make(K, w, True, cond)
    w, *_ = scipy.linalg.lstsq(K, ones, cond=1.0 / cond_cutoff, check_finite=False)
    out = _make(K, w, False, cond, NoUniqueWeighting)
    if out.residual > tol:
        raise Inconsistent(
            f"kernel is singular (condition ~{cond:.3g}) and has no weighting "
            f"(least-squares residual {out.residual:.3g})"
        )
    return out


def magnitude(space: SimilaritySpace, **kwargs) -> float:
    """Magnitude of the space: the total of any weighting."""
    return weight_vector(space, **kwargs).magnitude


def _nnls_weighting(K, tol, unique, cond):
    w, _ = nnls(K, np.ones(K.shape[0]), maxiter=max(50, 10 * K.shape[0]))
    out = _make(K, w, unique, cond)
    return out if out.residual <= tol else None


def positive_weighting(space: SimilaritySpace, tol: float | None = None,
                       cond_cutoff: float = COND_CUTOFF) -> Weighting | None:
    """Find a weighting with all entries nonnegative, or ``None`` if there is none.

    If the kernel is nonsingular and its unique weighting is nonnegative
    (entries down to ``-1e-12`` are clamped to zero) that weighting is
    returned.  If the unique weighting is so negative that no vector within
    residual ``tol`` of a solution can be nonnegative, the answer is ``None``
    without further work.  Every other case is decided by nonnegative least
    squares: a witness is returned iff its residual max-norm is ``<= tol``.
    """
    _require_symmetric(space)
    K = space.kernel
    n = space.n
    tol = default_tol(n) if tol is None else tol
    factors, cond = _lu_condition(K)
    if cond < cond_cutoff:
        w = scipy.linalg.lu_solve(factors, np.ones(n), check_finite=False)
        out = _make(K, w, True, cond)
        if out.positive:
            return out
        # |w' - w|_inf <= ||K^-1||_1 * tol for any w' with residual <= tol;
        # the estimator can undershoot ||K^-1||, hence the factor 10
        inv_norm = cond / np.linalg.norm(K, 1)
        if w.min() < -10.0 * inv_norm * tol:
            return None
        return _nnls_weighting(K, tol, True, cond)
    return _nnls_weighting(K, tol, False, cond)


def positive_weightings_batch(kernels: np.ndarray, tol: float,
                              cond_cutoff: float = COND_CUTOFF):
    """Positive-weighting feasibility for a stack of small symmetric kernels.

    Parameters
    ----------
    kernels : ndarray, shape (m, k, k)

    Returns
    -------
    feasible : ndarray of bool, shape (m,)
    weights : ndarray, shape (m, k)
        A nonnegative weighting where feasible, NaN elsewhere.
    conditions : ndarray, shape (m,)
    """
    m, k, _ = kernels.shape
    lam, V = np.linalg.eigh(kernels)
    absl = np.abs(lam)
    lmin = absl.min(axis=1)
    with np.errstate(divide="ignore"):
        cond = np.where(lmin > 0, absl.max(axis=1) / np.where(lmin > 0, lmin, 1.0), np.inf)
    good = cond < cond_cutoff
    safe = np.where(good[:, None], lam, 1.0)
    coef = np.einsum("mij,mi->mj", V, np.ones((m, k))) / safe
    w = np.einsum("mij,mj->mi", V, coef)
    wmin = w.min(axis=1)
    # rigorous: any w' with residual <= tol lies within sqrt(k) tol / |lambda_min| of w
    margin = np.sqrt(k) * tol / np.where(good, lmin, 1.0)
    feasible = good & (wmin >= -NEG_CLAMP)
    infeasible = good & (wmin < -margin)
    weights = np.full((m, k), np.nan)
    weights[feasible] = np.clip(w[feasible], 0.0, None)
    for i in np.flatnonzero(~feasible & ~infeasible):
        out = _nnls_weighting(kernels[i], tol, bool(good[i]), float(cond[i]))
        if out is not None:
            feasible[i] = True
            weights[i] = out.weights
    return feasible, weights, cond


def normalize_weighting(w, n: int | None = None, indices=None) -> Measure:
    """Normalize a nonnegative weighting on a subset and extend it by zero.

    Parameters
    ----------
    w : Weighting or array_like
        Nonnegative weights on the subset ``indices``.
    n : int, optional
        Size of the ambient space; defaults to ``len(w)``.
    indices : sequence of int, optional
        Positions of the subset in the ambient space; defaults to all.
    """
    w = np.asarray(w.weights if isinstance(w, Weighting) else w, dtype=float)
    if np.any(w < 0):
        raise ValidationError("weighting has negative entries")
    total = w.sum()
    if not total > 0:
        raise ZeroTotal("weighting has zero total mass")
    n = w.size if n is None else n
    idx = np.arange(w.size) if indices is None else np.asarray(indices, dtype=int)
    if idx.size != w.size:
        raise ValidationError("indices and weights differ in length")
    out = np.zeros(n)
    out[idx] = w / total
    return Measure(out)
