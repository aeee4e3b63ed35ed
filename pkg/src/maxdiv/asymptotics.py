"""Behaviour of maximum diversity under rescaling, ``t -> D_max(tX)``.

For a compact metric space ``X`` the growth rate of ``D_max(tX)`` in
``log t`` is the Minkowski dimension, for subsets of ``R^n`` the ratio
``D_max(tX) / t^n`` tends to ``volume / (n! omega_n)``, and the maximising
measures of ``tX`` converge to the uniform measure of ``X``.  Here these
limits are sampled on finite point sets at finite ``t``; nothing is
extrapolated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gammaln

from ._parallel import ordered_map
from .errors import (
    MaxDivError,
    MonotonicityViolation,
    NonUniqueSuspected,
    NotMetricOrigin,
    ResolutionWarning,
    ValidationError,
)
from .exact import MaxDivResult, max_diversity_exact
from .magnitude import magnitude
from .numeric import SolverOptions, maximise
from .spaces import Measure, SimilaritySpace, scale_space, space_from_points

AUTO_EXACT_MAX = 12


def _solve(space: SimilaritySpace, solver: str, opts: SolverOptions | None) -> MaxDivResult:
    if solver == "auto":
        solver = "exact" if space.n <= AUTO_EXACT_MAX else "convex"
    if solver == "exact":
        return max_diversity_exact(space)
    if solver == "convex":
        return maximise(space, opts)
    raise ValidationError(f"unknown solver {solver!r}")


def _check_t_grid(t_grid) -> np.ndarray:
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ValidationError("t grid must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(ts)) or np.any(ts <= 0):
        raise ValidationError("t values must be positive and finite")
    if np.any(np.diff(ts) <= 0):
        raise ValidationError("t grid must be strictly increasing")
    return ts


@dataclass(frozen=True)
class ScalingProfile:
    t_grid: np.ndarray
    dmax_values: np.ndarray
    measures: list
    magnitudes: np.ndarray
    status: list = field(default_factory=list)

    @property
    def tv_steps(self) -> np.ndarray:
        """TV distance from each maximising measure to the previous one (NaN first)."""
        out = np.full(len(self.measures), np.nan)
        for k in range(1, len(self.measures)):
            a, b = self.measures[k - 1], self.measures[k]
            if a is not None and b is not None:
                out[k] = a.tv_distance(b)
        return out


def scaling_profile(space: SimilaritySpace, t_grid, solver: str = "auto",
                    opts: SolverOptions | None = None, with_magnitude: bool = True,
                    slack: float = 1e-9) -> ScalingProfile:
    """Maximum diversity of ``tX`` at each ``t`` in an increasing grid.

    A solver failure at one ``t`` is recorded in ``status`` (the value is
    NaN) rather than aborting the profile.  The successful values must be
    nondecreasing up to a relative ``slack``, otherwise
    :class:`MonotonicityViolation` is raised.
    """
    if not space.metric_origin:
        raise NotMetricOrigin("scaling profiles need a space built from distances")
    ts = _check_t_grid(t_grid)

    def one(t):
        st = scale_space(space, t)
        try:
            res = _solve(st, solver, opts)
        except MaxDivError as exc:
            return math.nan, None, math.nan, f"error: {type(exc).__name__}: {exc}"
        mag = math.nan
        if with_magnitude:
            try:
                mag = magnitude(st)
            except MaxDivError:
                pass
        return res.value, res.measure, mag, "ok"

    rows = ordered_map(one, ts)
    values = np.array([r[0] for r in rows])
    ok = np.isfinite(values)
    v = values[ok]
    if np.any(v[1:] < v[:-1] * (1.0 - slack)):
        raise MonotonicityViolation("maximum diversity decreased as the scale factor grew")
    return ScalingProfile(t_grid=ts, dmax_values=values, measures=[r[1] for r in rows],
                          magnitudes=np.array([r[2] for r in rows]),
                          status=[r[3] for r in rows])


def _points_array(points) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    return P[:, None] if P.ndim == 1 else P


def _warn_resolution(points, metric, t_max):
    if metric == "precomputed":
        return
    P = _points_array(points)
    if P.shape[0] < 2:
        return
    d, _ = cKDTree(P).query(P, k=2, p=1 if metric == "l1" else 2)
    nn = d[:, 1]
    nn = nn[nn > 0]
    if nn.size and t_max * float(np.median(nn)) > 1.0:
        warnings.warn(
            f"t = {t_max:g} times the grid spacing {np.median(nn):.3g} exceeds 1; "
            "the discretization no longer resolves the space at this scale",
            ResolutionWarning, stacklevel=3)


def _log_window(t_range, samples) -> np.ndarray:
    t_lo, t_hi = (float(x) for x in t_range)
    if samples < 1 or not 0 < t_lo <= t_hi:
        raise ValidationError("need 0 < t_lo <= t_hi and at least one sample")
    if samples == 1 or t_lo == t_hi:
        return np.array([t_hi])
    return np.geomspace(t_lo, t_hi, samples)


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    intercept: float
    r_squared: float
    residual_band: float
    local_slope: float
    t_values: np.ndarray
    dmax_values: np.ndarray
    window: tuple


def minkowski_dimension_estimate(points, metric: str = "euclidean", t_range=(10.0, 100.0),
                                 samples: int = 6, solver: str = "auto",
                                 opts: SolverOptions | None = None) -> DimensionEstimate:
    """Least-squares slope of ``log D_max(tX)`` against ``log t``.

    ``t`` runs over ``samples`` log-spaced values in ``t_range``.  The fit
    is ordinary least squares; ``residual_band`` is the largest absolute
    residual and ``local_slope`` the slope between the last two samples.
    """
    if samples < 3:
        raise ValidationError("dimension fit needs at least 3 samples")
    if float(t_range[0]) < 1:
        raise ValidationError("dimension fit needs t_lo >= 1")
    ts = _log_window(t_range, samples)
    _warn_resolution(points, metric, ts[-1])
    base = space_from_points(points, metric=metric)
    prof = scaling_profile(base, ts, solver, opts, with_magnitude=False)
    if not np.all(np.isfinite(prof.dmax_values)):
        bad = [s for s in prof.status if s != "ok"]
        raise MaxDivError(f"solver failed during dimension fit: {bad[0]}")
    x, y = np.log(ts), np.log(prof.dmax_values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    local = float((y[-1] - y[-2]) / (x[-1] - x[-2]))
    return DimensionEstimate(slope=float(slope), intercept=float(intercept), r_squared=r2,
                             residual_band=float(np.max(np.abs(resid))), local_slope=local,
                             t_values=ts, dmax_values=prof.dmax_values,
                             window=(float(t_range[0]), float(t_range[1])))


def ball_volume_constant(n: int) -> float:
    """``n! * omega_n``, with ``omega_n = pi^(n/2) / Gamma(n/2 + 1)`` the unit-ball volume."""
    if n < 1:
        raise ValidationError("dimension must be a positive integer")
    return math.exp(gammaln(n + 1) + 0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1))


@dataclass(frozen=True)
class VolumeEstimate:
    estimate: float
    sequence: np.ndarray
    t_values: np.ndarray
    dmax_values: np.ndarray
    constant: float


def volume_estimate(points, n: int, t_range=(10.0, 100.0), samples: int = 4,
                    solver: str = "auto", metric: str = "euclidean",
                    opts: SolverOptions | None = None) -> VolumeEstimate:
    """``n! omega_n D_max(tX) / t^n`` at the largest sampled ``t``.

    The same ratio at every sampled ``t`` is returned as ``sequence`` for
    judging convergence.
    """
    ts = _log_window(t_range, samples)
    P = _points_array(points)
    if metric != "precomputed" and P.shape[1] != n:
        raise ValidationError(f"points live in R^{P.shape[1]}, ambient dimension given as {n}")
    _warn_resolution(points, metric, ts[-1])
    prof = scaling_profile(space_from_points(points, metric=metric), ts, solver, opts,
                           with_magnitude=False)
    c = ball_volume_constant(n)
    seq = c * prof.dmax_values / ts ** n
    return VolumeEstimate(estimate=float(seq[-1]), sequence=seq, t_values=ts,
                          dmax_values=prof.dmax_values, constant=c)


@dataclass(frozen=True)
class UniformMeasureEstimate:
    measure: Measure
    t_used: float
    convergence_diag: np.ndarray
    converged: bool
    measures: list = field(default_factory=list)


def uniform_measure_estimate(space: SimilaritySpace, t_list, solver: str = "auto",
                             tv_threshold: float = 1e-3, opts: SolverOptions | None = None,
                             unique_tol: float = 1e-6) -> UniformMeasureEstimate:
    """Maximising measure of ``tX`` at the largest ``t``, with TV diagnostics.

    ``convergence_diag[k]`` is the total-variation distance between the
    maximising measures at ``t_list[k]`` and ``t_list[k+1]``; the estimate
    counts as converged when the last of these is at most ``tv_threshold``.

    With the convex solver every ``t`` is solved twice, from the uniform
    measure and from a random start, and :class:`NonUniqueSuspected` is
    raised if the two answers differ by more than ``unique_tol`` in TV.
    """
    if not space.metric_origin:
        raise NotMetricOrigin("uniform measure estimates need a space built from distances")
    if not space.symmetric:
        raise ValidationError("uniform measure estimates need a symmetric space")
    ts = _check_t_grid(t_list)
    opts = opts or SolverOptions()
    use_convex = solver == "convex" or (solver == "auto" and space.n > AUTO_EXACT_MAX)

    def one(t):
        st = scale_space(space, t)
        res = _solve(st, solver, opts)
        if use_convex:
            other = maximise(st, replace(opts, init="dirichlet"))
            tv = res.measure.tv_distance(other.measure)
            if tv > unique_tol:
                raise NonUniqueSuspected(
                    f"restarts at t={t:g} disagree by TV {tv:.3g}; "
                    "the maximising measure may not be unique")
        return res.measure

    measures = ordered_map(one, ts)
    diag = np.array([measures[k].tv_distance(measures[k + 1]) for k in range(len(ts) - 1)])
    converged = bool(diag.size and diag[-1] <= tv_threshold)
    return UniformMeasureEstimate(measure=measures[-1], t_used=float(ts[-1]),
                                  convergence_diag=diag, converged=converged,
                                  measures=measures)
