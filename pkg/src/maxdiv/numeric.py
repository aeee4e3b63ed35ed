"""Maximum diversity by convex minimization over the probability simplex.

Any measure maximising the diversity of order 2 maximises diversity of
every order, and ``D_2(mu) = 1 / <mu, mu>`` where ``<nu, pi> = nu^T K pi``.
So a maximising measure is a minimizer of the quadratic form ``mu^T K mu``
over the simplex, which is a convex problem when ``K`` is positive
semidefinite.

The solver is Frank-Wolfe with away steps and exact line search.  Every
few iterations the current support is handed to a corrective step that
minimizes the form exactly over the affine hull of the support (the minor
cycle of Wolfe's min-norm-point method), dropping points whose weight hits
zero.  Once the support is right this finishes in one linear solve.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from ._parallel import ordered_map
from .diversity import diversity
from .errors import Asymmetric, NonConvexWarning, NotConverged, SizeMismatch, ValidationError
from .exact import MaxDivResult, result_from_measure
from .spaces import Measure, SimilaritySpace, as_measure, as_probability

log = logging.getLogger(__name__)

PSD_FLOOR = -1e-10


@dataclass(frozen=True)
class SolverOptions:
    """Settings for :func:`maximise`.

    ``step_rule`` is ``"line-search"`` (exact, the default) or ``"fixed"``
    (the classical ``2 / (k + 2)`` schedule, Frank-Wolfe steps only).
    ``tolerance`` bounds the Frank-Wolfe duality gap of ``mu^T K mu``.
    ``init`` is ``"uniform"`` or ``"dirichlet"`` (drawn with ``seed``).
    """

    max_iters: int = 20000
    step_rule: str = "line-search"
    tolerance: float = 1e-10
    prune_threshold: float = 1e-12
    seed: int = 0
    init: str = "uniform"
    corrective_every: int = 25
    restarts: int = 8
    cert_tol: float = 1e-8

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.step_rule not in ("line-search", "fixed"):
            raise ValidationError(f"unknown step rule {self.step_rule!r}")
        if self.init not in ("uniform", "dirichlet"):
            raise ValidationError(f"unknown initialization {self.init!r}")


def quadratic_form(space: SimilaritySpace, nu, pi) -> float:
    """``sum_ij nu_i K_ij pi_j``, the expected similarity of a ``nu``-point to a ``pi``-point."""
    nu = as_measure(nu)
    pi = as_measure(pi)
    if nu.n != space.n or pi.n != space.n:
        raise SizeMismatch("measures and space differ in size")
    return float(nu.weights @ space.kernel @ pi.weights)


@dataclass
class _State:
    x: np.ndarray
    Kx: np.ndarray
    f: float
    gaps: list = field(default_factory=list)
    iterations: int = 0
    corrections: int = 0


def _fw_gap(st: _State) -> tuple[float, int]:
    j = int(np.argmin(st.Kx))
    return 2.0 * (st.f - st.Kx[j]), j


def _solve_support(Kss: np.ndarray) -> np.ndarray | None:
    ones = np.ones(Kss.shape[0])
    try:
        w = scipy.linalg.solve(Kss, ones, assume_a="sym", check_finite=False)
        if np.all(np.isfinite(w)) and np.max(np.abs(Kss @ w - 1.0)) <= 1e-8:
            return w
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        pass
    # singular block (e.g. duplicated points): minimum-norm solution
    w, *_ = scipy.linalg.lstsq(Kss, ones, check_finite=False)
    return w if np.max(np.abs(Kss @ w - 1.0)) <= 1e-8 else None


def _active_set(K: np.ndarray, active: np.ndarray, prune: float, max_rounds: int = 200):
    """Block active-set iteration for ``min w^T K w - 2 sum w`` over ``w >= 0``.

    Solves ``K w = 1`` on the active set, drops every point with
    nonpositive weight, and once none remain adds every point where
    ``(K w)_i < 1``.  Returns the normalized measure or ``None`` if the
    iteration breaks down; callers must check the result.
    """
    active = active.copy()
    for _ in range(max_rounds):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return None
        w_act = _solve_support(K[np.ix_(idx, idx)])
        if w_act is None:
            return None
        neg = w_act <= prune * max(w_act.max(), 0.0)
        if neg.any():
            active[idx[neg]] = False
            continue
        w = np.zeros(K.shape[0])
        w[idx] = w_act
        viol = ~active & (K @ w < 1.0 - 1e-12)
        if not viol.any():
            return w / w.sum()
        active |= viol
    return None


def _refresh(st: _State, K: np.ndarray):
    st.Kx = K @ st.x
    st.f = float(st.x @ st.Kx)


def _corrective(st: _State, K: np.ndarray, prune: float) -> bool:
    """Replace the iterate by the active-set solution started from its support,
    if that lowers the objective."""
    st.corrections += 1
    cand = _active_set(K, st.x > prune * st.x.max(), prune)
    if cand is None:
        return False
    Kc = K @ cand
    fc = float(cand @ Kc)
    if fc > st.f:
        return False
    st.x, st.Kx, st.f = cand, Kc, fc
    return True


def _frank_wolfe(K: np.ndarray, x0: np.ndarray, opts: SolverOptions) -> _State:
    st = _State(x=x0.astype(float).copy(), Kx=np.empty(0), f=0.0)
    _refresh(st, K)
    diag = np.diag(K)
    for it in range(opts.max_iters):
        if opts.corrective_every and it % opts.corrective_every == 0:
            _corrective(st, K, opts.prune_threshold)
        gap, j = _fw_gap(st)
        st.gaps.append(gap)
        st.iterations = it + 1
        if gap <= opts.tolerance:
            break
        if opts.step_rule == "fixed":
            gamma = 2.0 / (it + 2.0)
            st.x *= 1.0 - gamma
            st.x[j] += gamma
            st.Kx = (1.0 - gamma) * st.Kx + gamma * K[:, j]
            st.f = float(st.x @ st.Kx)
            continue
        S = np.flatnonzero(st.x > 0)
        a = int(S[np.argmax(st.Kx[S])])
        away_gap = 2.0 * (st.Kx[a] - st.f)
        if gap >= away_gap:
            # towards vertex j: d = e_j - x
            slope = st.Kx[j] - st.f
            curv = diag[j] - 2.0 * st.Kx[j] + st.f
            gmax = 1.0
            Kd = K[:, j] - st.Kx
            vertex, sign = j, 1.0
        else:
            # away from vertex a: d = x - e_a
            slope = st.f - st.Kx[a]
            curv = st.f - 2.0 * st.Kx[a] + diag[a]
            gmax = st.x[a] / (1.0 - st.x[a]) if st.x[a] < 1.0 else 1e300
            Kd = st.Kx - K[:, a]
            vertex, sign = a, -1.0
        gamma = gmax if curv <= 0 else min(gmax, -slope / curv)
        gamma = max(gamma, 0.0)
        st.x *= 1.0 - sign * gamma
        st.x[vertex] += sign * gamma
        if sign < 0 and gamma == gmax:
            st.x[vertex] = 0.0
        np.maximum(st.x, 0.0, out=st.x)
        st.Kx += gamma * Kd
        st.f = st.f + 2.0 * gamma * slope + gamma * gamma * curv
        if it % 200 == 199:
            _refresh(st, K)
    return st


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _projected_gradient(K, x0, iters, step):
    x = x0.copy()
    for _ in range(iters):
        x = _project_simplex(x - step * 2.0 * (K @ x))
    return x


def _initial(n: int, opts: SolverOptions, rng=None) -> np.ndarray:
    if opts.init == "uniform" and rng is None:
        return np.full(n, 1.0 / n)
    rng = rng or np.random.default_rng(opts.seed)
    return rng.dirichlet(np.ones(n))


def _finish(space, st, opts, method, **diag) -> MaxDivResult:
    x = st.x.copy()
    x[x < opts.prune_threshold * x.sum()] = 0.0
    mu = Measure(x / x.sum())
    value = diversity(space, mu, 2.0)
    gap, _ = _fw_gap(st)
    return result_from_measure(space, mu, value, method, opts.cert_tol,
                               iterations=st.iterations, corrections=st.corrections,
                               gap=float(gap), gap_trace=list(st.gaps), **diag)


def maximise(space: SimilaritySpace, opts: SolverOptions | None = None) -> MaxDivResult:
    """Maximising measure and maximum diversity of a symmetric space.

    Positive semidefinite kernels (smallest eigenvalue at least ``-1e-10``)
    are solved to a duality gap of ``opts.tolerance``; the result is global.
    Other kernels get ``opts.restarts`` projected-gradient starts polished by
    Frank-Wolfe, and the best is returned with ``diagnostics["local"]`` set.

    Raises
    ------
    Asymmetric
        If the kernel is not symmetric.
    NotConverged
        If the gap is still above tolerance after ``opts.max_iters``
        iterations.  The exception's ``partial`` attribute holds the result.
    """
    opts = opts or SolverOptions()
    if not space.symmetric:
        raise Asymmetric("maximum diversity needs a symmetric kernel")
    K = np.asarray(space.kernel)
    n = space.n
    lam_min = float(np.linalg.eigvalsh(K)[0])
    if lam_min >= PSD_FLOOR:
        st = _frank_wolfe(K, _initial(n, opts), opts)
        _corrective(st, K, opts.prune_threshold)
        gap, _ = _fw_gap(st)
        if gap > opts.tolerance:
            # corrective pass may have been rejected numerically; keep going from here
            st2 = _frank_wolfe(K, st.x, replace(opts, max_iters=max(1, opts.max_iters // 10)))
            st2.iterations += st.iterations
            st2.gaps = st.gaps + st2.gaps
            st = st2
        res = _finish(space, st, opts, "convex", local=False, min_eigenvalue=lam_min)
        if res.diagnostics["gap"] > opts.tolerance:
            raise NotConverged(
                f"duality gap {res.diagnostics['gap']:.3g} above tolerance "
                f"{opts.tolerance:.3g} after {st.iterations} iterations", partial=res)
        return res

    warnings.warn(
        f"kernel is not positive semidefinite (min eigenvalue {lam_min:.3g}); "
        "result is a local optimum", NonConvexWarning, stacklevel=2)
    step = 1.0 / (2.0 * float(np.abs(np.linalg.eigvalsh(K)).max()))
    rng = np.random.default_rng(opts.seed)
    starts = [np.full(n, 1.0 / n)] + [rng.dirichlet(np.ones(n)) for _ in range(opts.restarts - 1)]

    def run(x0):
        x = _projected_gradient(K, x0, 500, step)
        return _frank_wolfe(K, x, opts)

    states = ordered_map(run, starts)
    # lowest objective wins; ties go to the earliest start
    best = min(range(len(states)), key=lambda i: (round(states[i].f, 14), i))
    return _finish(space, states[best], opts, "convex", local=True,
                   min_eigenvalue=lam_min, restart_index=best)


@dataclass(frozen=True)
class OrderCheck:
    passed: bool
    profile_ratio: float
    order_equality: bool
    beaten_by_random: bool
    worst_random_excess: float
    orders: tuple


def check_all_orders(space: SimilaritySpace, mu, q_grid=(0.0, 0.5, 1.0, 2.0, 10.0, math.inf),
                     tol: float = 1e-6, samples: int = 100, seed: int = 0) -> OrderCheck:
    """Check that ``mu`` has the same diversity at every order and that none
    of ``samples`` Dirichlet-random measures beats it at any sampled order.
    """
    mu = as_probability(mu, space.n)
    vals = np.array([diversity(space, mu, q) for q in q_grid])
    ratio = float(vals.max() / vals.min() - 1.0)
    rng = np.random.default_rng(seed)
    excess = -math.inf
    for _ in range(samples):
        nu = Measure(rng.dirichlet(np.ones(space.n)))
        for q, v in zip(q_grid, vals):
            excess = max(excess, diversity(space, nu, q) - v)
    beaten = excess > tol
    equal = ratio <= tol
    return OrderCheck(passed=equal and not beaten, profile_ratio=ratio, order_equality=equal,
                      beaten_by_random=beaten, worst_random_excess=float(excess),
                      orders=tuple(q_grid))
