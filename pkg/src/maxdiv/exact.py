"""Exact maximum diversity of small symmetric spaces by subset enumeration.

The maximum diversity of a symmetric space is the largest magnitude of a
subset that admits a nonnegative weighting, and the normalized weighting of
such a subset is a maximising measure.  Enumerating all ``2^n - 1`` subsets
is exact up to the feasibility tolerance and practical up to about n = 20.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._parallel import ordered_map
from .diversity import BalanceReport, diversity, is_balanced, typicality
from .errors import Asymmetric, TooLarge
from .magnitude import COND_CUTOFF, default_tol, normalize_weighting, positive_weightings_batch
from .spaces import Measure, SimilaritySpace, as_probability

DEFAULT_CAP = 20
CERT_ORDERS = (0.0, 1.0, 2.0, math.inf)
_CHUNK = 4096


@dataclass(frozen=True)
class MaximiserCertificate:
    """Checks that a measure attains a claimed maximum diversity.

    ``checks`` maps ``balance``, ``order_equality``, ``supertypicality``
    and ``nearest_support`` to pass/fail.
    """

    value: float
    balance: BalanceReport
    order_values: dict
    supertypicality_margin: float
    nearest_support_margin: float
    checks: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "checks": dict(self.checks),
            "passed": self.passed,
            "tol": self.tol,
            "balance_relative_deviation": self.balance.relative_deviation,
            "supertypicality_margin": self.supertypicality_margin,
            "nearest_support_margin": self.nearest_support_margin,
            "order_values": {("inf" if math.isinf(q) else repr(q)): v
                             for q, v in self.order_values.items()},
        }


@dataclass(frozen=True)
class MaxDivResult:
    value: float
    measure: Measure
    support: tuple
    balance: BalanceReport
    supertypicality_margin: float
    method: str
    certificate: MaximiserCertificate | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def entropy(self) -> float:
        return math.log(self.value)


def verify_maximiser(space: SimilaritySpace, mu, value: float,
                     tol: float = 1e-8) -> MaximiserCertificate:
    """Certify that ``mu`` is a maximising measure with diversity ``value``.

    Four checks, each reported separately:

    * balance: ``K mu`` constant on the support (relative ``tol``);
    * order_equality: ``D_q(mu)`` equals ``value`` for q in {0, 1, 2, inf};
    * supertypicality: ``(K mu)_i >= 1/value - tol`` at every point;
    * nearest_support: every point has similarity at least ``1/value - tol``
      to some point of the support.

    Balance plus supertypicality is sufficient for optimality; the other
    two are necessary conditions reported for diagnosis.
    """
    if not space.symmetric:
        raise Asymmetric("maximiser certificates need a symmetric kernel")
    mu = as_probability(mu, space.n)
    bal = is_balanced(space, mu, tol)
    orders = {q: diversity(space, mu, q) for q in CERT_ORDERS}
    Kmu = typicality(space, mu)
    inv = 1.0 / value
    margin = float(Kmu.min() - inv)
    nearest = float(space.kernel[:, mu.support].max(axis=1).min() - inv)
    checks = {
        "balance": bal.is_balanced,
        "order_equality": all(abs(d - value) <= tol * value for d in orders.values()),
        "supertypicality": margin >= -tol,
        "nearest_support": nearest >= -tol,
    }
    return MaximiserCertificate(value=float(value), balance=bal, order_values=orders,
                                supertypicality_margin=margin,
                                nearest_support_margin=nearest, checks=checks, tol=tol)


def result_from_measure(space: SimilaritySpace, mu: Measure, value: float, method: str,
                        cert_tol: float = 1e-8, **diagnostics) -> MaxDivResult:
    cert = verify_maximiser(space, mu, value, cert_tol)
    return MaxDivResult(
        value=float(value),
        measure=mu,
        support=tuple(int(i) for i in mu.support),
        balance=cert.balance,
        supertypicality_margin=cert.supertypicality_margin,
        method=method,
        certificate=cert,
        diagnostics=diagnostics,
    )


def _size_block(K, n, k, tol, cond_cutoff):
    """Magnitudes (NaN where infeasible), weights and conditions for all k-subsets."""
    subsets = np.array(list(combinations(range(n), k)), dtype=int)
    mags = np.empty(len(subsets))
    weights = np.empty((len(subsets), k))
    conds = np.empty(len(subsets))
    for s in range(0, len(subsets), _CHUNK):
        idx = subsets[s:s + _CHUNK]
        stack = K[idx[:, :, None], idx[:, None, :]]
        feas, w, c = positive_weightings_batch(stack, tol, cond_cutoff)
        mags[s:s + _CHUNK] = np.where(feas, np.nansum(w, axis=1), np.nan)
        weights[s:s + _CHUNK] = w
        conds[s:s + _CHUNK] = c
    return subsets, mags, weights, conds


def max_diversity_exact(space: SimilaritySpace, cap: int = DEFAULT_CAP,
                        tol: float | None = None, cert_tol: float = 1e-8,
                        tie_rtol: float = 1e-10,
                        cond_cutoff: float = COND_CUTOFF) -> MaxDivResult:
    """Maximum diversity and a maximising measure by enumerating subsets.

    Every nonempty subset is tested for a nonnegative weighting (residual
    tolerance ``tol``, default ``1e-9 * n``).  The maximum diversity is the
    largest magnitude among feasible subsets.  Subsets whose magnitude is
    within ``tie_rtol`` of the maximum tie; the winner is the smallest one,
    then the lexicographically first.

    Raises
    ------
    Asymmetric
        If the kernel is not symmetric.
    TooLarge
        If the space has more than ``cap`` points.
    """
    if not space.symmetric:
        raise Asymmetric("maximum diversity needs a symmetric kernel")
    n = space.n
    if n > cap:
        raise TooLarge(f"{n} points exceeds the enumeration cap of {cap}")
    tol = default_tol(n) if tol is None else tol
    K = np.asarray(space.kernel)
    blocks = ordered_map(lambda k: _size_block(K, n, k, tol, cond_cutoff), range(1, n + 1))
    best = max(np.nanmax(b[1]) for b in blocks if np.any(np.isfinite(b[1])))
    for subsets, mags, weights, conds in blocks:
        hits = np.flatnonzero(mags >= best * (1.0 - tie_rtol))
        if hits.size:
            i = hits[0]
            Y, w, cond = subsets[i], weights[i], conds[i]
            break
    mu = normalize_weighting(w, n, Y)
    feasible_count = int(sum(np.isfinite(b[1]).sum() for b in blocks))
    return result_from_measure(
        space, mu, best, "enumeration", cert_tol,
        subset=tuple(int(i) for i in Y),
        subset_condition=float(cond),
        ill_conditioned=bool(cond >= cond_cutoff),
        feasible_subsets=feasible_count,
    )
