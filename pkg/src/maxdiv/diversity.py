"""Similarity-sensitive diversity and entropy of probability measures.

The diversity of order ``q`` of a probability measure ``mu`` on a space
with kernel ``K`` is the power mean of order ``1 - q`` of the atypicality
``1 / (K mu)`` under ``mu``.  With the identity kernel this is the Hill
number of order ``q``, and its logarithm is the Renyi entropy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    MonotonicityViolation,
    NegativeOrderWarning,
    NoSignChange,
    SizeMismatch,
    TypicalityUnderflow,
    ValidationError,
)
from .means import normalize_order, weighted_power_mean
from .spaces import SimilaritySpace, as_measure, as_probability

TYPICALITY_FLOOR = 1e-300

DEFAULT_ORDERS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, math.inf)


def typicality(space: SimilaritySpace, mu) -> np.ndarray:
    """Expected similarity ``(K mu)_i`` of each point to a ``mu``-random point."""
    mu = as_measure(mu)
    if mu.n != space.n:
        raise SizeMismatch(f"measure has {mu.n} weights, space has {space.n} points")
    return space.kernel @ mu.weights


def _atypicality(space, mu):
    """Support weights of ``mu`` and ``1 / (K mu)`` on the support."""
    Kmu = typicality(space, mu)
    supp = mu.support
    ks = Kmu[supp]
    if np.any(ks < TYPICALITY_FLOOR):
        raise TypicalityUnderflow("typicality underflows on the support of the measure")
    return mu.weights[supp], 1.0 / ks


def _check_order(q: float) -> float:
    q = normalize_order(q)
    if q < 0:
        warnings.warn(
            f"order q={q} < 0: maximisation results do not apply to negative orders",
            NegativeOrderWarning,
            stacklevel=3,
        )
    return q


def _diversity(w, atyp, q: float) -> float:
    if q == math.inf:
        return float(atyp.min())
    if q == -math.inf:
        return float(atyp.max())
    return weighted_power_mean(w, atyp, 1.0 - q)


def diversity(space: SimilaritySpace, mu, q: float) -> float:
    """Diversity of order ``q`` of the probability measure ``mu``.

    Parameters
    ----------
    space : SimilaritySpace
    mu : Measure or array_like
        Probability weights, one per point.
    q : float
        Order in ``[-inf, inf]``.  Negative orders are computed but emit a
        :class:`NegativeOrderWarning`.

    Returns
    -------
    float
        ``(sum_i mu_i (K mu)_i^(q-1))^(1/(1-q))``, with the limiting forms
        ``exp(-sum mu_i log (K mu)_i)`` at ``q = 1`` and
        ``1 / max (K mu)`` at ``q = inf`` (max over the support).
    """
    mu = as_probability(mu, space.n)
    q = _check_order(q)
    w, atyp = _atypicality(space, mu)
    return _diversity(w, atyp, q)


def entropy(space: SimilaritySpace, mu, q: float) -> float:
    """Entropy of order ``q``, the logarithm of :func:`diversity`."""
    mu = as_probability(mu, space.n)
    q = _check_order(q)
    w, atyp = _atypicality(space, mu)
    return math.log(_diversity(w, atyp, q))


@dataclass(frozen=True)
class DiversityProfile:
    orders: np.ndarray
    diversities: np.ndarray
    entropies: np.ndarray

    def rows(self):
        for q, d, h in zip(self.orders, self.diversities, self.entropies):
            yield float(q), float(d), float(h)


def diversity_profile(space: SimilaritySpace, mu, orders: Sequence[float] = DEFAULT_ORDERS,
                      slack: float = 1e-10) -> DiversityProfile:
    """Diversity at every order of an increasing grid.

    Raises :class:`MonotonicityViolation` if the profile increases anywhere by
    more than ``slack`` (relative), which would indicate a numerical fault.
    """
    mu = as_probability(mu, space.n)
    qs = np.array([normalize_order(q) for q in orders], dtype=float)
    if qs.size == 0:
        raise ValidationError("order grid is empty")
    if np.any(np.diff(qs) < 0):
        raise ValidationError("order grid must be sorted increasingly")
    if np.any(qs < 0):
        warnings.warn("profile includes negative orders", NegativeOrderWarning, stacklevel=2)
    w, atyp = _atypicality(space, mu)
    divs = np.array([_diversity(w, atyp, q) for q in qs])
    if np.any(np.diff(divs) > slack * divs[:-1]):
        raise MonotonicityViolation("diversity profile increased along the order grid")
    return DiversityProfile(orders=qs, diversities=divs, entropies=np.log(divs))


@dataclass(frozen=True)
class BalanceReport:
    is_balanced: bool
    constant_value: float
    max_deviation: float
    tolerance: float

    @property
    def relative_deviation(self) -> float:
        return self.max_deviation / self.constant_value


def is_balanced(space: SimilaritySpace, mu, tol: float = 1e-8) -> BalanceReport:
    """Test whether ``K mu`` is constant on the support of ``mu``.

    The constant is the plain mean of ``K mu`` over the support and the
    test is relative: ``max |K mu - c| <= tol * c``.
    """
    mu = as_probability(mu, space.n)
    ks = typicality(space, mu)[mu.support]
    c = float(ks.mean())
    dev = float(np.max(np.abs(ks - c)))
    return BalanceReport(is_balanced=dev <= tol * c, constant_value=c,
                         max_deviation=dev, tolerance=tol)


def crossing_order(space: SimilaritySpace, mu1, mu2, bracket=(0.0, 1.0),
                   tol: float = 1e-10, max_iter: int = 200) -> float:
    """Order at which the diversity profiles of ``mu1`` and ``mu2`` cross.

    Bisection on ``q -> D_q(mu1) - D_q(mu2)`` over ``bracket``; the
    difference must have strictly opposite signs at the two ends.  Infinite
    endpoints are handled by bisecting in ``arctan(q)``.
    """
    mu1 = as_probability(mu1, space.n)
    mu2 = as_probability(mu2, space.n)
    lo, hi = (float(b) for b in bracket)
    if not lo < hi:
        raise ValidationError(f"bracket must satisfy lo < hi, got {bracket}")

    def diff(q):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NegativeOrderWarning)
            return diversity(space, mu1, q) - diversity(space, mu2, q)

    f_lo, f_hi = diff(lo), diff(hi)
    if not f_lo * f_hi < 0:
        raise NoSignChange(
            f"diversity difference does not change sign on [{lo}, {hi}] "
            f"(values {f_lo:.6g}, {f_hi:.6g})"
        )
    infinite = math.isinf(lo) or math.isinf(hi)
    to_q = math.tan if infinite else (lambda u: u)
    a, b = (math.atan(lo), math.atan(hi)) if infinite else (lo, hi)
    s_lo = math.copysign(1.0, f_lo)
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if abs(to_q(b) - to_q(a)) <= tol:
            break
        f_m = diff(to_q(m))
        if f_m == 0:
            return to_q(m)
        if math.copysign(1.0, f_m) == s_lo:
            a = m
        else:
            b = m
    return to_q(0.5 * (a + b))
