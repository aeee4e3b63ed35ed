"""Power means of positive functions on finite probability spaces."""

from __future__ import annotations

import math

import numpy as np

from .errors import NonpositiveValueOnSupport, ValidationError
from .spaces import as_probability

# beyond this the finite-order mean is indistinguishable from the max/min
ORDER_CLAMP = 1e6


def normalize_order(t: float) -> float:
    """Map an order to the value actually evaluated (NaN rejected, huge |t| clamped)."""
    t = float(t)
    if math.isnan(t):
        raise ValidationError("order must not be NaN")
    if abs(t) >= ORDER_CLAMP:
        return math.copysign(math.inf, t)
    return t


def weighted_power_mean(w: np.ndarray, f: np.ndarray, t: float) -> float:
    """Power mean of ``f > 0`` under weights ``w > 0`` summing to one.

    Both arrays must already be restricted to the support.  Orders 0 and
    +-1 are evaluated in closed form.  Near zero, where
    ``|t (log f - c)| <= 1`` with ``c`` the log geometric mean, the sum goes
    through ``expm1``/``log1p`` to avoid cancellation.  Other orders are
    shifted by ``m = max f`` (``t > 0``) or ``m = min f`` (``t < 0``) so that
    every power ``(f/m)^t`` lies in ``(0, 1]``.
    """
    t = normalize_order(t)
    if t == math.inf:
        return float(f.max())
    if t == -math.inf:
        return float(f.min())
    if t == 1.0:
        return float(np.dot(w, f))
    if t == -1.0:
        return float(1.0 / np.dot(w, 1.0 / f))
    g = np.log(f)
    c = float(np.dot(w, g))
    if t == 0.0:
        return math.exp(c)
    u = t * (g - c)
    if np.max(np.abs(u)) <= 1.0:
        return math.exp(c + math.log1p(float(np.dot(w, np.expm1(u)))) / t)
    m = float(g.max() if t > 0 else g.min())
    return math.exp(m + math.log(float(np.dot(w, np.exp(t * (g - m))))) / t)


def _support_values(mu, f):
    mu = as_probability(mu)
    f = np.asarray(f, dtype=float)
    if f.shape != mu.weights.shape:
        raise ValidationError(f"function has shape {f.shape}, measure has {mu.n} points")
    supp = mu.support
    fs = f[supp]
    if not np.all(np.isfinite(fs)) or np.any(fs <= 0):
        raise NonpositiveValueOnSupport("function must be positive and finite on the support")
    return mu.weights[supp], fs


def power_mean(mu, f, t: float) -> float:
    """Power mean of order ``t`` of ``f`` with respect to the probability measure ``mu``.

    Order 0 is the weighted geometric mean and the orders ``+inf``/``-inf``
    give the max/min of ``f`` over the support.  Values of ``f`` at
    zero-mass points are ignored entirely.

    >>> power_mean([0.5, 0.5], [1.0, 4.0], 1)
    2.5
    """
    w, fs = _support_values(mu, f)
    return weighted_power_mean(w, fs, t)


def mean_profile(mu, f, orders) -> np.ndarray:
    """Power means of ``f`` at each order in ``orders``."""
    w, fs = _support_values(mu, f)
    return np.array([weighted_power_mean(w, fs, t) for t in orders])
