import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxdiv import (
    build_finite_space,
    crossing_order,
    diversity,
    diversity_profile,
    entropy,
    is_balanced,
    space_from_points,
    typicality,
)
from maxdiv.errors import (
    MonotonicityViolation,
    NegativeOrderWarning,
    NoSignChange,
    NotProbability,
    TypicalityUnderflow,
)

from conftest import cycle_space, random_metric_space

INF = math.inf


def hill(p, q):
    """Hill number computed from the textbook formula."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    if q == 1:
        return math.exp(-np.sum(p * np.log(p)))
    if q == INF:
        return 1 / p.max()
    return float(np.sum(p**q) ** (1 / (1 - q)))


def test_identity_kernel_gives_hill_numbers():
    s = build_finite_space(np.eye(3))
    p = [0.8, 0.1, 0.1]
    assert diversity(s, p, 0) == 3.0
    assert diversity(s, p, 1) == pytest.approx(1.894645708137998, rel=1e-12)
    assert diversity(s, p, 2) == pytest.approx(1 / 0.66, rel=1e-12)
    assert diversity(s, p, INF) == pytest.approx(1.25, rel=1e-14)
    assert entropy(s, p, 1) == pytest.approx(0.6390318596501772, rel=1e-12)


def test_hill_numbers_against_textbook_formula():
    rng = np.random.default_rng(5)
    s = build_finite_space(np.eye(7))
    for _ in range(20):
        p = rng.dirichlet(np.ones(7) * 0.7)
        for q in (0, 0.3, 1, 2, 3.5, INF):
            assert diversity(s, p, q) == pytest.approx(hill(p, q), rel=1e-11)


def test_uniform_on_identity_is_n():
    s = build_finite_space(np.eye(5))
    for q in (0, 0.5, 1, 2, 10, INF):
        assert diversity(s, np.full(5, 0.2), q) == pytest.approx(5.0, rel=1e-14)


def test_all_ones_kernel_gives_one():
    s = build_finite_space(np.ones((4, 4)))
    for q in (0, 1, 2, INF):
        assert diversity(s, [0.1, 0.2, 0.3, 0.4], q) == pytest.approx(1.0, rel=1e-14)


def test_order_two_is_reciprocal_quadratic_form(rng):
    for _ in range(20):
        s = random_metric_space(rng, 6)
        p = rng.dirichlet(np.ones(6))
        assert diversity(s, p, 2) == pytest.approx(1 / (p @ s.kernel @ p), rel=1e-12)


def test_point_mass():
    s = space_from_points([0.0, 1.0, 2.0])
    for q in (0, 1, 2, INF):
        assert diversity(s, [0, 1, 0], q) == pytest.approx(1.0, rel=1e-15)


def test_typicality_and_off_support():
    s = space_from_points([0.0, 1.0])
    tau = typicality(s, [1.0, 0.0])
    np.testing.assert_allclose(tau, [1.0, math.exp(-1)])


def test_negative_order_warns():
    s = build_finite_space(np.eye(2))
    with pytest.warns(NegativeOrderWarning):
        diversity(s, [0.5, 0.5], -1)


def test_not_probability():
    with pytest.raises(NotProbability):
        diversity(build_finite_space(np.eye(2)), [0.5, 0.6], 1)


def test_underflow():
    s = build_finite_space(np.diag([1e-320, 1.0]))
    with pytest.raises(TypicalityUnderflow):
        diversity(s, [1.0, 0.0], 1)


def test_profile_sorted_and_rows():
    s = build_finite_space(np.eye(3))
    prof = diversity_profile(s, [0.8, 0.1, 0.1], [0, 1, 2, INF])
    rows = list(prof.rows())
    assert rows[0] == (0.0, 3.0, math.log(3.0))
    assert np.all(np.diff(prof.diversities) <= 0)
    with pytest.raises(ValueError):
        diversity_profile(s, [0.8, 0.1, 0.1], [2, 1])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**20), n=st.integers(2, 8))
def test_profile_nonincreasing(seed, n):
    rng = np.random.default_rng(seed)
    s = random_metric_space(rng, n)
    p = rng.dirichlet(np.ones(n) * 0.5)
    orders = [0, 0.25, 0.5, 1, 1.5, 2, 4, 10, INF]
    try:
        prof = diversity_profile(s, p, orders)
    except MonotonicityViolation:  # pragma: no cover - would be a bug
        pytest.fail("profile not monotone")
    d = prof.diversities
    assert np.all(d[1:] <= d[:-1] * (1 + 1e-10))
    assert 1 - 1e-12 <= d[-1] and d[0] <= n + 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**20), n=st.integers(2, 7))
def test_permutation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    s = random_metric_space(rng, n)
    p = rng.dirichlet(np.ones(n))
    perm = rng.permutation(n)
    sp = build_finite_space(s.kernel[np.ix_(perm, perm)])
    for q in (0, 1, 2, INF):
        assert diversity(sp, p[perm], q) == pytest.approx(diversity(s, p, q), rel=1e-12)


def test_diversity_decreases_with_larger_similarity(rng):
    for _ in range(20):
        s = random_metric_space(rng, 5)
        p = rng.dirichlet(np.ones(5))
        bigger = build_finite_space(np.sqrt(s.kernel))  # entrywise >= original
        for q in (0, 1, 2, INF):
            assert diversity(bigger, p, q) <= diversity(s, p, q) * (1 + 1e-12)


def test_balanced_uniform_on_cycle():
    s = cycle_space(7)
    rep = is_balanced(s, np.full(7, 1 / 7))
    assert rep.is_balanced
    assert rep.constant_value == pytest.approx(s.kernel[0].sum() / 7)
    prof = diversity_profile(s, np.full(7, 1 / 7), [0, 1, 2, INF])
    np.testing.assert_allclose(prof.diversities, prof.diversities[0], rtol=1e-12)


def test_unbalanced_detected():
    s = space_from_points([0.0, 1.0, 5.0])
    rep = is_balanced(s, [1 / 3, 1 / 3, 1 / 3])
    assert not rep.is_balanced
    assert rep.max_deviation > 1e-3


def test_crossing_order_reference():
    s = build_finite_space(np.eye(3))
    q = crossing_order(s, [0.5, 0.5, 0.0], [0.8, 0.1, 0.1], (0, 1))
    assert q == pytest.approx(0.8526039, abs=1e-6)
    assert diversity(s, [0.5, 0.5, 0], q) == pytest.approx(diversity(s, [0.8, 0.1, 0.1], q), rel=1e-9)


def test_crossing_no_sign_change():
    s = build_finite_space(np.eye(2))
    with pytest.raises(NoSignChange):
        crossing_order(s, [0.5, 0.5], [0.9, 0.1], (0, INF))


def test_crossing_infinite_bracket():
    s = build_finite_space(np.eye(3))
    q = crossing_order(s, [0.5, 0.5, 0.0], [0.8, 0.1, 0.1], (0, INF))
    assert q == pytest.approx(0.8526039, abs=1e-6)
