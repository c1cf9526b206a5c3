import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congrec.core import (
    ActivityDistribution,
    CorrelationMatrix,
    PersonalityVector,
    compute_median_personality,
    congruence_delta,
    exhibited_personality,
    normalize_activity_counts,
    weight_vector,
)
from congrec.errors import (
    AllZeroCounts,
    EmptyCohort,
    InvalidDistribution,
    InvalidReportedPersonality,
    LengthMismatch,
)

from conftest import rng_for


def random_matrix(rng, n):
    return CorrelationMatrix.from_array(rng.uniform(-1.0, 1.0, size=(5, n)))


def random_dist(rng, n):
    v = rng.random(n) + 1e-3
    return ActivityDistribution.from_iterable(v / v.sum())


def random_reported(rng):
    return PersonalityVector.from_iterable(rng.uniform(10.0, 50.0, size=5))


# ---------------------------------------------------------------------------
# normalize_activity_counts
# ---------------------------------------------------------------------------


def test_normalize_equal_split():
    d = normalize_activity_counts([5, 5] + [0] * 13, expected_n=15)
    assert d.proportions[:2] == (0.5, 0.5)
    assert all(p == 0.0 for p in d.proportions[2:])


def test_normalize_single_category():
    d = normalize_activity_counts([3, 0, 0])
    assert d.proportions == (1.0, 0.0, 0.0)


def test_normalize_matches_scalar_division():
    # oracle: plain per-component division
    counts = [7, 2, 1]
    total = sum(counts)
    expected = [c / total for c in counts]
    d = normalize_activity_counts(counts, expected_n=3)
    assert d.proportions == tuple(expected)
    assert d.proportions == (0.7, 0.2, 0.1)


def test_normalize_all_zero_counts():
    with pytest.raises(AllZeroCounts):
        normalize_activity_counts([0, 0, 0])


def test_normalize_length_mismatch():
    with pytest.raises(LengthMismatch):
        normalize_activity_counts([1, 2], expected_n=3)


def test_normalize_rejects_negative():
    with pytest.raises(InvalidDistribution):
        normalize_activity_counts([3, -1, 0])


def test_distribution_invariants():
    with pytest.raises(InvalidDistribution):
        ActivityDistribution.from_iterable([0.5, 0.4])  # sums to 0.9
    with pytest.raises(InvalidDistribution):
        ActivityDistribution.from_iterable([1.5, -0.5])


# ---------------------------------------------------------------------------
# weight_vector
# ---------------------------------------------------------------------------


def test_weight_one_hot_is_matrix_column():
    rng = rng_for(0)
    C = random_matrix(rng, 6)
    k = 4
    dist = ActivityDistribution.from_iterable([1.0 if i == k else 0.0 for i in range(6)])
    w = weight_vector(C, dist)
    assert np.allclose(w.as_array(), C.as_array()[:, k], atol=0)


def test_weight_zero_matrix():
    C = CorrelationMatrix.from_array(np.zeros((5, 4)))
    w = weight_vector(C, ActivityDistribution.from_iterable([0.25] * 4))
    assert w.values == (0.0,) * 5


def test_weight_matches_triple_loop_oracle():
    rng = rng_for(1)
    for _ in range(50):
        C = random_matrix(rng, 3)
        dist = random_dist(rng, 3)
        w = weight_vector(C, dist).as_array()
        # oracle: scalar loops, no linear algebra
        expected = [
            sum(C.rows[t][i] * dist.proportions[i] for i in range(3)) for t in range(5)
        ]
        assert np.abs(w - np.array(expected)).max() < 1e-12


@given(st.integers(0, 2**31 - 1), st.integers(2, 10))
@settings(max_examples=40, deadline=None)
def test_weight_within_convex_bounds(seed, n):
    rng = rng_for(seed)
    C = random_matrix(rng, n)
    dist = random_dist(rng, n)
    w = weight_vector(C, dist).as_array()
    M = C.as_array()
    assert np.all(w >= M.min(axis=1) - 1e-12)
    assert np.all(w <= M.max(axis=1) + 1e-12)


# ---------------------------------------------------------------------------
# exhibited_personality
# ---------------------------------------------------------------------------


def test_exhibited_zero_correlation_identity():
    C = CorrelationMatrix.from_array(np.zeros((5, 4)))
    pm = PersonalityVector.from_iterable([30] * 5)
    d = random_dist(rng_for(2), 4)
    assert exhibited_personality(d, C, pm).as_tuple() == (30.0,) * 5


def test_exhibited_one_hot_forced_arithmetic():
    col0 = [0.1, -0.2, 0.0, 0.0, 0.5]
    M = np.zeros((5, 2))
    M[:, 0] = col0
    C = CorrelationMatrix.from_array(M)
    pm = PersonalityVector.from_iterable([30] * 5)
    d = ActivityDistribution.from_iterable([1.0, 0.0])
    p_ex = exhibited_personality(d, C, pm)
    assert np.allclose(p_ex.as_array(), [33.0, 24.0, 30.0, 30.0, 45.0], atol=1e-12)


def test_exhibited_matches_scalar_loop_oracle():
    rng = rng_for(3)
    pm = PersonalityVector.from_iterable([28, 34, 30, 26, 38])
    for _ in range(50):
        C = random_matrix(rng, 3)
        d = ActivityDistribution.from_iterable([0.5, 0.3, 0.2])
        got = exhibited_personality(d, C, pm).as_array()
        expected = []
        for t in range(5):
            acc = 0.0
            for i in range(3):
                acc += C.rows[t][i] * d.proportions[i]
            expected.append(pm.as_tuple()[t] * (1.0 + acc))
        assert np.abs(got - np.array(expected)).max() < 1e-12


@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_exhibited_linear_in_distribution(seed, alpha):
    rng = rng_for(seed)
    n = 5
    C = random_matrix(rng, n)
    pm = random_reported(rng)
    d1, d2 = random_dist(rng, n), random_dist(rng, n)
    mix = ActivityDistribution.from_iterable(
        alpha * d1.as_array() + (1.0 - alpha) * d2.as_array()
    )
    lhs = exhibited_personality(mix, C, pm).as_array()
    rhs = alpha * exhibited_personality(d1, C, pm).as_array() + (1.0 - alpha) * exhibited_personality(
        d2, C, pm
    ).as_array()
    assert np.abs(lhs - rhs).max() < 1e-9


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_exhibited_invariant_under_category_permutation(seed):
    rng = rng_for(seed)
    n = 7
    C = random_matrix(rng, n)
    pm = random_reported(rng)
    d = random_dist(rng, n)
    perm = rng.permutation(n)
    Cp = CorrelationMatrix.from_array(C.as_array()[:, perm])
    dp = ActivityDistribution.from_iterable(d.as_array()[perm])
    a = exhibited_personality(d, C, pm).as_array()
    b = exhibited_personality(dp, Cp, pm).as_array()
    assert np.abs(a - b).max() < 1e-12


# ---------------------------------------------------------------------------
# congruence_delta
# ---------------------------------------------------------------------------


def test_delta_perfect_congruence_is_zero():
    p = PersonalityVector.from_iterable([23, 31, 47, 12, 39])
    assert congruence_delta(p, p).values == (0.0,) * 5


def test_delta_forced_arithmetic():
    p_r = PersonalityVector.from_iterable([40] * 5)
    p_ex = PersonalityVector.from_iterable([20, 40, 60, 40, 40])
    assert congruence_delta(p_r, p_ex).values == (0.5, 0.0, -0.5, 0.0, 0.0)


def test_delta_matches_elementwise_oracle():
    rng = rng_for(4)
    for _ in range(50):
        p_r = random_reported(rng)
        p_ex = PersonalityVector.from_iterable(rng.uniform(5.0, 60.0, size=5))
        got = congruence_delta(p_r, p_ex).as_array()
        expected = [(r - e) / r for r, e in zip(p_r.as_tuple(), p_ex.as_tuple())]
        assert np.abs(got - np.array(expected)).max() < 1e-12


def test_delta_rejects_out_of_scale_reported():
    bad = PersonalityVector.from_iterable([9.9, 30, 30, 30, 30])
    ok = PersonalityVector.from_iterable([30] * 5)
    with pytest.raises(InvalidReportedPersonality):
        congruence_delta(bad, ok)
    with pytest.raises(InvalidReportedPersonality):
        congruence_delta(PersonalityVector.from_iterable([30, 30, 30, 30, 50.1]), ok)


# ---------------------------------------------------------------------------
# compute_median_personality
# ---------------------------------------------------------------------------


def test_median_single_user():
    p = PersonalityVector.from_iterable([11, 22, 33, 44, 49])
    assert compute_median_personality([p]) == p


def test_median_odd_count():
    ps = [PersonalityVector.from_iterable([e, 30, 30, 30, 30]) for e in (10, 30, 50)]
    assert compute_median_personality(ps).extraversion == 30.0


def test_median_even_count_mean_of_middle():
    ps = [PersonalityVector.from_iterable([e, 30, 30, 30, 30]) for e in (20, 40)]
    assert compute_median_personality(ps).extraversion == 30.0


def test_median_empty_cohort():
    with pytest.raises(EmptyCohort):
        compute_median_personality([])
