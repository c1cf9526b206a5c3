import numpy as np
import pytest

from congrec.artifact import TrainedArtifact, train_artifact
from congrec.classifier import FeatureSetKind, TrainingHyper
from congrec.errors import EmptyRanges, WrongFeatureKind
from congrec.recommender import ActivityRanges, RecommenderConfig, select_high_variance
from congrec.validation import (
    default_majority_k,
    in_range,
    validate_cohort,
)

from conftest import rng_for
from helpers_grid import place_users_on_grid
from test_recommender import constant_model


def make_ranges(varied, lo_units, hi_units, step=0.1, count=10):
    return ActivityRanges(tuple(varied), step, count, tuple(lo_units), tuple(hi_units))


def test_default_majority_k_matches_five_of_eight():
    assert default_majority_k(8) == 5
    assert default_majority_k(4) == 3
    assert default_majority_k(1) == 1


def test_in_range_point_inside_its_own_envelope():
    ranges = make_ranges([0, 1, 2], [0, 1, 0], [5, 6, 4])
    dist = [0.3, 0.4, 0.2, 0.1]
    res = in_range(dist, ranges, k=2)
    assert res.flags == (True, True, True)
    assert res.all_in and res.majority_in


def test_in_range_single_violation_counts():
    m = 4
    ranges = make_ranges([0, 1, 2, 3], [1, 1, 1, 1], [3, 3, 3, 3])
    dist = [0.5, 0.2, 0.2, 0.1, 0.0]  # first activity above its envelope
    res = in_range(dist, ranges, k=m - 1)
    assert res.flags == (False, True, True, True)
    assert not res.all_in
    assert res.majority_in


def test_in_range_inclusive_bounds_with_tolerance():
    ranges = make_ranges([0], [3], [7])
    assert in_range([0.3, 0.7], ranges, k=1).all_in
    assert in_range([0.7 - 1e-12, 0.3 + 1e-12], ranges, k=1).all_in


def test_in_range_matches_brute_force_oracle():
    rng = rng_for(60)
    for _ in range(200):
        m = int(rng.integers(1, 6))
        n = m + int(rng.integers(0, 3))
        varied = sorted(rng.choice(n, size=m, replace=False).tolist())
        lo = rng.integers(0, 4, size=m)
        hi = lo + rng.integers(0, 4, size=m)
        ranges = make_ranges(varied, lo.tolist(), hi.tolist())
        dist = rng.random(n)
        k = int(rng.integers(1, m + 1))
        res = in_range(dist, ranges, k)
        flags = [
            bool(lo[s] * 0.1 - 1e-9 <= dist[idx] <= hi[s] * 0.1 + 1e-9)
            for s, idx in enumerate(varied)
        ]
        assert list(res.flags) == flags
        assert res.all_in == all(flags)
        assert res.majority_in == (sum(flags) >= k)


def test_in_range_empty_ranges_raises():
    empty = ActivityRanges((0, 1), 0.1, 0, None, None)
    with pytest.raises(EmptyRanges):
        in_range([0.5, 0.5], empty, k=1)


# ---------------------------------------------------------------------------
# cohort validation
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def trained(planted_cohort, correlation, taxonomy):
    return train_artifact(planted_cohort, FeatureSetKind.CONGRUENCE, correlation, taxonomy)


def test_validate_rejects_non_congruence_model(planted_cohort, correlation, taxonomy):
    art = train_artifact(planted_cohort, FeatureSetKind.PERSONALITY, correlation, taxonomy)
    with pytest.raises(WrongFeatureKind):
        validate_cohort(planted_cohort[:12], art, correlation, taxonomy)


def test_validate_users_on_grid_points_all_match(trained, correlation, taxonomy, planted_cohort):
    cfg = RecommenderConfig(step=0.1, lam=0.1, m=8)
    varied = list(range(7, 15))
    fixed = list(range(7))
    personalities = [u.personality for u in planted_cohort[:24]]
    cohort = place_users_on_grid(trained, correlation, taxonomy, personalities, varied, fixed, cfg)
    assert len(cohort) >= 16
    # the constructed cohort varies only on the varied categories
    D = np.array([u.dist.proportions for u in cohort])
    assert select_high_variance(D, m=8)[0] == varied
    reports, per_user = validate_cohort(cohort, trained, correlation, taxonomy, cfg)
    by = {(r.group, r.criterion): r for r in reports}
    assert by[("high", "all")].fraction == 1.0
    assert by[("low", "all")].fraction == 1.0
    assert by[("high", "majority")].fraction == 1.0
    assert by[("low", "majority")].fraction == 1.0
    assert not any(u.empty_ranges for u in per_user)


def test_validate_empty_ranges_count_as_non_match(correlation, taxonomy, trained, planted_cohort):
    # a constant-low decision function leaves every whitelist empty
    art = TrainedArtifact(
        feature_kind=FeatureSetKind.CONGRUENCE,
        model=constant_model(-1.0),
        p_median=trained.p_median,
        swb_threshold=trained.swb_threshold,
        taxonomy_hash=trained.taxonomy_hash,
        corr_hash=trained.corr_hash,
        activity_mean=trained.activity_mean,
        activity_std=trained.activity_std,
        hyper=TrainingHyper(),
        n_users=trained.n_users,
    )
    cohort = planted_cohort[:20]
    reports, per_user = validate_cohort(cohort, art, correlation, taxonomy, RecommenderConfig(m=8))
    by = {(r.group, r.criterion): r for r in reports}
    assert by[("high", "all")].fraction == 0.0
    assert by[("high", "majority")].fraction == 0.0
    assert all(u.empty_ranges for u in per_user if u.group == "high")
    # low users face a full blacklist envelope instead
    assert by[("low", "all")].fraction == 1.0


def test_validate_majority_at_least_all(trained, correlation, taxonomy, planted_cohort):
    cohort = planted_cohort[:40]
    reports, _ = validate_cohort(cohort, trained, correlation, taxonomy, RecommenderConfig(m=8))
    by = {(r.group, r.criterion): r for r in reports}
    for group in ("high", "low"):
        assert by[(group, "majority")].fraction >= by[(group, "all")].fraction


def test_validate_majority_monotone_in_k(trained, correlation, taxonomy, planted_cohort):
    cohort = planted_cohort[:30]
    fractions = []
    for k in (2, 4, 6, 8):
        reports, _ = validate_cohort(
            cohort, trained, correlation, taxonomy, RecommenderConfig(m=8), k=k
        )
        by = {(r.group, r.criterion): r for r in reports}
        fractions.append(by[("high", "majority")].fraction)
    assert all(a >= b for a, b in zip(fractions, fractions[1:]))


def test_validate_workers_match_serial(trained, correlation, taxonomy, planted_cohort):
    cohort = planted_cohort[:16]
    cfg = RecommenderConfig(m=8)
    serial = validate_cohort(cohort, trained, correlation, taxonomy, cfg, workers=1)
    threaded = validate_cohort(cohort, trained, correlation, taxonomy, cfg, workers=4)
    assert serial == threaded
