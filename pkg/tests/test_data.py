import collections

import numpy as np
import pytest

from congrec.classifier import auc_rank, binarize_swb
from congrec.core import compute_median_personality
from congrec.data import (
    EmaEvent,
    SyntheticConfig,
    Taxonomy,
    aggregate_ema,
    build_cohort,
    delta_gap_size,
    generate_synthetic,
    load_correlation,
    load_ema,
    load_participants,
    load_taxonomy,
    write_correlation,
    write_dataset,
    write_ema,
    write_participants,
    write_taxonomy,
)
from congrec.errors import (
    DegenerateSplit,
    InvalidConfig,
    ParseError,
    RangeViolation,
    SchemaMismatch,
    UnknownActivityItem,
)
from congrec.serialize import hash_file

from conftest import rng_for

PARTICIPANTS_OK = """user_id,extraversion,agreeableness,conscientiousness,neuroticism,openness,swb
u1,40,35,30,25,20,7
u2,10,50,30,30,30,1
u3,42.5,33,27,19,45,10
"""

EMA_OK = """user_id,timestamp_utc,activity_item
u1,2026-01-05T09:13:42Z,watching TV
u1,2026-01-05T13:02:11+00:00,reading a book
u2,2026-01-06T08:00:00Z,watching TV
"""


def test_load_participants_well_formed(tmp_path):
    p = tmp_path / "participants.csv"
    p.write_text(PARTICIPANTS_OK)
    records = load_participants(p)
    assert len(records) == 3
    assert records[0].user_id == "u1"
    assert records[2].personality.extraversion == 42.5
    assert records[1].swb == 1


def test_load_participants_range_violation_names_field(tmp_path):
    p = tmp_path / "participants.csv"
    p.write_text(PARTICIPANTS_OK.replace("u2,10,", "u2,55,"))
    with pytest.raises(RangeViolation) as exc:
        load_participants(p)
    assert "extraversion" in str(exc.value)
    assert "line 3" in str(exc.value)


def test_load_participants_bad_header(tmp_path):
    p = tmp_path / "participants.csv"
    p.write_text("user,e,a,c,n,o,swb\nu1,30,30,30,30,30,5\n")
    with pytest.raises(SchemaMismatch):
        load_participants(p)


def test_load_participants_duplicate_user(tmp_path):
    p = tmp_path / "participants.csv"
    p.write_text(PARTICIPANTS_OK + "u1,30,30,30,30,30,5\n")
    with pytest.raises(SchemaMismatch):
        load_participants(p)


def test_load_participants_swb_out_of_range(tmp_path):
    p = tmp_path / "participants.csv"
    p.write_text(PARTICIPANTS_OK.replace(",7\n", ",11\n"))
    with pytest.raises(RangeViolation):
        load_participants(p)


def test_load_ema_and_timestamp_forms(tmp_path):
    p = tmp_path / "ema.csv"
    p.write_text(EMA_OK)
    events = load_ema(p)
    assert len(events) == 3
    assert events[0].timestamp.isoformat() == "2026-01-05T09:13:42+00:00"
    assert events[1].timestamp.isoformat() == "2026-01-05T13:02:11+00:00"


def test_load_ema_bad_timestamp(tmp_path):
    p = tmp_path / "ema.csv"
    p.write_text(EMA_OK.replace("2026-01-05T09:13:42Z", "yesterday"))
    with pytest.raises(ParseError) as exc:
        load_ema(p)
    assert exc.value.line == 2


def test_taxonomy_rejects_unknown_mapping():
    with pytest.raises(SchemaMismatch):
        Taxonomy.from_dict(
            {
                "version": "t",
                "categories": [{"id": "a", "name": "A"}],
                "items": {"thing": "missing"},
            }
        )


def test_correlation_column_shuffle_loads_same_matrix(tmp_path, taxonomy, correlation):
    canonical = tmp_path / "canonical.csv"
    write_correlation(canonical, correlation, taxonomy)
    base = load_correlation(canonical, taxonomy)

    # oracle: permuting columns together with their header ids is a no-op
    rng = rng_for(40)
    perm = rng.permutation(taxonomy.n)
    lines = canonical.read_text().strip().splitlines()
    header = lines[0].split(",")
    shuffled_lines = []
    for row in lines:
        cells = row.split(",")
        shuffled_lines.append(",".join([cells[0]] + [cells[1 + i] for i in perm]))
    shuffled = tmp_path / "shuffled.csv"
    shuffled.write_text("\n".join(shuffled_lines) + "\n")
    again = load_correlation(shuffled, taxonomy)
    assert np.array_equal(base.as_array(), again.as_array())
    assert again.category_ids == taxonomy.ids


def test_correlation_wrong_ids_rejected(tmp_path, taxonomy, correlation):
    p = tmp_path / "c.csv"
    write_correlation(p, correlation, taxonomy)
    body = p.read_text().replace("watching_tv", "watching_paint_dry")
    p.write_text(body)
    with pytest.raises(SchemaMismatch):
        load_correlation(p, taxonomy)


def test_correlation_out_of_range_entry(tmp_path, taxonomy, correlation):
    p = tmp_path / "c.csv"
    write_correlation(p, correlation, taxonomy)
    lines = p.read_text().splitlines()
    cells = lines[1].split(",")
    cells[1] = "1.5"
    lines[1] = ",".join(cells)
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(RangeViolation):
        load_correlation(p, taxonomy)


def test_roundtrip_dataset(tmp_path, taxonomy, correlation):
    cfg = SyntheticConfig(cohort_size=12, seed=3, ema_days=2)
    participants, events = generate_synthetic(cfg, correlation, taxonomy)
    write_dataset(tmp_path, participants, events, taxonomy, correlation)
    assert load_participants(tmp_path / "participants.csv") == participants
    assert load_ema(tmp_path / "ema.csv") == events
    assert load_taxonomy(tmp_path / "taxonomy.json") == taxonomy
    C2 = load_correlation(tmp_path / "correlation.csv", taxonomy)
    assert np.array_equal(C2.as_array(), correlation.as_array())


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def test_aggregate_two_categories(taxonomy):
    events = [
        EmaEvent("u1", _ts(i), "watching TV") for i in range(5)
    ] + [EmaEvent("u1", _ts(5 + i), "reading a book") for i in range(5)]
    counts, skipped = aggregate_ema(events, taxonomy)
    assert skipped == {}
    tv = taxonomy.index_of("watching_tv")
    rd = taxonomy.index_of("reading")
    assert counts["u1"][tv] == 5
    assert counts["u1"][rd] == 5
    assert sum(counts["u1"]) == 10


def _ts(i):
    from datetime import datetime, timedelta, timezone

    return datetime(2026, 1, 5, 8, 0, 0, tzinfo=timezone.utc) + timedelta(minutes=i)


def test_aggregate_unknown_item_strict(taxonomy):
    events = [EmaEvent("u1", _ts(0), "juggling chainsaws")]
    with pytest.raises(UnknownActivityItem) as exc:
        aggregate_ema(events, taxonomy)
    assert "juggling chainsaws" in str(exc.value)


def test_aggregate_unknown_item_lenient(taxonomy):
    events = [
        EmaEvent("u1", _ts(0), "juggling chainsaws"),
        EmaEvent("u1", _ts(1), "watching TV"),
    ]
    counts, skipped = aggregate_ema(events, taxonomy, unknown_items="lenient")
    assert skipped == {"u1": 1}
    assert sum(counts["u1"]) == 1


def test_aggregate_matches_group_by_oracle(taxonomy, correlation):
    cfg = SyntheticConfig(cohort_size=100, seed=8, ema_days=3)
    _, events = generate_synthetic(cfg, correlation, taxonomy)
    counts, _ = aggregate_ema(events, taxonomy)
    oracle = collections.Counter((e.user_id, taxonomy.items[e.item]) for e in events)
    for (uid, cid), c in oracle.items():
        assert counts[uid][taxonomy.index_of(cid)] == c
    assert sum(sum(v) for v in counts.values()) == len(events)


def test_build_cohort_missing_events(taxonomy):
    recs = load_participants_from_text(PARTICIPANTS_OK)
    with pytest.raises(SchemaMismatch):
        build_cohort(recs, {}, taxonomy)


def load_participants_from_text(text):
    rows = text.strip().splitlines()[1:]
    from congrec.core import PersonalityVector
    from congrec.data import ParticipantRecord

    out = []
    for row in rows:
        cells = row.split(",")
        out.append(
            ParticipantRecord(
                cells[0], PersonalityVector.from_iterable(map(float, cells[1:6])), int(cells[6])
            )
        )
    return out


# ---------------------------------------------------------------------------
# synthetic generator
# ---------------------------------------------------------------------------


def test_generate_same_seed_identical_files(tmp_path, taxonomy, correlation):
    cfg = SyntheticConfig(cohort_size=15, seed=11, ema_days=2)
    for d in ("a", "b"):
        participants, events = generate_synthetic(cfg, correlation, taxonomy)
        write_dataset(tmp_path / d, participants, events, taxonomy, correlation)
    for f in ("participants.csv", "ema.csv", "taxonomy.json", "correlation.csv"):
        assert hash_file(tmp_path / "a" / f) == hash_file(tmp_path / "b" / f)


def test_generate_event_schedule(taxonomy, correlation):
    cfg = SyntheticConfig(cohort_size=10, seed=12, ema_days=3, prompts_per_day=5)
    participants, events = generate_synthetic(cfg, correlation, taxonomy)
    assert len(events) == 10 * 3 * 5
    per_user = collections.Counter(e.user_id for e in events)
    assert set(per_user.values()) == {15}
    for p in participants:
        assert p.personality.is_valid_reported()
        assert 1 <= p.swb <= 10


def test_generate_invalid_config():
    with pytest.raises(InvalidConfig):
        SyntheticConfig(cohort_size=5).validate()
    with pytest.raises(InvalidConfig):
        SyntheticConfig(noise_sigma=-0.1).validate()
    with pytest.raises(InvalidConfig):
        SyntheticConfig(concentration=0.0).validate()


def _cohort_gaps(cohort, correlation):
    pm = compute_median_personality([u.personality for u in cohort]).as_array()
    Cm = correlation.as_array()
    gaps = []
    for u in cohort:
        p_ex = pm * (1.0 + Cm @ u.dist.as_array())
        delta = (u.personality.as_array() - p_ex) / u.personality.as_array()
        gaps.append(delta_gap_size(delta.tolist()))
    return np.array(gaps)


def test_generate_null_effect_uncorrelated(taxonomy, correlation):
    # permutation-test oracle: with no planted effect, the gap-rating
    # correlation should be null at almost every seed
    significant = 0
    mean_rs = []
    for seed in range(20):
        cfg = SyntheticConfig(cohort_size=150, seed=seed, effect_alpha=0.0)
        participants, events = generate_synthetic(cfg, correlation, taxonomy)
        counts, _ = aggregate_ema(events, taxonomy)
        cohort = build_cohort(participants, counts, taxonomy)
        gaps = _cohort_gaps(cohort, correlation)
        swb = np.array([u.swb for u in cohort], dtype=float)
        if swb.std() == 0:
            continue
        r = float(np.corrcoef(gaps, swb)[0, 1])
        mean_rs.append(r)
        rng = rng_for(10_000 + seed)
        null = []
        for _ in range(500):
            null.append(abs(float(np.corrcoef(gaps, rng.permutation(swb))[0, 1])))
        p_value = (1 + sum(1 for v in null if v >= abs(r))) / 501
        if p_value < 0.01:
            significant += 1
    assert len(mean_rs) >= 15
    assert abs(float(np.mean(mean_rs))) < 0.06
    assert significant <= 3


def test_generate_planted_effect_auc(taxonomy, correlation):
    cfg = SyntheticConfig(cohort_size=150, seed=42)
    participants, events = generate_synthetic(cfg, correlation, taxonomy)
    counts, _ = aggregate_ema(events, taxonomy)
    cohort = build_cohort(participants, counts, taxonomy)
    gaps = _cohort_gaps(cohort, correlation)
    labels, _ = binarize_swb([u.swb for u in cohort])
    # rank-statistic oracle: a smaller gap should rank the high class first
    assert auc_rank((-gaps).tolist(), labels) >= 0.8
