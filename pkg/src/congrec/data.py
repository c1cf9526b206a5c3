"""Dataset schemas, file formats, EMA aggregation, and the seeded synthetic
population generator.

File formats
------------
participants.csv   user_id,extraversion,agreeableness,conscientiousness,
                   neuroticism,openness,swb
ema.csv            user_id,timestamp_utc,activity_item  (RFC 3339 timestamps)
taxonomy.json      {version, categories: [{id, name}], items: {raw: id}}
correlation.csv    header "trait,<id>,...", five rows labeled E,A,C,N,O;
                   lines starting with '#' are comments

The taxonomy's category list fixes the canonical index order for every
vector and matrix; correlation columns are matched by id and reordered on
load, so a column-shuffled file yields the same in-memory matrix.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import (
    REPORTED_MAX,
    REPORTED_MIN,
    TRAIT_NAMES,
    ActivityDistribution,
    CorrelationMatrix,
    PersonalityVector,
    compute_median_personality,
    normalize_activity_counts,
)
from .classifier import SWB_MAX, SWB_MIN
from .errors import (
    InvalidConfig,
    ParseError,
    RangeViolation,
    SchemaMismatch,
    UnknownActivityItem,
)
from .serialize import hash_json

PARTICIPANT_HEADER = ["user_id", *TRAIT_NAMES, "swb"]
EMA_HEADER = ["user_id", "timestamp_utc", "activity_item"]
TRAIT_ROW_LABELS = ("E", "A", "C", "N", "O")


@dataclass(frozen=True)
class ParticipantRecord:
    user_id: str
    personality: PersonalityVector
    swb: int


@dataclass(frozen=True)
class EmaEvent:
    user_id: str
    timestamp: datetime
    item: str


@dataclass(frozen=True)
class Category:
    id: str
    name: str


@dataclass(frozen=True)
class Taxonomy:
    """Ordered activity categories plus the raw-item association table."""

    version: str
    categories: tuple[Category, ...]
    items: dict[str, str]

    def __post_init__(self):
        ids = [c.id for c in self.categories]
        if len(set(ids)) != len(ids):
            raise SchemaMismatch("duplicate category ids in taxonomy")
        if not ids:
            raise SchemaMismatch("taxonomy has no categories")
        for raw, cid in self.items.items():
            if cid not in set(ids):
                raise SchemaMismatch(f"item {raw!r} maps to unknown category {cid!r}")

    @property
    def n(self) -> int:
        return len(self.categories)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.categories)

    def index_of(self, category_id: str) -> int:
        for i, c in enumerate(self.categories):
            if c.id == category_id:
                return i
        raise SchemaMismatch(f"unknown category id {category_id!r}")

    def items_for(self, category_id: str) -> list[str]:
        return sorted(raw for raw, cid in self.items.items() if cid == category_id)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "categories": [{"id": c.id, "name": c.name} for c in self.categories],
            "items": dict(sorted(self.items.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Taxonomy":
        try:
            cats = tuple(Category(str(c["id"]), str(c["name"])) for c in d["categories"])
            return cls(version=str(d["version"]), categories=cats, items={str(k): str(v) for k, v in d["items"].items()})
        except (KeyError, TypeError) as exc:
            raise SchemaMismatch(f"malformed taxonomy document: {exc}") from exc

    def content_hash(self) -> str:
        return hash_json(self.to_dict())


@dataclass(frozen=True)
class UserRecord:
    """One cohort row: questionnaire data joined with aggregated activity."""

    user_id: str
    personality: PersonalityVector
    swb: int
    counts: tuple[int, ...]
    dist: ActivityDistribution


def correlation_hash(C: CorrelationMatrix) -> str:
    return hash_json({"rows": [list(r) for r in C.rows], "category_ids": list(C.category_ids or [])})


# ---------------------------------------------------------------------------
# Loaders / writers
# ---------------------------------------------------------------------------


def _open_checked(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise SchemaMismatch(f"no such file: {p}")
    return p


def load_participants(path) -> list[ParticipantRecord]:
    p = _open_checked(path)
    records: list[ParticipantRecord] = []
    seen: set[str] = set()
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != PARTICIPANT_HEADER:
            raise SchemaMismatch(f"participants header must be {','.join(PARTICIPANT_HEADER)}")
        for row in reader:
            line = reader.line_num
            uid = (row["user_id"] or "").strip()
            if not uid:
                raise ParseError("empty user_id", line=line, column="user_id")
            if uid in seen:
                raise SchemaMismatch(f"duplicate user_id {uid!r} at line {line}")
            seen.add(uid)
            traits = []
            for t in TRAIT_NAMES:
                try:
                    v = float(row[t])
                except (TypeError, ValueError):
                    raise ParseError(f"not a number: {row[t]!r}", line=line, column=t)
                if not (REPORTED_MIN <= v <= REPORTED_MAX):
                    raise RangeViolation(
                        f"line {line}: {t}={v:g} outside [{REPORTED_MIN:g}, {REPORTED_MAX:g}]"
                    )
                traits.append(v)
            try:
                swb = int(row["swb"])
            except (TypeError, ValueError):
                raise ParseError(f"not an integer: {row['swb']!r}", line=line, column="swb")
            if not (SWB_MIN <= swb <= SWB_MAX):
                raise RangeViolation(f"line {line}: swb={swb} outside [{SWB_MIN}, {SWB_MAX}]")
            records.append(ParticipantRecord(uid, PersonalityVector.from_iterable(traits), swb))
    if not records:
        raise SchemaMismatch(f"{p} contains no participants")
    return records


def write_participants(path, records: Sequence[ParticipantRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PARTICIPANT_HEADER)
        for r in records:
            writer.writerow([r.user_id, *(_format_num(v) for v in r.personality.as_tuple()), r.swb])


def _format_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _parse_rfc3339(text: str) -> datetime:
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        raise ValueError("missing timezone offset")
    return dt.astimezone(timezone.utc)


def load_ema(path) -> list[EmaEvent]:
    p = _open_checked(path)
    events: list[EmaEvent] = []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != EMA_HEADER:
            raise SchemaMismatch(f"ema header must be {','.join(EMA_HEADER)}")
        for row in reader:
            line = reader.line_num
            uid = (row["user_id"] or "").strip()
            if not uid:
                raise ParseError("empty user_id", line=line, column="user_id")
            try:
                ts = _parse_rfc3339(row["timestamp_utc"])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad timestamp {row['timestamp_utc']!r}: {exc}", line=line, column="timestamp_utc")
            item = (row["activity_item"] or "").strip()
            if not item:
                raise ParseError("empty activity_item", line=line, column="activity_item")
            events.append(EmaEvent(uid, ts, item))
    return events


def write_ema(path, events: Sequence[EmaEvent]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EMA_HEADER)
        for e in events:
            ts = e.timestamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            writer.writerow([e.user_id, ts, e.item])


def load_taxonomy(path) -> Taxonomy:
    p = _open_checked(path)
    import json

    try:
        doc = json.loads(p.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {p}: {exc.msg}", line=exc.lineno)
    return Taxonomy.from_dict(doc)


def write_taxonomy(path, taxonomy: Taxonomy) -> None:
    from .serialize import dump_json

    dump_json(path, taxonomy.to_dict())


def load_correlation(path, taxonomy: Taxonomy) -> CorrelationMatrix:
    """Read the trait-by-activity table and reorder columns to taxonomy order."""
    p = _open_checked(path)
    rows: list[list[str]] = []
    line_nos: list[int] = []
    with p.open(newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.lstrip().startswith("#") or not raw.strip():
                continue
            rows.append(next(csv.reader([raw])))
            line_nos.append(lineno)
    if not rows:
        raise SchemaMismatch(f"{p} has no data rows")
    header = rows[0]
    if not header or header[0] != "trait":
        raise SchemaMismatch("correlation header must start with 'trait'")
    file_ids = header[1:]
    if sorted(file_ids) != sorted(taxonomy.ids):
        raise SchemaMismatch("correlation columns do not match the taxonomy's category ids")
    if len(rows) - 1 != len(TRAIT_ROW_LABELS):
        raise SchemaMismatch(f"expected {len(TRAIT_ROW_LABELS)} trait rows, got {len(rows) - 1}")
    col_order = [file_ids.index(cid) for cid in taxonomy.ids]
    values = np.zeros((len(TRAIT_ROW_LABELS), taxonomy.n))
    for ti, (row, lineno) in enumerate(zip(rows[1:], line_nos[1:])):
        if not row or row[0] != TRAIT_ROW_LABELS[ti]:
            raise SchemaMismatch(f"trait rows must be labeled {','.join(TRAIT_ROW_LABELS)} in order")
        if len(row) != len(file_ids) + 1:
            raise ParseError("wrong number of columns", line=lineno)
        for ci, cell in enumerate(row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", line=lineno, column=file_ids[ci])
            if not (-1.0 <= v <= 1.0):
                raise RangeViolation(f"line {lineno}: correlation {v:g} outside [-1, 1]")
            values[ti, ci] = v
    reordered = values[:, col_order]
    return CorrelationMatrix.from_array(reordered, category_ids=taxonomy.ids)


def write_correlation(path, C: CorrelationMatrix, taxonomy: Taxonomy, comment: str | None = None) -> None:
    lines = []
    if comment:
        for part in comment.splitlines():
            lines.append(f"# {part}")
    lines.append(",".join(["trait", *taxonomy.ids]))
    for label, row in zip(TRAIT_ROW_LABELS, C.rows):
        lines.append(",".join([label, *(repr(v) for v in row)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def bundled_taxonomy() -> Taxonomy:
    """The 15-category stand-in taxonomy shipped with the package."""
    import json

    text = resources.files("congrec.assets").joinpath("taxonomy.json").read_text("utf-8")
    return Taxonomy.from_dict(json.loads(text))


def bundled_correlation(taxonomy: Taxonomy | None = None) -> CorrelationMatrix:
    """The shipped placeholder correlation table (synthetic, small values)."""
    tax = taxonomy or bundled_taxonomy()
    with resources.as_file(resources.files("congrec.assets").joinpath("correlation.csv")) as p:
        return load_correlation(p, tax)


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def aggregate_ema(
    events: Iterable[EmaEvent], taxonomy: Taxonomy, unknown_items: str = "strict"
) -> tuple[dict[str, tuple[int, ...]], dict[str, int]]:
    """Per-user category counts from momentary reports.

    ``unknown_items`` is "strict" (raise on any raw item missing from the
    taxonomy) or "lenient" (skip and tally).  Returns (counts_by_user,
    skipped_by_user).
    """
    if unknown_items not in ("strict", "lenient"):
        raise InvalidConfig(f"unknown_items must be 'strict' or 'lenient', got {unknown_items!r}")
    counts: dict[str, np.ndarray] = {}
    skipped: dict[str, int] = {}
    for e in events:
        cid = taxonomy.items.get(e.item)
        if cid is None:
            if unknown_items == "strict":
                raise UnknownActivityItem(f"unmapped activity item {e.item!r} (user {e.user_id})")
            skipped[e.user_id] = skipped.get(e.user_id, 0) + 1
            continue
        if e.user_id not in counts:
            counts[e.user_id] = np.zeros(taxonomy.n, dtype=int)
        counts[e.user_id][taxonomy.index_of(cid)] += 1
    return {u: tuple(int(c) for c in v) for u, v in counts.items()}, skipped


def build_cohort(
    participants: Sequence[ParticipantRecord],
    counts_by_user: dict[str, tuple[int, ...]],
    taxonomy: Taxonomy,
) -> list[UserRecord]:
    """Join questionnaire rows with aggregated activity counts.

    Order follows the participants file.  A participant without any mapped
    activity reports is a data inconsistency and raises.
    """
    cohort = []
    for rec in participants:
        if rec.user_id not in counts_by_user:
            raise SchemaMismatch(f"participant {rec.user_id!r} has no activity reports")
        counts = counts_by_user[rec.user_id]
        dist = normalize_activity_counts(counts, expected_n=taxonomy.n)
        cohort.append(UserRecord(rec.user_id, rec.personality, rec.swb, counts, dist))
    return cohort


def load_cohort(data_dir) -> tuple[list[UserRecord], Taxonomy, CorrelationMatrix]:
    """Load a data directory: participants.csv, ema.csv, taxonomy.json, correlation.csv."""
    d = Path(data_dir)
    taxonomy = load_taxonomy(d / "taxonomy.json")
    C = load_correlation(d / "correlation.csv", taxonomy)
    participants = load_participants(d / "participants.csv")
    events = load_ema(d / "ema.csv")
    counts, _ = aggregate_ema(events, taxonomy, unknown_items="strict")
    return build_cohort(participants, counts, taxonomy), taxonomy, C


# ---------------------------------------------------------------------------
# Synthetic population
# ---------------------------------------------------------------------------

# Mean time shares used when a config gives no base weights and the taxonomy
# has 15 categories: eight variable leisure categories carry 0.9 of the mass,
# seven routine categories share the remaining 0.1.
_ROUTINE_SHARE = 0.1
_N_ROUTINE = 7
_N_VARIABLE = 8


def default_base_weights(n: int) -> tuple[float, ...]:
    if n == _N_ROUTINE + _N_VARIABLE:
        routine = _ROUTINE_SHARE / _N_ROUTINE
        variable = (1.0 - _ROUTINE_SHARE) / _N_VARIABLE
        return tuple([routine] * _N_ROUTINE + [variable] * _N_VARIABLE)
    return tuple([1.0 / n] * n)


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs for the seeded population generator.

    ``effect_alpha`` scales how strongly the congruence gap drives the
    wellbeing score; ``noise_sigma`` is the standard deviation of the latent
    noise added before squashing.  ``concentration`` controls how far
    individual activity mixes stray from the base weights (lower = more
    spread across users).
    """

    cohort_size: int = 150
    seed: int = 42
    noise_sigma: float = 0.06
    effect_alpha: float = 1.96
    concentration: float = 3.0
    base_weights: tuple[float, ...] | None = None
    ema_days: int = 14
    prompts_per_day: int = 5
    trait_mean: float = 42.0
    trait_sd: float = 1.5
    start_date: str = "2026-01-05"

    def validate(self) -> "SyntheticConfig":
        if self.cohort_size < 10:
            raise InvalidConfig("cohort_size must be at least 10")
        if self.noise_sigma < 0:
            raise InvalidConfig("noise_sigma must be nonnegative")
        if self.effect_alpha < 0:
            raise InvalidConfig("effect_alpha must be nonnegative")
        if self.concentration <= 0:
            raise InvalidConfig("concentration must be positive")
        if self.ema_days < 1 or self.prompts_per_day < 1:
            raise InvalidConfig("need at least one day and one prompt per day")
        if self.base_weights is not None:
            if any(w <= 0 for w in self.base_weights):
                raise InvalidConfig("base weights must be positive")
        return self

    def to_dict(self) -> dict:
        return {
            "cohort_size": self.cohort_size,
            "seed": self.seed,
            "noise_sigma": self.noise_sigma,
            "effect_alpha": self.effect_alpha,
            "concentration": self.concentration,
            "base_weights": list(self.base_weights) if self.base_weights is not None else None,
            "ema_days": self.ema_days,
            "prompts_per_day": self.prompts_per_day,
            "trait_mean": self.trait_mean,
            "trait_sd": self.trait_sd,
            "start_date": self.start_date,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticConfig":
        kwargs = dict(d)
        if kwargs.get("base_weights") is not None:
            kwargs["base_weights"] = tuple(float(w) for w in kwargs["base_weights"])
        return cls(**kwargs)


def delta_gap_size(delta_values: Sequence[float]) -> float:
    """Overall congruence gap: sum of absolute per-trait deltas."""
    return math.fsum(abs(v) for v in delta_values)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


# Rating levels are uniform in the log-odds of the latent score.  The window
# spans the scores the default regime produces, so cohorts spread over
# several levels instead of piling onto one.
_LOGIT_ORIGIN = -1.9
_LOGIT_PER_LEVEL = 0.2


def score_to_swb(score: float) -> int:
    x = math.log(score / (1.0 - score))
    level = 1 + math.floor((x - _LOGIT_ORIGIN) / _LOGIT_PER_LEVEL)
    return int(min(SWB_MAX, max(SWB_MIN, level)))


def _draw_reported_trait(rng: np.random.Generator, mean: float, sd: float) -> float:
    # rejection sampling keeps the distribution a genuine truncation
    while True:
        v = rng.normal(mean, sd)
        if REPORTED_MIN <= v <= REPORTED_MAX:
            return float(round(v))


def generate_synthetic(
    config: SyntheticConfig, C: CorrelationMatrix, taxonomy: Taxonomy
) -> tuple[list[ParticipantRecord], list[EmaEvent]]:
    """Draw a reproducible cohort whose wellbeing tracks congruence.

    Personalities are truncated normals on the reported scale.  Activity
    propensities come from a Dirichlet around the base weights; momentary
    reports are sampled from each user's propensities at the configured
    prompt schedule.  The latent wellbeing score of a user is

        sigmoid(-effect_alpha * gap + noise),  gap = sum(|delta|)

    computed from the realized activity distribution, then mapped onto the
    1-10 rating scale.  With effect_alpha = 0 the ratings are pure noise.
    """
    config.validate()
    if C.n != taxonomy.n:
        raise SchemaMismatch("correlation matrix and taxonomy disagree on category count")
    base = config.base_weights or default_base_weights(taxonomy.n)
    if len(base) != taxonomy.n:
        raise InvalidConfig(f"base_weights must have length {taxonomy.n}")
    alpha = np.asarray(base, dtype=float)
    alpha = alpha / alpha.sum() * config.concentration

    rng = np.random.Generator(np.random.PCG64(config.seed))
    day0 = datetime.fromisoformat(config.start_date).replace(tzinfo=timezone.utc)
    items_by_category = [taxonomy.items_for(cid) for cid in taxonomy.ids]
    if any(not items for items in items_by_category):
        raise SchemaMismatch("every category needs at least one raw item to sample from")

    user_ids = [f"u{i:04d}" for i in range(config.cohort_size)]
    personalities = [
        PersonalityVector.from_iterable(
            [_draw_reported_trait(rng, config.trait_mean, config.trait_sd) for _ in TRAIT_NAMES]
        )
        for _ in user_ids
    ]
    p_median = compute_median_personality(personalities)

    events: list[EmaEvent] = []
    participants: list[ParticipantRecord] = []
    Cm = C.as_array()
    pm = p_median.as_array()
    for uid, pers in zip(user_ids, personalities):
        propensity = rng.dirichlet(alpha)
        counts = np.zeros(taxonomy.n, dtype=int)
        for day in range(config.ema_days):
            seconds = np.sort(rng.integers(0, 86400, size=config.prompts_per_day))
            cats = rng.choice(taxonomy.n, size=config.prompts_per_day, p=propensity)
            for sec, cat in zip(seconds, cats):
                ts = day0 + timedelta(days=day, seconds=int(sec))
                choices = items_by_category[cat]
                item = choices[int(rng.integers(0, len(choices)))]
                events.append(EmaEvent(uid, ts, item))
                counts[cat] += 1
        dist = counts / counts.sum()
        p_ex = pm * (1.0 + Cm @ dist)
        delta = (pers.as_array() - p_ex) / pers.as_array()
        gap = delta_gap_size(delta.tolist())
        noise = rng.normal(0.0, config.noise_sigma) if config.noise_sigma > 0 else 0.0
        score = _sigmoid(-config.effect_alpha * gap + noise)
        participants.append(ParticipantRecord(uid, pers, score_to_swb(score)))
    return participants, events


def planted_config(cohort_size: int = 150, seed: int = 42) -> SyntheticConfig:
    """Settings that plant a strong congruence effect whose personality and
    activity marginals are each individually much weaker.  The defaults are
    already in that regime; this just pins size and seed."""
    return SyntheticConfig(cohort_size=cohort_size, seed=seed)


def write_dataset(
    out_dir,
    participants: Sequence[ParticipantRecord],
    events: Sequence[EmaEvent],
    taxonomy: Taxonomy,
    C: CorrelationMatrix,
    correlation_comment: str | None = None,
) -> list[str]:
    """Write a complete data directory; returns the relative file names."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_participants(out / "participants.csv", participants)
    write_ema(out / "ema.csv", events)
    write_taxonomy(out / "taxonomy.json", taxonomy)
    write_correlation(out / "correlation.csv", C, taxonomy, comment=correlation_comment)
    return ["participants.csv", "ema.csv", "taxonomy.json", "correlation.csv"]
