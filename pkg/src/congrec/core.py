"""Vector math for the congruence user model.

A person's reported Big-Five scores (questionnaire, 10-50 per trait) are
compared against an "exhibited" personality implied by how they spread
their time over activity categories.  Exhibited personality is the cohort
median personality modulated elementwise by activity-trait correlations:

    p_ex = p_median * (1 + C @ act)

and the congruence gap is the per-trait normalized difference

    delta = (p_reported - p_exhibited) / p_reported.

All operations here are pure; values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllZeroCounts,
    DimensionMismatch,
    EmptyCohort,
    InvalidDistribution,
    InvalidReportedPersonality,
    LengthMismatch,
)

TRAIT_NAMES = ("extraversion", "agreeableness", "conscientiousness", "neuroticism", "openness")
N_TRAITS = len(TRAIT_NAMES)
REPORTED_MIN = 10.0
REPORTED_MAX = 50.0
SCALE_MIDPOINT = 30.0
SUM_ATOL = 1e-9


@dataclass(frozen=True)
class PersonalityVector:
    """Five trait scores in fixed (E, A, C, N, O) order.

    Reported vectors live on the questionnaire scale [10, 50]; exhibited
    vectors are derived values and are deliberately not clamped to it.
    """

    extraversion: float
    agreeableness: float
    conscientiousness: float
    neuroticism: float
    openness: float

    @classmethod
    def from_iterable(cls, values: Iterable[float]) -> "PersonalityVector":
        vals = tuple(float(v) for v in values)
        if len(vals) != N_TRAITS:
            raise LengthMismatch(f"expected {N_TRAITS} trait scores, got {len(vals)}")
        return cls(*vals)

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.extraversion,
            self.agreeableness,
            self.conscientiousness,
            self.neuroticism,
            self.openness,
        )

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def is_valid_reported(self) -> bool:
        return all(REPORTED_MIN <= v <= REPORTED_MAX for v in self.as_tuple())

    def require_reported(self) -> "PersonalityVector":
        for name, v in zip(TRAIT_NAMES, self.as_tuple()):
            if not (REPORTED_MIN <= v <= REPORTED_MAX):
                raise InvalidReportedPersonality(
                    f"{name}={v!r} outside reported scale [{REPORTED_MIN:g}, {REPORTED_MAX:g}]"
                )
        return self


@dataclass(frozen=True)
class ActivityDistribution:
    """Nonnegative proportions over activity categories, summing to 1."""

    proportions: tuple[float, ...]

    def __post_init__(self):
        props = tuple(float(p) for p in self.proportions)
        object.__setattr__(self, "proportions", props)
        if not props:
            raise LengthMismatch("a distribution needs at least one category")
        if any(p < 0.0 for p in props):
            raise InvalidDistribution("proportions must be nonnegative")
        total = math.fsum(props)
        if abs(total - 1.0) > SUM_ATOL:
            raise InvalidDistribution(f"proportions sum to {total!r}, not 1")

    @classmethod
    def from_iterable(cls, values: Iterable[float]) -> "ActivityDistribution":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.proportions)

    def as_array(self) -> np.ndarray:
        return np.array(self.proportions, dtype=float)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Activity-trait correlation table, 5 rows (trait order) by n columns.

    Column order is the canonical taxonomy order; ``category_ids`` records it
    when the matrix came from a file.
    """

    rows: tuple[tuple[float, ...], ...]
    category_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != N_TRAITS:
            raise DimensionMismatch(f"expected {N_TRAITS} trait rows, got {len(rows)}")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise DimensionMismatch("correlation rows have unequal lengths")
        if self.n == 0:
            raise DimensionMismatch("correlation matrix has no activity columns")
        for ti, row in enumerate(rows):
            for ci, v in enumerate(row):
                if not (-1.0 <= v <= 1.0):
                    raise InvalidDistribution(
                        f"correlation [{TRAIT_NAMES[ti]}, column {ci}] = {v!r} outside [-1, 1]"
                    )
        if self.category_ids is not None and len(self.category_ids) != self.n:
            raise DimensionMismatch("category id count does not match column count")

    @classmethod
    def from_array(cls, values, category_ids=None) -> "CorrelationMatrix":
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatch("correlation matrix must be 2-dimensional")
        ids = tuple(category_ids) if category_ids is not None else None
        return cls(tuple(tuple(row) for row in arr.tolist()), ids)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)


@dataclass(frozen=True)
class WeightVector:
    """Per-trait accumulated activity effect, one value per trait."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != N_TRAITS:
            raise LengthMismatch(f"expected {N_TRAITS} components, got {len(vals)}")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class DeltaVector:
    """Normalized reported-vs-exhibited gap, one value per trait."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != N_TRAITS:
            raise LengthMismatch(f"expected {N_TRAITS} components, got {len(vals)}")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def l1_norm(self) -> float:
        return math.fsum(abs(v) for v in self.values)


def normalize_activity_counts(counts: Sequence[int], expected_n: int | None = None) -> ActivityDistribution:
    """Turn per-category report counts into proportions."""
    vals = [int(c) for c in counts]
    if expected_n is not None and len(vals) != expected_n:
        raise LengthMismatch(f"expected {expected_n} category counts, got {len(vals)}")
    if any(c < 0 for c in vals):
        raise InvalidDistribution("counts must be nonnegative")
    total = sum(vals)
    if total == 0:
        raise AllZeroCounts("no activity reports at all")
    return ActivityDistribution(tuple(c / total for c in vals))


def weight_vector(C: CorrelationMatrix, dist: ActivityDistribution) -> WeightVector:
    """Matrix product of the correlation table with an activity distribution.

    Each component is a convex combination of that trait's correlations, so
    it always lies within the row's [min, max] entry range.
    """
    if C.n != len(dist):
        raise DimensionMismatch(f"matrix has {C.n} columns, distribution has {len(dist)}")
    w = C.as_array() @ dist.as_array()
    return WeightVector(tuple(w.tolist()))


def exhibited_personality(
    dist: ActivityDistribution, C: CorrelationMatrix, p_median: PersonalityVector
) -> PersonalityVector:
    """Median personality modulated elementwise by the activity weight vector.

    Output is not clamped to the reported scale; the modulation can push
    components outside [10, 50], and clamping would break linearity in the
    distribution.
    """
    w = weight_vector(C, dist).as_array()
    p_ex = p_median.as_array() * (1.0 + w)
    return PersonalityVector.from_iterable(p_ex.tolist())


def congruence_delta(p_r: PersonalityVector, p_ex: PersonalityVector) -> DeltaVector:
    """Per-trait gap between reported and exhibited scores, normalized by reported."""
    p_r.require_reported()
    r = p_r.as_array()
    d = (r - p_ex.as_array()) / r
    return DeltaVector(tuple(d.tolist()))


def compute_median_personality(cohort: Sequence[PersonalityVector]) -> PersonalityVector:
    """Per-trait sample median; even-sized cohorts use the mean of the middle two."""
    if not cohort:
        raise EmptyCohort("cannot take the median of an empty cohort")
    stacked = np.array([p.as_tuple() for p in cohort], dtype=float)
    med = np.median(stacked, axis=0)
    return PersonalityVector.from_iterable(med.tolist())


def scale_midpoint_personality() -> PersonalityVector:
    """Neutral anchor: the midpoint of the reported scale on every trait."""
    return PersonalityVector.from_iterable([SCALE_MIDPOINT] * N_TRAITS)
