"""Containment validation of simulated ranges against observed behavior.

A held-out cohort is median-split by wellbeing.  Each high user's actual
activity proportions are checked against their personal whitelist, each
low user's against their blacklist.  A user matches under the "all"
criterion when every varied activity falls inside its envelope, and under
"majority" when at least k do.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .artifact import TrainedArtifact
from .classifier import HIGH, FeatureSetKind, binarize_swb
from .core import CorrelationMatrix
from .data import Taxonomy, UserRecord
from .errors import EmptyRanges, WrongFeatureKind
from .recommender import ActivityRanges, RecommenderConfig, build_fill, select_high_variance, simulate_ranges

RANGE_ATOL = 1e-9


def default_majority_k(m: int) -> int:
    """Majority threshold scaled to the varied-activity count (5 of 8)."""
    return math.ceil(5 * m / 8)


@dataclass(frozen=True)
class ContainmentResult:
    flags: tuple[bool, ...]
    all_in: bool
    majority_in: bool
    k: int


def in_range(dist, ranges: ActivityRanges, k: int) -> ContainmentResult:
    """Check one user's proportions against a range envelope.

    Bounds are inclusive with a small absolute tolerance, so a proportion
    that is exactly a grid value never falls out through float noise.
    """
    if ranges.is_empty:
        raise EmptyRanges("the label had no grid points, so there is nothing to compare against")
    props = np.asarray(getattr(dist, "proportions", dist), dtype=float)
    flags = []
    for slot, idx in enumerate(ranges.varied_indices):
        lo = ranges.lo_units[slot] * ranges.step
        hi = ranges.hi_units[slot] * ranges.step
        v = props[idx]
        flags.append(bool(lo - RANGE_ATOL <= v <= hi + RANGE_ATOL))
    return ContainmentResult(
        flags=tuple(flags),
        all_in=all(flags),
        majority_in=sum(flags) >= k,
        k=k,
    )


@dataclass(frozen=True)
class UserValidation:
    user_id: str
    group: str  # "high" or "low"
    flags: tuple[bool, ...] | None
    all_in: bool
    majority_in: bool
    empty_ranges: bool


@dataclass(frozen=True)
class CohortReport:
    group: str
    criterion: str  # "all" or "majority"
    k: int
    m: int
    matched: int
    total: int

    @property
    def fraction(self) -> float:
        return self.matched / self.total

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "criterion": self.criterion,
            "k": self.k,
            "m": self.m,
            "matched": self.matched,
            "total": self.total,
            "fraction": self.fraction,
        }


def validate_cohort(
    cohort: Sequence[UserRecord],
    artifact: TrainedArtifact,
    C: CorrelationMatrix,
    taxonomy: Taxonomy,
    config: RecommenderConfig = RecommenderConfig(),
    k: int | None = None,
    workers: int = 1,
) -> tuple[list[CohortReport], list[UserValidation]]:
    """Run the containment protocol over a cohort.

    Varied activities are chosen from this cohort's own proportion spread
    (the validation sample decides what is actionable for it); the median
    anchor comes from the artifact.  Users whose relevant label produced no
    grid points count as non-matches rather than being dropped.
    """
    if artifact.feature_kind is not FeatureSetKind.CONGRUENCE:
        raise WrongFeatureKind("validation needs a congruence-feature model")
    config.validate()
    labels, _ = binarize_swb([u.swb for u in cohort])
    D = np.array([u.dist.proportions for u in cohort], dtype=float)
    varied, fixed = select_high_variance(D, m=config.m, variance_threshold=config.variance_threshold)
    m = len(varied)
    k_eff = default_majority_k(m) if k is None else int(k)
    cohort_mean = D.mean(axis=0)

    def check(args) -> UserValidation:
        user, label = args
        group = "high" if label == HIGH else "low"
        fill = build_fill(user.dist.proportions, fixed, config.lam, cohort_mean)
        result = simulate_ranges(
            user.personality, fill, varied, config, artifact.model, C, artifact.p_median
        )
        ranges = result.whitelist if label == HIGH else result.blacklist
        if ranges.is_empty:
            return UserValidation(user.user_id, group, None, False, False, True)
        c = in_range(user.dist, ranges, k_eff)
        return UserValidation(user.user_id, group, c.flags, c.all_in, c.majority_in, False)

    pairs = list(zip(cohort, labels))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_user = list(pool.map(check, pairs))
    else:
        per_user = [check(p) for p in pairs]

    reports = []
    for criterion in ("all", "majority"):
        for group in ("high", "low"):
            members = [u for u in per_user if u.group == group]
            if criterion == "all":
                matched = sum(1 for u in members if u.all_in)
            else:
                matched = sum(1 for u in members if u.majority_in)
            reports.append(
                CohortReport(
                    group=group,
                    criterion=criterion,
                    k=k_eff,
                    m=m,
                    matched=matched,
                    total=len(members),
                )
            )
    return reports, per_user


def validation_document(reports: list[CohortReport], per_user: list[UserValidation]) -> dict:
    return {
        "format_version": 1,
        "reports": [r.to_dict() for r in reports],
        "users": [
            {
                "user_id": u.user_id,
                "group": u.group,
                "flags": list(u.flags) if u.flags is not None else None,
                "all_in": u.all_in,
                "majority_in": u.majority_in,
                "empty_ranges": u.empty_ranges,
            }
            for u in per_user
        ],
    }


def format_validation_table(reports: list[CohortReport]) -> str:
    """Aligned three-column text table of matched fractions."""
    rows = [("Activities", "Group", "Matched")]
    for r in reports:
        label = f"all ({r.m})" if r.criterion == "all" else f"majority (>={r.k})"
        rows.append((label, f"{r.group} SWB", f"{100.0 * r.fraction:.0f}% ({r.matched}/{r.total})"))
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(3)))
    return "\n".join(lines) + "\n"
