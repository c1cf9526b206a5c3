"""Grid simulation over activity mixes and per-activity range extraction.

The m highest-variance activities are varied over an integer grid: each
grid point splits (1 - lambda) of the time budget into multiples of the
step, while the remaining activities are pinned to a fixed fill that sums
to lambda.  Every grid point is classified with a congruence-trained model;
the whitelist is the per-activity [min, max] envelope over points predicted
high, the blacklist the same over points predicted low.

All simplex arithmetic is integer (units of the step) until the final
conversion to proportions, so "increments of 0.1" never drift.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .classifier import FeatureSetKind, LinearModel
from .core import CorrelationMatrix, PersonalityVector
from .errors import (
    DimensionMismatch,
    EmptyGrid,
    EmptyRanges,
    InvalidConfig,
    MTooLarge,
    WrongFeatureKind,
)

GRID_CAP_DEFAULT = 1_000_000
_BLOCK = 4096  # fixed evaluation block, so worker count never changes numerics


@dataclass(frozen=True)
class RecommenderConfig:
    """Grid settings.

    ``lam`` is the joint time share reserved for the non-varied activities.
    ``m`` picks how many high-variance activities to vary; when None, every
    activity whose proportion standard deviation exceeds
    ``variance_threshold`` is varied.
    """

    step: float = 0.1
    lam: float = 0.1
    m: int | None = None
    variance_threshold: float = 0.1
    grid_cap: int = GRID_CAP_DEFAULT

    def validate(self) -> "RecommenderConfig":
        if not (0.0 < self.step <= 1.0):
            raise InvalidConfig("step must be in (0, 1]")
        if not (0.0 <= self.lam < 1.0):
            raise InvalidConfig("lambda must be in [0, 1)")
        self.units()
        return self

    def units(self) -> int:
        """Number of step units shared by the varied activities."""
        raw = (1.0 - self.lam) / self.step
        units = round(raw)
        if abs(raw - units) > 1e-9 or units < 1:
            raise InvalidConfig(
                f"(1 - lambda)/step = {raw!r} is not a positive integer; "
                "pick a step that divides the varied share evenly"
            )
        return int(units)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "lambda": self.lam,
            "m": self.m,
            "variance_threshold": self.variance_threshold,
            "grid_cap": self.grid_cap,
        }


def grid_count(m: int, units: int) -> int:
    """Compositions of ``units`` into m ordered nonnegative parts."""
    if m < 1:
        return 0
    return math.comb(units + m - 1, m - 1)


def enumerate_simplex(m: int, total_units: int) -> Iterator[tuple[int, ...]]:
    """Every way to split ``total_units`` across m slots, lexicographically.

    Yields tuples of nonnegative ints summing to total_units; the count is
    C(total_units + m - 1, m - 1).
    """
    if m < 1:
        raise InvalidConfig("need at least one slot")
    if total_units < 0:
        raise InvalidConfig("total units must be nonnegative")
    if m == 1:
        yield (total_units,)
        return
    parts = [0] * m
    parts[-1] = total_units

    def rec(slot: int, remaining: int):
        if slot == m - 1:
            parts[slot] = remaining
            yield tuple(parts)
            return
        for v in range(remaining + 1):
            parts[slot] = v
            yield from rec(slot + 1, remaining - v)

    yield from rec(0, total_units)


def select_by_spread(
    stds, m: int | None = None, variance_threshold: float = 0.1
) -> tuple[list[int], list[int]]:
    """Split activity indices into (varied, fixed) given per-activity spreads.

    Ranks by standard deviation, descending, ties broken by taxonomy order;
    takes the top m, or everything above the threshold when m is None.  Both
    halves come back sorted by taxonomy index.
    """
    s = np.asarray(stds, dtype=float)
    n = s.shape[0]
    order = sorted(range(n), key=lambda i: (-s[i], i))
    if m is not None:
        if m > n:
            raise MTooLarge(f"m={m} exceeds the {n} available activities")
        if m < 0:
            raise InvalidConfig("m must be nonnegative")
        chosen = set(order[:m])
    else:
        chosen = {i for i in range(n) if s[i] > variance_threshold}
    varied = sorted(chosen)
    fixed = sorted(set(range(n)) - chosen)
    return varied, fixed


def select_high_variance(
    dists: np.ndarray, m: int | None = None, variance_threshold: float = 0.1
) -> tuple[list[int], list[int]]:
    """Split activity indices into (varied, fixed) by cohort spread.

    Uses the sample standard deviation of each activity's proportion across
    the cohort.
    """
    D = np.asarray(dists, dtype=float)
    if D.ndim != 2 or D.shape[0] == 0:
        raise InvalidConfig("need a nonempty cohort matrix of proportions")
    n = D.shape[1]
    stds = D.std(axis=0, ddof=1) if D.shape[0] > 1 else np.zeros(n)
    return select_by_spread(stds, m=m, variance_threshold=variance_threshold)


def build_fill(
    user_dist: Sequence[float] | None,
    fixed_indices: Sequence[int],
    lam: float,
    cohort_mean: Sequence[float],
) -> np.ndarray:
    """Proportions pinned onto the fixed activities, summing to lambda.

    Uses the user's own observed proportions on those activities, rescaled;
    falls back to the cohort means when the user has no mass there (and to a
    uniform split if even the cohort has none).  lambda = 0 gives zeros.
    """
    fixed = list(fixed_indices)
    if not fixed:
        return np.zeros(0)
    if lam == 0.0:
        return np.zeros(len(fixed))
    source = None
    if user_dist is not None:
        vals = np.asarray(user_dist, dtype=float)[fixed]
        if vals.sum() > 0:
            source = vals
    if source is None:
        vals = np.asarray(cohort_mean, dtype=float)[fixed]
        source = vals if vals.sum() > 0 else np.ones(len(fixed))
    return source * (lam / source.sum())


@dataclass(frozen=True)
class ActivityRanges:
    """Per-activity [min, max] proportion envelope over one predicted label.

    Bounds are stored as integer step units; ``count`` is how many grid
    points carried the label.  An empty label yields count 0 and no bounds.
    """

    varied_indices: tuple[int, ...]
    step: float
    count: int
    lo_units: tuple[int, ...] | None
    hi_units: tuple[int, ...] | None

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    def lo_proportions(self) -> tuple[float, ...]:
        if self.is_empty:
            raise EmptyRanges("no grid points carried this label")
        return tuple(u * self.step for u in self.lo_units)

    def hi_proportions(self) -> tuple[float, ...]:
        if self.is_empty:
            raise EmptyRanges("no grid points carried this label")
        return tuple(u * self.step for u in self.hi_units)


@dataclass(frozen=True)
class RangeResult:
    whitelist: ActivityRanges
    blacklist: ActivityRanges
    varied_indices: tuple[int, ...]
    fixed_indices: tuple[int, ...]
    config: RecommenderConfig
    grid_points: int


def _congruence_margins(
    units_block: np.ndarray,
    step: float,
    varied: Sequence[int],
    fixed: Sequence[int],
    fill: np.ndarray,
    p_r: np.ndarray,
    Cm: np.ndarray,
    p_median: np.ndarray,
    model,
) -> np.ndarray:
    B = units_block.shape[0]
    acts = np.zeros((B, Cm.shape[1]))
    acts[:, list(varied)] = units_block * step
    if len(fixed):
        acts[:, list(fixed)] = fill[None, :]
    p_ex = p_median[None, :] * (1.0 + acts @ Cm.T)
    deltas = (p_r[None, :] - p_ex) / p_r[None, :]
    return model.decision_batch(deltas)


def _merge_envelope(units_block, mask):
    cnt = int(mask.sum())
    if cnt == 0:
        return cnt, None, None
    sel = units_block[mask]
    return cnt, sel.min(axis=0), sel.max(axis=0)


def simulate_ranges(
    p_r: PersonalityVector,
    fill: np.ndarray,
    varied_indices: Sequence[int],
    config: RecommenderConfig,
    model: LinearModel,
    C: CorrelationMatrix,
    p_median: PersonalityVector,
    feature_kind: FeatureSetKind = FeatureSetKind.CONGRUENCE,
    workers: int = 1,
) -> RangeResult:
    """Classify every grid point and collect the high/low envelopes.

    Blocks of grid points are evaluated with a fixed block size and merged
    with min/max over integer units, so results are identical for any
    worker count and any enumeration order.
    """
    if feature_kind is not FeatureSetKind.CONGRUENCE:
        raise WrongFeatureKind("range simulation needs a congruence-feature model")
    config.validate()
    varied = [int(i) for i in varied_indices]
    if not varied:
        raise EmptyGrid("no varied activities to simulate")
    n = C.n
    if any(i < 0 or i >= n for i in varied):
        raise DimensionMismatch("varied index outside the taxonomy")
    fixed = sorted(set(range(n)) - set(varied))
    fill = np.asarray(fill, dtype=float)
    if fill.shape[0] != len(fixed):
        raise DimensionMismatch(f"fill covers {fill.shape[0]} activities, expected {len(fixed)}")
    lam_eff = 0.0 if not fixed else config.lam
    raw_units = (1.0 - lam_eff) / config.step
    units = round(raw_units)
    if abs(raw_units - units) > 1e-9 or units < 1:
        raise InvalidConfig(
            f"(1 - lambda)/step = {raw_units!r} is not a positive integer for the effective "
            f"lambda {lam_eff:g}"
        )
    m = len(varied)
    total = grid_count(m, units)
    if total > config.grid_cap:
        raise InvalidConfig(f"grid of {total} points exceeds the cap of {config.grid_cap}")

    p_r.require_reported()
    pr = p_r.as_array()
    pm = p_median.as_array()
    Cm = C.as_array()

    def blocks() -> Iterator[np.ndarray]:
        buf: list[tuple[int, ...]] = []
        for point in enumerate_simplex(m, units):
            buf.append(point)
            if len(buf) == _BLOCK:
                yield np.asarray(buf, dtype=np.int64)
                buf = []
        if buf:
            yield np.asarray(buf, dtype=np.int64)

    def eval_block(units_block: np.ndarray):
        margins = _congruence_margins(units_block, config.step, varied, fixed, fill, pr, Cm, pm, model)
        high = margins >= 0.0
        return _merge_envelope(units_block, high), _merge_envelope(units_block, ~high)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(eval_block, blocks()))
    else:
        results = [eval_block(b) for b in blocks()]

    def reduce(parts):
        count = 0
        lo = hi = None
        for cnt, blo, bhi in parts:
            if cnt == 0:
                continue
            count += cnt
            lo = blo if lo is None else np.minimum(lo, blo)
            hi = bhi if hi is None else np.maximum(hi, bhi)
        if count == 0:
            return ActivityRanges(tuple(varied), config.step, 0, None, None)
        return ActivityRanges(
            tuple(varied),
            config.step,
            count,
            tuple(int(u) for u in lo),
            tuple(int(u) for u in hi),
        )

    white = reduce([r[0] for r in results])
    black = reduce([r[1] for r in results])
    return RangeResult(
        whitelist=white,
        blacklist=black,
        varied_indices=tuple(varied),
        fixed_indices=tuple(fixed),
        config=config,
        grid_points=total,
    )


def range_report(result: RangeResult, taxonomy, model_hash: str) -> dict:
    """JSON-ready document for a simulated range result."""

    def bounds(ranges: ActivityRanges, slot: int):
        if ranges.is_empty:
            return None
        return [ranges.lo_units[slot] * ranges.step, ranges.hi_units[slot] * ranges.step]

    activities = []
    for slot, idx in enumerate(result.varied_indices):
        cat = taxonomy.categories[idx]
        activities.append(
            {
                "id": cat.id,
                "name": cat.name,
                "white": bounds(result.whitelist, slot),
                "black": bounds(result.blacklist, slot),
            }
        )
    cfg = result.config
    return {
        "format_version": 1,
        "grid": {
            "m": len(result.varied_indices),
            "lambda": cfg.lam if result.fixed_indices else 0.0,
            "step": cfg.step,
            "grid_count": result.grid_points,
            "high_count": result.whitelist.count,
            "low_count": result.blacklist.count,
            "model_hash": model_hash,
        },
        "activities": activities,
    }
