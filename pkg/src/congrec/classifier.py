"""Binary wellbeing classification over four feature families.

The label is a median split of the 1-10 life-satisfaction rating.  Feature
families: reported personality, activity distribution, their concatenation,
and the congruence delta vector.  The main classifier is a soft-margin
linear max-margin model trained by deterministic dual coordinate descent on
the averaged hinge loss; a Gaussian naive Bayes baseline is included.
Evaluation is leave-one-sample-out with accuracy, chance-corrected
agreement, and rank AUC.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .core import (
    CorrelationMatrix,
    PersonalityVector,
    compute_median_personality,
    scale_midpoint_personality,
)
from .errors import (
    DegenerateSplit,
    DimensionMismatch,
    InvalidConfig,
    NonFiniteFeature,
    RangeViolation,
    SingleClassInput,
    SingleClassTrainingSet,
)
from .serialize import hash_json

LOW = 0
HIGH = 1

SWB_MIN = 1
SWB_MAX = 10

# Columns whose training-fold standard deviation falls below this (relative
# to their scale) carry no information and are excluded from the decision.
_CONST_STD_GUARD = 1e-12


def validate_swb_score(value: int) -> int:
    v = int(value)
    if not (SWB_MIN <= v <= SWB_MAX):
        raise RangeViolation(f"wellbeing score {value!r} outside [{SWB_MIN}, {SWB_MAX}]")
    return v


class FeatureSetKind(str, Enum):
    PERSONALITY = "personality"
    ACTIVITY = "activity"
    PERSONALITY_ACTIVITY = "personality_activity"
    CONGRUENCE = "congruence"


def feature_length(kind: FeatureSetKind, n_categories: int) -> int:
    if kind is FeatureSetKind.PERSONALITY:
        return 5
    if kind is FeatureSetKind.ACTIVITY:
        return n_categories
    if kind is FeatureSetKind.PERSONALITY_ACTIVITY:
        return 5 + n_categories
    return 5


def binarize_swb(scores: Sequence[int]) -> tuple[list[int], float]:
    """Median-split the ratings; a score at or above the median counts as high.

    Returns (labels, threshold).  Raises when the split would leave either
    side empty, which happens for constant ratings or when the median equals
    the minimum.
    """
    vals = [validate_swb_score(s) for s in scores]
    if len(vals) < 2:
        raise DegenerateSplit("need at least two ratings to split")
    threshold = float(np.median(np.asarray(vals, dtype=float)))
    labels = [HIGH if v >= threshold else LOW for v in vals]
    if all(l == HIGH for l in labels) or all(l == LOW for l in labels):
        raise DegenerateSplit(f"median {threshold:g} puts every rating on one side")
    return labels, threshold


def build_features(
    personality: PersonalityVector,
    dist,
    kind: FeatureSetKind,
    C: CorrelationMatrix | None = None,
    p_median: PersonalityVector | None = None,
) -> np.ndarray:
    """Feature vector for one user under the given family.

    Congruence features need the correlation matrix and the median anchor;
    the other families ignore them.
    """
    P = personality.as_array()[None, :]
    D = dist.as_array()[None, :]
    Cm = C.as_array() if kind is FeatureSetKind.CONGRUENCE else None
    pm = p_median.as_array() if kind is FeatureSetKind.CONGRUENCE else None
    return features_matrix(P, D, kind, Cm, pm)[0]


def features_matrix(P: np.ndarray, D: np.ndarray, kind: FeatureSetKind, C=None, p_median=None) -> np.ndarray:
    """Vectorized feature construction for a whole cohort.

    P is (N, 5) reported scores, D is (N, n) activity proportions.
    """
    if kind is FeatureSetKind.PERSONALITY:
        return np.array(P, dtype=float)
    if kind is FeatureSetKind.ACTIVITY:
        return np.array(D, dtype=float)
    if kind is FeatureSetKind.PERSONALITY_ACTIVITY:
        return np.hstack([P, D]).astype(float)
    if C is None or p_median is None:
        raise InvalidConfig("congruence features need a correlation matrix and a median anchor")
    p_ex = p_median[None, :] * (1.0 + D @ np.asarray(C, dtype=float).T)
    return (P - p_ex) / P


# ---------------------------------------------------------------------------
# Linear max-margin model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainingHyper:
    """Solver settings.  The solver itself is deterministic; the seed is
    carried through to artifacts for provenance only."""

    regularization: float = 1.0  # weight of the averaged hinge term
    max_passes: int = 10_000
    tol: float = 1e-6  # stop when the objective change per sweep drops below
    seed: int = 0
    algorithm: str = "svm"  # "svm" or "nb"

    def to_dict(self) -> dict:
        return {
            "regularization": self.regularization,
            "max_passes": self.max_passes,
            "tol": self.tol,
            "seed": self.seed,
            "algorithm": self.algorithm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingHyper":
        return cls(
            regularization=float(d["regularization"]),
            max_passes=int(d["max_passes"]),
            tol=float(d["tol"]),
            seed=int(d["seed"]),
            algorithm=str(d.get("algorithm", "svm")),
        )


def _solve_hinge_cd_py(Z, ys, per_sample_cost, max_passes, tol):
    """Dual coordinate descent for the L2-regularized averaged hinge loss.

    Z already carries the constant bias column.  Sweeps visit samples in a
    fixed 0..N-1 order, so the result is bit-reproducible.  Returns the
    primal weight vector, the sweep count, and the final primal objective.
    """
    n, d = Z.shape
    v = np.zeros(d)
    alpha = np.zeros(n)
    qii = np.zeros(n)
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += Z[i, j] * Z[i, j]
        qii[i] = s

    prev_obj = np.inf
    obj = np.inf
    passes = 0
    for _ in range(max_passes):
        passes += 1
        max_pg = 0.0
        for i in range(n):
            if qii[i] <= 0.0:
                continue
            g = 0.0
            for j in range(d):
                g += v[j] * Z[i, j]
            g = ys[i] * g - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = g if g < 0.0 else 0.0
            elif a >= per_sample_cost:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            apg = -pg if pg < 0.0 else pg
            if apg > max_pg:
                max_pg = apg
            if apg > 1e-12:
                na = a - g / qii[i]
                if na < 0.0:
                    na = 0.0
                elif na > per_sample_cost:
                    na = per_sample_cost
                if na != a:
                    step = (na - a) * ys[i]
                    for j in range(d):
                        v[j] += step * Z[i, j]
                    alpha[i] = na
        # primal objective: 0.5 ||v||^2 + cost * sum(hinge)
        reg = 0.0
        for j in range(d):
            reg += v[j] * v[j]
        hinge = 0.0
        for i in range(n):
            s = 0.0
            for j in range(d):
                s += v[j] * Z[i, j]
            h = 1.0 - ys[i] * s
            if h > 0.0:
                hinge += h
        obj = 0.5 * reg + per_sample_cost * hinge
        if max_pg <= 1e-12:
            break
        if abs(prev_obj - obj) < tol:
            break
        prev_obj = obj
    return v, passes, obj


try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _solve_hinge_cd = njit(cache=True)(_solve_hinge_cd_py)
except Exception:  # pragma: no cover
    _solve_hinge_cd = _solve_hinge_cd_py


@dataclass(frozen=True)
class LinearModel:
    """Standardizing linear decision function.

    ``feature_means``/``feature_stds`` cover every input column;
    near-constant training columns are listed in ``dropped_features`` and
    excluded from the decision (their recorded std is 1 to keep the
    transform well-defined).
    """

    weights: tuple[float, ...]
    bias: float
    feature_means: tuple[float, ...]
    feature_stds: tuple[float, ...]
    dropped_features: tuple[int, ...]
    hyper: TrainingHyper
    objective: float
    passes: int

    @property
    def n_features(self) -> int:
        return len(self.feature_means)

    @property
    def kept_features(self) -> tuple[int, ...]:
        dropped = set(self.dropped_features)
        return tuple(i for i in range(self.n_features) if i not in dropped)

    def decision_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected (*, {self.n_features}) features, got {X.shape}")
        kept = list(self.kept_features)
        mu = np.array([self.feature_means[i] for i in kept])
        sd = np.array([self.feature_stds[i] for i in kept])
        w = np.array(self.weights)
        Z = (X[:, kept] - mu) / sd
        return Z @ w + self.bias

    def decision(self, x) -> float:
        return float(self.decision_batch(np.asarray(x, dtype=float)[None, :])[0])

    def to_dict(self) -> dict:
        return {
            "type": "linear",
            "weights": list(self.weights),
            "bias": self.bias,
            "feature_means": list(self.feature_means),
            "feature_stds": list(self.feature_stds),
            "dropped_features": list(self.dropped_features),
            "hyper": self.hyper.to_dict(),
            "objective": self.objective,
            "passes": self.passes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(
            weights=tuple(float(v) for v in d["weights"]),
            bias=float(d["bias"]),
            feature_means=tuple(float(v) for v in d["feature_means"]),
            feature_stds=tuple(float(v) for v in d["feature_stds"]),
            dropped_features=tuple(int(i) for i in d["dropped_features"]),
            hyper=TrainingHyper.from_dict(d["hyper"]),
            objective=float(d["objective"]),
            passes=int(d["passes"]),
        )


def _check_training_inputs(X: np.ndarray, y: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("feature matrix must be 2-dimensional")
    y = np.asarray(list(y), dtype=int)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch("feature rows and labels differ in length")
    if X.shape[0] < 2:
        raise SingleClassTrainingSet("need at least two training samples")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("feature matrix contains NaN or infinity")
    if len(set(y.tolist())) < 2:
        raise SingleClassTrainingSet("training labels contain a single class")
    return X, y


def train_linear_svm(X, y, hyper: TrainingHyper = TrainingHyper()) -> LinearModel:
    """Fit the max-margin model on standardized features.

    Minimizes 0.5*||v||^2 + regularization * mean(hinge) over the augmented
    weight vector (bias handled as a constant column, so it is regularized
    too).  Averaging the data term makes the optimum invariant to
    duplicating the training set.
    """
    X, y = _check_training_inputs(X, y)
    n, d = X.shape
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    scale = np.maximum(1.0, np.abs(means))
    dropped = tuple(int(i) for i in range(d) if stds[i] <= _CONST_STD_GUARD * scale[i])
    kept = [i for i in range(d) if i not in set(dropped)]
    stds_out = stds.copy()
    stds_out[list(dropped)] = 1.0

    Z = (X[:, kept] - means[kept]) / stds_out[kept] if kept else np.zeros((n, 0))
    Zaug = np.hstack([Z, np.ones((n, 1))])
    ys = np.where(y == HIGH, 1.0, -1.0)
    cost = hyper.regularization / n
    v, passes, objective = _solve_hinge_cd(
        np.ascontiguousarray(Zaug), ys, float(cost), int(hyper.max_passes), float(hyper.tol)
    )
    return LinearModel(
        weights=tuple(float(w) for w in v[:-1]),
        bias=float(v[-1]),
        feature_means=tuple(float(m) for m in means),
        feature_stds=tuple(float(s) for s in stds_out),
        dropped_features=dropped,
        hyper=hyper,
        objective=float(objective),
        passes=int(passes),
    )


def svm_objective(model: LinearModel, X, y) -> float:
    """Primal objective of the averaged hinge problem at the model's weights."""
    X, y = _check_training_inputs(X, y)
    margins = model.decision_batch(X)
    ys = np.where(np.asarray(y) == HIGH, 1.0, -1.0)
    hinge = np.maximum(0.0, 1.0 - ys * margins).sum()
    w = np.array(model.weights)
    reg = 0.5 * (w @ w + model.bias**2)
    return float(reg + model.hyper.regularization / X.shape[0] * hinge)


# ---------------------------------------------------------------------------
# Gaussian naive Bayes baseline
# ---------------------------------------------------------------------------

_VAR_FLOOR = 1e-9


@dataclass(frozen=True)
class GaussianNBModel:
    """Per-feature class-conditional Gaussians; decision value is the
    log-posterior difference (high minus low)."""

    log_prior_low: float
    log_prior_high: float
    means: tuple[tuple[float, ...], tuple[float, ...]]  # (low, high)
    variances: tuple[tuple[float, ...], tuple[float, ...]]

    @property
    def n_features(self) -> int:
        return len(self.means[0])

    def _class_log_likelihood(self, X: np.ndarray, cls: int) -> np.ndarray:
        mu = np.array(self.means[cls])
        var = np.array(self.variances[cls])
        return (-0.5 * (np.log(2.0 * np.pi * var) + (X - mu) ** 2 / var)).sum(axis=1)

    def decision_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected (*, {self.n_features}) features, got {X.shape}")
        hi = self._class_log_likelihood(X, HIGH) + self.log_prior_high
        lo = self._class_log_likelihood(X, LOW) + self.log_prior_low
        return hi - lo

    def decision(self, x) -> float:
        return float(self.decision_batch(np.asarray(x, dtype=float)[None, :])[0])

    def to_dict(self) -> dict:
        return {
            "type": "gaussian_nb",
            "log_prior_low": self.log_prior_low,
            "log_prior_high": self.log_prior_high,
            "means": [list(self.means[0]), list(self.means[1])],
            "variances": [list(self.variances[0]), list(self.variances[1])],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianNBModel":
        return cls(
            log_prior_low=float(d["log_prior_low"]),
            log_prior_high=float(d["log_prior_high"]),
            means=(tuple(map(float, d["means"][0])), tuple(map(float, d["means"][1]))),
            variances=(tuple(map(float, d["variances"][0])), tuple(map(float, d["variances"][1]))),
        )


def train_gaussian_nb(X, y) -> GaussianNBModel:
    X, y = _check_training_inputs(X, y)
    out_means = []
    out_vars = []
    priors = []
    for cls in (LOW, HIGH):
        rows = X[np.asarray(y) == cls]
        priors.append(rows.shape[0] / X.shape[0])
        out_means.append(tuple(float(v) for v in rows.mean(axis=0)))
        var = np.maximum(rows.var(axis=0), _VAR_FLOOR)
        out_vars.append(tuple(float(v) for v in var))
    return GaussianNBModel(
        log_prior_low=float(np.log(priors[LOW])),
        log_prior_high=float(np.log(priors[HIGH])),
        means=(out_means[LOW], out_means[HIGH]),
        variances=(out_vars[LOW], out_vars[HIGH]),
    )


def model_from_dict(d: dict):
    if d.get("type") == "linear":
        return LinearModel.from_dict(d)
    if d.get("type") == "gaussian_nb":
        return GaussianNBModel.from_dict(d)
    raise InvalidConfig(f"unknown model type {d.get('type')!r}")


def predict(model, x) -> tuple[int, float]:
    """Label and signed decision value; a value of exactly zero counts as high."""
    margin = model.decision(x)
    return (HIGH if margin >= 0.0 else LOW), margin


def predict_batch(model, X) -> tuple[np.ndarray, np.ndarray]:
    margins = model.decision_batch(X)
    return (margins >= 0.0).astype(int), margins


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def cohen_kappa(tn: int, fp: int, fn: int, tp: int) -> float:
    """Chance-corrected agreement from confusion counts; 0 when expected
    agreement is already perfect."""
    n = tn + fp + fn + tp
    if n <= 0:
        raise InvalidConfig("empty confusion matrix")
    p_o = (tn + tp) / n
    actual_high = (fn + tp) / n
    pred_high = (fp + tp) / n
    p_e = actual_high * pred_high + (1.0 - actual_high) * (1.0 - pred_high)
    if p_e == 1.0:
        return 0.0
    return (p_o - p_e) / (1.0 - p_e)


def auc_rank(margins: Sequence[float], labels: Sequence[int]) -> float:
    """Probability that a high sample outranks a low one; ties count half.

    Computed from average ranks, which is exact for the pairwise definition.
    """
    m = np.asarray(list(margins), dtype=float)
    y = np.asarray(list(labels), dtype=int)
    if m.shape != y.shape:
        raise DimensionMismatch("margins and labels differ in length")
    n_high = int((y == HIGH).sum())
    n_low = int((y == LOW).sum())
    if n_high == 0 or n_low == 0:
        raise SingleClassInput("rank AUC needs both labels present")
    order = np.argsort(m, kind="stable")
    sorted_m = m[order]
    ranks = np.empty(len(m), dtype=float)
    i = 0
    while i < len(m):
        j = i
        while j + 1 < len(m) and sorted_m[j + 1] == sorted_m[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    rank_sum_high = float(ranks[y == HIGH].sum())
    u = rank_sum_high - n_high * (n_high + 1) / 2.0
    return u / (n_high * n_low)


# ---------------------------------------------------------------------------
# Leave-one-sample-out evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplePrediction:
    user_id: str
    label: int
    predicted: int
    margin: float


@dataclass(frozen=True)
class EvaluationReport:
    feature_kind: FeatureSetKind
    algorithm: str
    n: int
    threshold: float
    accuracy: float
    kappa: float
    auc: float
    tn: int
    fp: int
    fn: int
    tp: int
    predictions: tuple[SamplePrediction, ...]
    fold_model_hashes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "feature_kind": self.feature_kind.value,
            "algorithm": self.algorithm,
            "n": self.n,
            "threshold": self.threshold,
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "auc": self.auc,
            "confusion": {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp},
            "predictions": [
                {"user_id": p.user_id, "label": p.label, "predicted": p.predicted, "margin": p.margin}
                for p in self.predictions
            ],
            "fold_model_hashes": list(self.fold_model_hashes),
        }


def _median_anchor(P: np.ndarray, anchor: str) -> np.ndarray:
    if anchor == "midpoint":
        return scale_midpoint_personality().as_array()
    return np.median(P, axis=0)


def loo_evaluate(
    cohort,
    kind: FeatureSetKind,
    C: CorrelationMatrix | None = None,
    hyper: TrainingHyper = TrainingHyper(),
    median_anchor: str = "sample",
) -> EvaluationReport:
    """Leave-one-sample-out run over a cohort of user records.

    Labels are fixed once by a median split of the full cohort's ratings.
    Everything else is refit per fold: the median anchor for congruence
    features, the standardization, and the model, so the held-out sample
    never leaks into its own fold.
    """
    if len(cohort) < 3:
        raise InvalidConfig("leave-one-out needs at least three users")
    labels, threshold = binarize_swb([u.swb for u in cohort])
    P = np.array([u.personality.as_tuple() for u in cohort], dtype=float)
    D = np.array([u.dist.proportions for u in cohort], dtype=float)
    Cm = C.as_array() if C is not None else None
    y = np.asarray(labels, dtype=int)

    n = len(cohort)
    preds = np.zeros(n, dtype=int)
    margins = np.zeros(n, dtype=float)
    fold_hashes: list[str] = []
    for j in range(n):
        train_mask = np.ones(n, dtype=bool)
        train_mask[j] = False
        p_med = _median_anchor(P[train_mask], median_anchor)
        X = features_matrix(P, D, kind, Cm, p_med)
        if hyper.algorithm == "nb":
            model = train_gaussian_nb(X[train_mask], y[train_mask])
        else:
            model = train_linear_svm(X[train_mask], y[train_mask], hyper)
        fold_hashes.append(hash_json(model.to_dict()))
        preds[j], margins[j] = predict(model, X[j])

    tn = int(((preds == LOW) & (y == LOW)).sum())
    fp = int(((preds == HIGH) & (y == LOW)).sum())
    fn = int(((preds == LOW) & (y == HIGH)).sum())
    tp = int(((preds == HIGH) & (y == HIGH)).sum())
    return EvaluationReport(
        feature_kind=kind,
        algorithm=hyper.algorithm,
        n=n,
        threshold=threshold,
        accuracy=(tn + tp) / n,
        kappa=cohen_kappa(tn, fp, fn, tp),
        auc=auc_rank(margins.tolist(), y.tolist()),
        tn=tn,
        fp=fp,
        fn=fn,
        tp=tp,
        predictions=tuple(
            SamplePrediction(cohort[i].user_id, int(y[i]), int(preds[i]), float(margins[i]))
            for i in range(n)
        ),
        fold_model_hashes=tuple(fold_hashes),
    )
