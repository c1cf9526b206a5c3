"""Versioned trained-model document.

The artifact is a single JSON file carrying everything inference needs:
the decision model, the feature family it was trained on, the median
personality anchor, the rating threshold of the median split, content
hashes of the taxonomy and correlation table it assumes, and per-category
activity statistics of the training cohort (used by the recommender to
pick varied activities and to fill in activity mass for cold users).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import (
    FeatureSetKind,
    GaussianNBModel,
    LinearModel,
    TrainingHyper,
    binarize_swb,
    features_matrix,
    model_from_dict,
    train_gaussian_nb,
    train_linear_svm,
)
from .core import CorrelationMatrix, PersonalityVector, compute_median_personality, scale_midpoint_personality
from .data import Taxonomy, UserRecord, correlation_hash
from .errors import ModelNotFound, SchemaMismatch
from .serialize import dump_json, hash_json, load_json

ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class TrainedArtifact:
    feature_kind: FeatureSetKind
    model: LinearModel | GaussianNBModel
    p_median: PersonalityVector
    swb_threshold: float
    taxonomy_hash: str
    corr_hash: str
    activity_mean: tuple[float, ...]
    activity_std: tuple[float, ...]
    hyper: TrainingHyper
    n_users: int

    def to_dict(self) -> dict:
        return {
            "format_version": ARTIFACT_VERSION,
            "feature_kind": self.feature_kind.value,
            "model": self.model.to_dict(),
            "p_median": list(self.p_median.as_tuple()),
            "swb_threshold": self.swb_threshold,
            "taxonomy_hash": self.taxonomy_hash,
            "correlation_hash": self.corr_hash,
            "activity_stats": {"mean": list(self.activity_mean), "std": list(self.activity_std)},
            "hyper": self.hyper.to_dict(),
            "seed": self.hyper.seed,
            "n_users": self.n_users,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedArtifact":
        if d.get("format_version") != ARTIFACT_VERSION:
            raise SchemaMismatch(f"unsupported model format_version {d.get('format_version')!r}")
        try:
            return cls(
                feature_kind=FeatureSetKind(d["feature_kind"]),
                model=model_from_dict(d["model"]),
                p_median=PersonalityVector.from_iterable(d["p_median"]),
                swb_threshold=float(d["swb_threshold"]),
                taxonomy_hash=str(d["taxonomy_hash"]),
                corr_hash=str(d["correlation_hash"]),
                activity_mean=tuple(float(v) for v in d["activity_stats"]["mean"]),
                activity_std=tuple(float(v) for v in d["activity_stats"]["std"]),
                hyper=TrainingHyper.from_dict(d["hyper"]),
                n_users=int(d["n_users"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaMismatch(f"malformed model artifact: {exc}") from exc

    def model_hash(self) -> str:
        return hash_json(self.to_dict())

    def save(self, path) -> None:
        dump_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "TrainedArtifact":
        p = Path(path)
        if not p.exists():
            raise ModelNotFound(f"no model file at {p}")
        return cls.from_dict(load_json(p))

    def check_consistent(self, taxonomy: Taxonomy, C: CorrelationMatrix) -> None:
        if self.taxonomy_hash != taxonomy.content_hash():
            raise SchemaMismatch("model was trained against a different taxonomy")
        if self.corr_hash != correlation_hash(C):
            raise SchemaMismatch("model was trained against a different correlation table")


def train_artifact(
    cohort: list[UserRecord],
    kind: FeatureSetKind,
    C: CorrelationMatrix,
    taxonomy: Taxonomy,
    hyper: TrainingHyper = TrainingHyper(),
    median_anchor: str = "sample",
) -> TrainedArtifact:
    """Fit a model on the full cohort and package it for inference."""
    labels, threshold = binarize_swb([u.swb for u in cohort])
    P = np.array([u.personality.as_tuple() for u in cohort], dtype=float)
    D = np.array([u.dist.proportions for u in cohort], dtype=float)
    if median_anchor == "midpoint":
        p_median = scale_midpoint_personality()
    else:
        p_median = compute_median_personality([u.personality for u in cohort])
    X = features_matrix(P, D, kind, C.as_array(), p_median.as_array())
    if hyper.algorithm == "nb":
        model = train_gaussian_nb(X, labels)
    else:
        model = train_linear_svm(X, labels, hyper)
    return TrainedArtifact(
        feature_kind=kind,
        model=model,
        p_median=p_median,
        swb_threshold=threshold,
        taxonomy_hash=taxonomy.content_hash(),
        corr_hash=correlation_hash(C),
        activity_mean=tuple(float(v) for v in D.mean(axis=0)),
        activity_std=tuple(float(v) for v in (D.std(axis=0, ddof=1) if len(cohort) > 1 else np.zeros(taxonomy.n))),
        hyper=hyper,
        n_users=len(cohort),
    )
