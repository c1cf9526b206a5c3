"""HTTP/JSON facade over a loaded model.

The service is a pure function of (loaded artifacts, request body): no
session state, no request-order effects.  Responses are emitted through the
same canonical serializer the library and CLI use, so identical inputs
produce identical bytes everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .artifact import TrainedArtifact
from .classifier import HIGH, build_features, predict
from .core import (
    REPORTED_MAX,
    REPORTED_MIN,
    ActivityDistribution,
    CorrelationMatrix,
    PersonalityVector,
    congruence_delta,
    exhibited_personality,
)
from .data import Taxonomy, load_correlation, load_taxonomy
from .errors import InvalidConfig, WrongFeatureKind
from .recommender import (
    GRID_CAP_DEFAULT,
    RecommenderConfig,
    build_fill,
    grid_count,
    range_report,
    select_by_spread,
    simulate_ranges,
)
from .serialize import canonical_json_bytes

SIMPLEX_REQUEST_ATOL = 1e-6


class _FieldErrors(Exception):
    """Collected per-field problems; rendered as a 400 response."""

    def __init__(self, fields: list[dict]):
        super().__init__("invalid request body")
        self.fields = fields


class _SimplexViolation(Exception):
    pass


class _NonIntegralGrid(Exception):
    pass


class _GridTooLarge(Exception):
    def __init__(self, total: int, cap: int):
        super().__init__(f"grid of {total} points exceeds the cap of {cap}")
        self.total = total
        self.cap = cap


@dataclass(frozen=True)
class ServiceState:
    """Immutable artifacts the service answers from."""

    artifact: TrainedArtifact
    taxonomy: Taxonomy
    correlation: CorrelationMatrix
    model_hash: str
    default_config: RecommenderConfig
    default_m: int

    @property
    def n(self) -> int:
        return self.taxonomy.n


def build_state(
    model_path,
    taxonomy_path,
    correlation_path,
    config: RecommenderConfig = RecommenderConfig(),
) -> ServiceState:
    """Load and cross-check the artifacts the service needs."""
    artifact = TrainedArtifact.load(model_path)
    taxonomy = load_taxonomy(taxonomy_path)
    C = load_correlation(correlation_path, taxonomy)
    artifact.check_consistent(taxonomy, C)
    varied_default, _ = select_by_spread(
        artifact.activity_std, m=config.m, variance_threshold=config.variance_threshold
    )
    return ServiceState(
        artifact=artifact,
        taxonomy=taxonomy,
        correlation=C,
        model_hash=artifact.model_hash(),
        default_config=config,
        default_m=len(varied_default),
    )


# ---------------------------------------------------------------------------
# Body validation and payload builders (shared with parity tests)
# ---------------------------------------------------------------------------


def _parse_personality(body: dict, errors: list[dict]) -> PersonalityVector | None:
    raw = body.get("personality")
    if not isinstance(raw, (list, tuple)) or len(raw) != 5:
        errors.append({"field": "personality", "message": "must be a list of 5 trait scores"})
        return None
    vals = []
    for i, v in enumerate(raw):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(float(v)):
            errors.append({"field": f"personality[{i}]", "message": "must be a finite number"})
            return None
        vals.append(float(v))
    for i, v in enumerate(vals):
        if not (REPORTED_MIN <= v <= REPORTED_MAX):
            errors.append(
                {
                    "field": f"personality[{i}]",
                    "message": f"must lie in [{REPORTED_MIN:g}, {REPORTED_MAX:g}]",
                }
            )
    if errors:
        return None
    return PersonalityVector.from_iterable(vals)


def _parse_distribution(body: dict, n: int, errors: list[dict], required: bool):
    raw = body.get("activity_distribution")
    if raw is None:
        if required:
            errors.append({"field": "activity_distribution", "message": "is required"})
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != n:
        errors.append({"field": "activity_distribution", "message": f"must be a list of {n} proportions"})
        return None
    vals = []
    for i, v in enumerate(raw):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(float(v)):
            errors.append({"field": f"activity_distribution[{i}]", "message": "must be a finite number"})
            return None
        vals.append(float(v))
    if any(v < 0 for v in vals) or abs(math.fsum(vals) - 1.0) > SIMPLEX_REQUEST_ATOL:
        raise _SimplexViolation()
    return vals


def normalize_distribution(vals) -> ActivityDistribution:
    """Exact renormalization applied to every accepted request distribution."""
    total = math.fsum(vals)
    return ActivityDistribution(tuple(v / total for v in vals))


def classify_payload(state: ServiceState, personality: PersonalityVector, dist_vals) -> dict:
    """The classification result for one request; also the parity reference."""
    dist = normalize_distribution(dist_vals)
    art = state.artifact
    p_ex = exhibited_personality(dist, state.correlation, art.p_median)
    delta = congruence_delta(personality, p_ex)
    x = build_features(personality, dist, art.feature_kind, state.correlation, art.p_median)
    label, margin = predict(art.model, x)
    return {
        "label": "high" if label == HIGH else "low",
        "margin": margin,
        "delta": list(delta.values),
        "exhibited": list(p_ex.as_tuple()),
    }


def recommend_payload(
    state: ServiceState,
    personality: PersonalityVector,
    dist_vals=None,
    step: float | None = None,
    lam: float | None = None,
    m: int | None = None,
) -> dict:
    """The range report for one request; also the parity reference.

    Varied activities come from the training cohort's per-category spread
    stored in the artifact; a missing distribution falls back to the
    cohort-mean fill.
    """
    base = state.default_config
    cfg = RecommenderConfig(
        step=base.step if step is None else float(step),
        lam=base.lam if lam is None else float(lam),
        m=m if m is not None else base.m,
        variance_threshold=base.variance_threshold,
        grid_cap=base.grid_cap,
    )
    raw_units = (1.0 - cfg.lam) / cfg.step
    if abs(raw_units - round(raw_units)) > 1e-9 or round(raw_units) < 1:
        raise _NonIntegralGrid()
    varied, fixed = select_by_spread(
        state.artifact.activity_std, m=cfg.m, variance_threshold=cfg.variance_threshold
    )
    if not fixed:
        cfg = RecommenderConfig(cfg.step, 0.0, cfg.m, cfg.variance_threshold, cfg.grid_cap)
    total = grid_count(len(varied), cfg.units())
    if total > cfg.grid_cap:
        raise _GridTooLarge(total, cfg.grid_cap)
    user_dist = None
    if dist_vals is not None:
        user_dist = normalize_distribution(dist_vals).proportions
    fill = build_fill(user_dist, fixed, cfg.lam, state.artifact.activity_mean)
    result = simulate_ranges(
        personality,
        fill,
        varied,
        cfg,
        state.artifact.model,
        state.correlation,
        state.artifact.p_median,
        feature_kind=state.artifact.feature_kind,
    )
    return range_report(result, state.taxonomy, state.model_hash)


def model_payload(state: ServiceState) -> dict:
    art = state.artifact
    cfg = state.default_config
    return {
        "feature_kind": art.feature_kind.value,
        "algorithm": art.hyper.algorithm,
        "hashes": {
            "model": state.model_hash,
            "taxonomy": art.taxonomy_hash,
            "correlation": art.corr_hash,
        },
        "p_median": list(art.p_median.as_tuple()),
        "swb_threshold": art.swb_threshold,
        "taxonomy_categories": [{"id": c.id, "name": c.name} for c in state.taxonomy.categories],
        "config": {
            "step": cfg.step,
            "lambda": cfg.lam,
            "m": state.default_m,
            "variance_threshold": cfg.variance_threshold,
            "grid_cap": cfg.grid_cap,
        },
        "n_users": art.n_users,
    }


# ---------------------------------------------------------------------------
# App wiring
# ---------------------------------------------------------------------------


def _json_response(payload: dict, status: int = 200) -> Response:
    return Response(content=canonical_json_bytes(payload), status_code=status, media_type="application/json")


def create_app(state: ServiceState | None = None, cors_origins: tuple[str, ...] = ("*",)) -> FastAPI:
    app = FastAPI(title="congrec", docs_url=None, redoc_url=None)
    app.state.congrec = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    def current_state() -> ServiceState | None:
        return app.state.congrec

    async def read_body(request: Request) -> dict | Response:
        try:
            body = await request.json()
        except Exception:
            return _json_response({"error": "validation", "fields": [{"field": "", "message": "body must be JSON"}]}, 400)
        if not isinstance(body, dict):
            return _json_response({"error": "validation", "fields": [{"field": "", "message": "body must be a JSON object"}]}, 400)
        return body

    @app.get("/healthz")
    def healthz():
        return _json_response({"status": "ok", "model_loaded": current_state() is not None})

    @app.get("/v1/model")
    def model_info():
        st = current_state()
        if st is None:
            return _json_response({"error": "not_loaded", "message": "model not loaded yet"}, 503)
        return _json_response(model_payload(st))

    @app.post("/v1/classify")
    async def classify(request: Request):
        st = current_state()
        if st is None:
            return _json_response({"error": "not_loaded", "message": "model not loaded yet"}, 503)
        body = await read_body(request)
        if isinstance(body, Response):
            return body
        errors: list[dict] = []
        try:
            personality = _parse_personality(body, errors)
            dist = _parse_distribution(body, st.n, errors, required=True)
        except _SimplexViolation:
            return _json_response(
                {"error": "simplex_violation", "message": "activity_distribution must be nonnegative and sum to 1"},
                422,
            )
        if errors or personality is None or dist is None:
            return _json_response({"error": "validation", "fields": errors}, 400)
        return _json_response(classify_payload(st, personality, dist))

    @app.post("/v1/recommend")
    async def recommend(request: Request):
        st = current_state()
        if st is None:
            return _json_response({"error": "not_loaded", "message": "model not loaded yet"}, 503)
        body = await read_body(request)
        if isinstance(body, Response):
            return body
        errors: list[dict] = []
        try:
            personality = _parse_personality(body, errors)
            dist = _parse_distribution(body, st.n, errors, required=False)
        except _SimplexViolation:
            return _json_response(
                {"error": "simplex_violation", "message": "activity_distribution must be nonnegative and sum to 1"},
                422,
            )
        step = body.get("step")
        lam = body.get("lambda")
        m = body.get("m")
        for name, val, lo, hi in (("step", step, 0.0, 1.0), ("lambda", lam, 0.0, 1.0)):
            if val is not None:
                if not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(float(val)):
                    errors.append({"field": name, "message": "must be a finite number"})
                elif name == "step" and not (0.0 < float(val) <= 1.0):
                    errors.append({"field": name, "message": "must be in (0, 1]"})
                elif name == "lambda" and not (0.0 <= float(val) < 1.0):
                    errors.append({"field": name, "message": "must be in [0, 1)"})
        if m is not None and (not isinstance(m, int) or isinstance(m, bool) or not (1 <= m <= st.n)):
            errors.append({"field": "m", "message": f"must be an integer in [1, {st.n}]"})
        if errors or personality is None:
            return _json_response({"error": "validation", "fields": errors}, 400)
        try:
            payload = recommend_payload(st, personality, dist, step, lam, m)
        except _NonIntegralGrid:
            return _json_response(
                {"error": "non_integral_grid", "message": "(1 - lambda)/step must be a positive integer"},
                409,
            )
        except _GridTooLarge as exc:
            return _json_response({"error": "grid_too_large", "message": str(exc)}, 413)
        except (InvalidConfig, WrongFeatureKind) as exc:
            return _json_response({"error": exc.category, "message": exc.message}, 400)
        return _json_response(payload)

    return app


def load_app() -> FastAPI:
    """App factory for `uvicorn congrec.service:load_app`; reads env vars."""
    import os

    model_path = os.environ.get("CONGREC_MODEL_PATH")
    data_dir = os.environ.get("CONGREC_DATA_DIR")
    if not model_path or not data_dir:
        return create_app(None)
    d = Path(data_dir)
    state = build_state(model_path, d / "taxonomy.json", d / "correlation.csv")
    return create_app(state)
