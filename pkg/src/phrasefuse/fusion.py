"""Winner-take-all fusion over retrieval models at different granularities.

Each active model predicts independently; the fused answer is the
prediction of the model with the highest calibrated confidence. Fusion
never mixes scores across models: temperatures make confidences
comparable, and each model's own prediction is untouched.

The canonical member order (granularities 1, 3, 5, then whole-passage)
breaks all ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import ConfidenceInput, confidence
from .errors import InputError, InvariantError
from .retrieval import DEFAULT_TOP_K, RetrievalModel, predict

CANONICAL_GRANULARITIES = (1, 3, 5, 0)


@dataclass
class ModelSet:
    members: list[RetrievalModel]  # canonical order
    active: list[RetrievalModel]  # subset used for fusion, canonical order

    @classmethod
    def of(cls, members: list[RetrievalModel]) -> "ModelSet":
        if not members:
            raise InputError("model set needs at least one member")
        return cls(members=list(members), active=list(members))


@dataclass
class FusedPrediction:
    query_id: str
    chosen_granularity: int
    passage_id: str
    confidence: float
    per_model: list[tuple[int, str, float]]  # (granularity, passage_id, confidence)


def rank_models(
    models: ModelSet,
    dev_queries,
    batches: dict,
    query_store,
    k: int = DEFAULT_TOP_K,
    a_k_source: str = "phrase",
    top_n: int = 3,
) -> ModelSet:
    """Select the `top_n` members by top-1 accuracy on the dev split.

    Ties break toward the canonical member order. With fewer than `top_n`
    members, all of them stay active.
    """
    if len(models.members) <= top_n:
        return ModelSet(members=models.members, active=list(models.members))
    hits = [0] * len(models.members)
    for query in dev_queries:
        batch = batches[query.id]
        qvec = query_store.row(query.id)
        candidates = batch.candidate_ids()
        for i, model in enumerate(models.members):
            pred = predict(model, qvec, candidates, k=k, a_k_source=a_k_source)
            hits[i] += pred.passage_id == batch.positive
    order = sorted(range(len(models.members)), key=lambda i: (-hits[i], i))
    chosen = sorted(order[:top_n])
    return ModelSet(members=models.members, active=[models.members[i] for i in chosen])


def muf_predict(
    models: ModelSet,
    query_vec: np.ndarray,
    candidate_ids: list[str],
    k: int = DEFAULT_TOP_K,
    a_k_source: str = "phrase",
    query_id: str = "",
    strict: bool = True,
) -> FusedPrediction:
    """Fuse the active models' predictions by calibrated confidence.

    In strict mode every active model must carry a calibrated temperature;
    otherwise an unset temperature falls back to 1.0.
    """
    if not candidate_ids:
        raise InputError("empty candidate list")
    if not models.active:
        raise InvariantError("no active models to fuse")
    per_model: list[tuple[int, str, float]] = []
    chosen = None
    chosen_conf = -np.inf
    for model in models.active:
        if strict and model.temperature is None:
            raise InvariantError(
                f"model {model.label()} has no calibrated temperature"
            )
        pred = predict(model, query_vec, candidate_ids, k=k, a_k_source=a_k_source)
        conf = confidence(
            ConfidenceInput(pred.score, pred.a_k, model.effective_temperature)
        )
        per_model.append((model.granularity, pred.passage_id, conf))
        if conf > chosen_conf:
            chosen, chosen_conf = (model.granularity, pred.passage_id), conf
    return FusedPrediction(
        query_id=query_id,
        chosen_granularity=chosen[0],
        passage_id=chosen[1],
        confidence=chosen_conf,
        per_model=per_model,
    )
