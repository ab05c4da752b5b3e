"""Dense phrase retrieval: a passage scores the max over its phrases.

A retrieval model pairs a phrase index at one granularity with the matching
embedding store (rows keyed `<passage_id>#<ordinal>`). Scoring normalizes
by the phrase vector's norm only; granularity 0 gives one phrase per
passage and therefore reduces exactly to whole-passage retrieval.

Products are taken on the stored 32-bit values, accumulated and compared
in 64-bit. Ties between passages go to the earlier candidate; ties between
phrases of one passage go to the lowest ordinal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingStore, inner_products, row_norms
from .errors import InputError, InvariantError
from .segmenter import PhraseIndex, phrase_key

DEFAULT_TOP_K = 30


@dataclass(frozen=True)
class PassageScore:
    passage_id: str
    score: float
    best_phrase_ordinal: int


@dataclass
class ScoredPrediction:
    """One model's answer for one query."""

    passage_id: str
    score: float  # p_max, the winning phrase score
    a_k: np.ndarray  # top-k scores over the candidate pool, descending
    best_phrase_ordinal: int
    confidence: float | None = None


@dataclass
class RetrievalModel:
    granularity: int
    phrase_index: PhraseIndex
    phrase_embeddings: EmbeddingStore
    temperature: float | None = None  # set by calibration
    _rows: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    _norms: np.ndarray = field(default=None, repr=False)

    @classmethod
    def build(
        cls,
        phrase_index: PhraseIndex,
        phrase_embeddings: EmbeddingStore,
        temperature: float | None = None,
    ) -> "RetrievalModel":
        """Assemble a model, checking every phrase has exactly one row."""
        model = cls(phrase_index.granularity, phrase_index, phrase_embeddings, temperature)
        for pid, phrases in phrase_index.entries.items():
            try:
                rows = [
                    phrase_embeddings.index[phrase_key(pid, p.ordinal)] for p in phrases
                ]
            except KeyError as exc:
                raise InvariantError(f"missing phrase embedding {exc}") from None
            model._rows[pid] = np.asarray(rows, dtype=np.intp)
        model._norms = row_norms(phrase_embeddings.vectors.astype(np.float64))
        return model

    @property
    def effective_temperature(self) -> float:
        return 1.0 if self.temperature is None else self.temperature

    def label(self) -> str:
        return f"M{self.granularity}"


def _phrase_scores(
    model: RetrievalModel, query_vec: np.ndarray, candidate_ids: list[str]
) -> list[np.ndarray]:
    query_vec = np.asarray(query_vec, dtype=np.float64)
    if query_vec.shape != (model.phrase_embeddings.dim,):
        raise InputError(
            f"query dimension {query_vec.shape} does not match "
            f"store dim {model.phrase_embeddings.dim}"
        )
    unknown = [pid for pid in candidate_ids if pid not in model._rows]
    if unknown:
        raise InputError(f"candidates not in phrase index: {unknown[:5]}")
    per_candidate = []
    for pid in candidate_ids:
        rows = model._rows[pid]
        vecs = model.phrase_embeddings.vectors[rows].astype(np.float64)
        per_candidate.append(inner_products(vecs, query_vec) / model._norms[rows])
    return per_candidate


def score_passages(
    model: RetrievalModel, query_vec: np.ndarray, candidate_ids: list[str]
) -> list[PassageScore]:
    """Max normalized inner product over each candidate's phrases."""
    result = []
    for pid, scores in zip(candidate_ids, _phrase_scores(model, query_vec, candidate_ids)):
        best = int(np.argmax(scores))  # argmax returns the lowest index on ties
        result.append(PassageScore(pid, float(scores[best]), best))
    return result


def predict(
    model: RetrievalModel,
    query_vec: np.ndarray,
    candidate_ids: list[str],
    k: int = DEFAULT_TOP_K,
    a_k_source: str = "phrase",
) -> ScoredPrediction:
    """Predict the candidate whose best phrase scores highest.

    `a_k` collects the k highest scores over the whole candidate pool:
    phrase-level scores by default, or per-passage maxima with
    a_k_source="passage". Passage ties resolve to the earlier candidate.
    """
    if not candidate_ids:
        raise InputError("empty candidate list")
    if k < 1:
        raise InvariantError(f"k must be >= 1, got {k}")
    if a_k_source not in ("phrase", "passage"):
        raise InputError(f"unknown a_k_source {a_k_source!r}")
    per_candidate = _phrase_scores(model, query_vec, candidate_ids)

    winner = 0
    winner_ordinal = 0
    winner_score = -np.inf
    maxima = np.empty(len(candidate_ids))
    for i, scores in enumerate(per_candidate):
        best = int(np.argmax(scores))
        maxima[i] = scores[best]
        if scores[best] > winner_score:
            winner, winner_ordinal, winner_score = i, best, float(scores[best])

    pool = np.concatenate(per_candidate) if a_k_source == "phrase" else maxima
    a_k = np.sort(pool)[::-1][:k].copy()
    return ScoredPrediction(
        passage_id=candidate_ids[winner],
        score=winner_score,
        a_k=a_k,
        best_phrase_ordinal=winner_ordinal,
    )
