"""Batch inference over a dual encoder, one PHEM row per input record.

The context tower embeds passages and phrases; the question tower embeds
queries. Export is offline: the retrieval engine only ever reads the
frozen PHEM files. Vectors are written unnormalized (the engine divides
by the row norm when scoring); the embedding is the encoder's pooled
output, 768-dimensional for the published checkpoints.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch
from transformers import AutoTokenizer, DPRContextEncoder, DPRQuestionEncoder

from .phem import write_phem
from .records import RecordError, read_records

logger = logging.getLogger(__name__)

PUBLISHED_MODELS = {
    "context": "facebook/dpr-ctx_encoder-single-nq-base",
    "question": "facebook/dpr-question_encoder-single-nq-base",
}

_ROLE_FOR_KIND = {"passage": "context", "phrase": "context", "query": "question"}
_ENCODER_CLASS = {"context": DPRContextEncoder, "question": DPRQuestionEncoder}


class ExportError(ValueError):
    pass


@dataclass
class ExportJob:
    input_path: str
    role: str  # "context" | "question"
    model: str | None = None  # model id or local path; None = published default
    batch_size: int = 32
    output_path: str = "embeddings.phem"

    def __post_init__(self) -> None:
        if self.role not in _ENCODER_CLASS:
            raise ExportError(f"role must be context or question, got {self.role!r}")
        if self.batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {self.batch_size}")
        if self.model is None:
            self.model = PUBLISHED_MODELS[self.role]


def load_encoder(job: ExportJob):
    try:
        tokenizer = AutoTokenizer.from_pretrained(job.model)
        encoder = _ENCODER_CLASS[job.role].from_pretrained(job.model)
    except Exception as exc:
        raise ExportError(f"cannot load model {job.model!r}: {exc}") from exc
    encoder.eval()
    return tokenizer, encoder


def _max_length(tokenizer, encoder) -> int:
    limit = getattr(encoder.config, "max_position_embeddings", 512)
    model_max = getattr(tokenizer, "model_max_length", limit)
    return min(int(limit), int(model_max))


@torch.no_grad()
def encode_texts(texts: list[str], tokenizer, encoder, batch_size: int) -> np.ndarray:
    """Pooled embeddings, float32, one row per text, input order kept."""
    max_length = _max_length(tokenizer, encoder)
    rows = []
    for start in range(0, len(texts), batch_size):
        chunk = texts[start : start + batch_size]
        lengths = [len(tokenizer.encode(t, truncation=False)) for t in chunk]
        over = [i for i, n in enumerate(lengths) if n > max_length]
        for i in over:
            logger.warning(
                "record %d exceeds the encoder limit (%d > %d tokens); truncating",
                start + i, lengths[i], max_length,
            )
        batch = tokenizer(
            chunk,
            padding=True,
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )
        output = encoder(**batch)
        rows.append(output.pooler_output.to(torch.float32).cpu().numpy())
    if not rows:
        return np.empty((0, encoder.config.hidden_size), dtype=np.float32)
    return np.concatenate(rows, axis=0)


def export_embeddings(job: ExportJob) -> tuple[int, int]:
    """Run the job; returns (count, dim) of the written PHEM file."""
    try:
        kind, items = read_records(job.input_path)
    except RecordError as exc:
        raise ExportError(str(exc)) from None
    expected_role = _ROLE_FOR_KIND[kind]
    if job.role != expected_role:
        raise ExportError(
            f"{kind} records need the {expected_role} encoder, job says {job.role}"
        )
    tokenizer, encoder = load_encoder(job)
    ids = [rec_id for rec_id, _ in items]
    vectors = encode_texts([text for _, text in items], tokenizer, encoder, job.batch_size)
    write_phem(job.output_path, ids, vectors)
    logger.info("wrote %d vectors of dim %d to %s", len(ids), vectors.shape[1], job.output_path)
    return len(ids), int(vectors.shape[1])
