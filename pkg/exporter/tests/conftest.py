"""Local deterministic encoder pair for offline tests.

The published checkpoints need network access, so tests build a tiny
768-dimensional dual encoder from a fixed seed and give it a short
contrastive warm-up on synthetic token-overlap pairs. Freshly
initialized transformers pool every input into almost the same vector
(the ranking signal drowns in a constant component), so the warm-up is
what makes the smoke-ranking assertions meaningful. Determinism comes
from fixed seeds; the exporter treats the saved directories like any
other local checkpoint (`--model <path>`).
"""

import math

import numpy as np
import pytest
import torch
from transformers import BertTokenizer, DPRConfig, DPRContextEncoder, DPRQuestionEncoder

FIXTURE_WORDS = [
    "the", "a", "of", "in", "is", "are", "what", "which", "how", "does",
    "sky", "blue", "light", "scatter", "air", "cats", "sleep", "hours",
    "day", "heart", "pumps", "blood", "body", "water", "boils", "celsius",
    "degrees", "sun", "star", "nearest", "earth", "planets", "orbit",
    "zebra", "quartz", "random", "unrelated", "filler", "words", "noise",
    "granite", "violin", "nebula", "harbor", "cactus",
]

HIDDEN_SIZE = 768
WARMUP_STEPS = 60
WARMUP_BATCH = 16


def _warm_up(ctx, qenc, tokenizer):
    """In-batch contrastive steps: questions quote 3 words of their passage."""
    rng = np.random.default_rng(7)
    optimizer = torch.optim.Adam(
        list(ctx.parameters()) + list(qenc.parameters()), lr=2e-4
    )
    for _ in range(WARMUP_STEPS):
        questions, passages = [], []
        for _ in range(WARMUP_BATCH):
            words = rng.choice(FIXTURE_WORDS, size=6, replace=False)
            passages.append(" ".join(words))
            questions.append(" ".join(rng.choice(words, size=3, replace=False)))
        q_batch = tokenizer(questions, padding=True, return_tensors="pt")
        p_batch = tokenizer(passages, padding=True, return_tensors="pt")
        sims = (
            qenc(**q_batch).pooler_output
            @ ctx(**p_batch).pooler_output.T
        ) / math.sqrt(HIDDEN_SIZE)
        loss = torch.nn.functional.cross_entropy(sims, torch.arange(WARMUP_BATCH))
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()


@pytest.fixture(scope="session")
def tiny_encoder_pair(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny-dpr")
    vocab_path = root / "vocab.txt"
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + FIXTURE_WORDS
    vocab_path.write_text("\n".join(vocab))
    tokenizer = BertTokenizer(str(vocab_path), do_lower_case=True)
    config = DPRConfig(
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=256,
        vocab_size=len(vocab),
        max_position_embeddings=64,
        projection_dim=0,
    )
    torch.manual_seed(1234)
    ctx = DPRContextEncoder(config)
    torch.manual_seed(1234)
    qenc = DPRQuestionEncoder(config)
    _warm_up(ctx, qenc, tokenizer)
    ctx.eval()
    qenc.eval()

    ctx_dir, question_dir = root / "ctx", root / "question"
    ctx.save_pretrained(ctx_dir)
    tokenizer.save_pretrained(ctx_dir)
    qenc.save_pretrained(question_dir)
    tokenizer.save_pretrained(question_dir)
    return str(ctx_dir), str(question_dir)
