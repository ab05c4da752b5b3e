"""Shared fixtures and independent scalar oracles.

Oracles here deliberately avoid the library's vectorized code paths so
that every numeric assertion has a second, independent derivation.
"""

import math
import re

import numpy as np
import pytest

from phrasefuse.corpus import Corpus, Passage

MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------- oracles
def oracle_tokenize(text):
    return re.findall(r"[^\W_]+", text.lower(), re.UNICODE)


def oracle_fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def oracle_splitmix64(state: int, n: int) -> list:
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        z = z ^ (z >> 31)
        out.append(z)
    return out


def oracle_embed(text: str, dim: int, seed: int) -> list:
    """Pure-Python scalar twin of the hash embedder."""
    tokens = oracle_tokenize(text)
    assert tokens, "oracle_embed needs at least one token"
    acc = [0.0] * dim
    for token in tokens:
        token_seed = (seed ^ oracle_fnv1a64(token.encode("utf-8"))) & MASK64
        for i, draw in enumerate(oracle_splitmix64(token_seed, dim)):
            acc[i] += draw / 2.0**63 - 1.0
    mean = [a / len(tokens) for a in acc]
    norm = math.sqrt(sum(c * c for c in mean))
    return [c / norm for c in mean]


def oracle_cosine(u, v) -> float:
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    return sum(x * y for x, y in zip(u, v)) / (nu * nv)


def oracle_bm25(docs: list, query: str, doc_idx: int, k1=1.2, b=0.75) -> float:
    """Scalar Okapi evaluation straight from the formula."""
    tokenized = [oracle_tokenize(d) for d in docs]
    n_docs = len(docs)
    avgdl = sum(len(d) for d in tokenized) / n_docs
    doc = tokenized[doc_idx]
    score = 0.0
    for term in oracle_tokenize(query):
        tf = doc.count(term)
        if tf == 0:
            continue
        df = sum(1 for d in tokenized if term in d)
        idf = math.log(1 + (n_docs - df + 0.5) / (df + 0.5))
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(doc) / avgdl))
    return score


def oracle_softmax_confidence(scores, temperature) -> float:
    """Plain scalar softmax; relies on float64 exp without shifting."""
    num = math.exp(max(scores) / temperature)
    den = sum(math.exp(s / temperature) for s in scores)
    return num / den


# ---------------------------------------------------------------- fixtures
@pytest.fixture
def two_doc_corpus():
    return Corpus([Passage("d1", "a b"), Passage("d2", "a c")])


def make_corpus(n_passages: int, rng: np.random.Generator, sentences=4, words=5) -> Corpus:
    """Random toy corpus with per-passage vocabularies."""
    passages = []
    for i in range(n_passages):
        parts = []
        for s in range(sentences):
            toks = [f"w{rng.integers(0, 200)}" for _ in range(words)]
            parts.append(" ".join(toks) + ".")
        passages.append(Passage(f"p{i}", " ".join(parts)))
    return Corpus(passages)
