"""Dense vector storage, the PHEM file format, and scoring.

PHEM v1 binary layout, little-endian throughout:

    bytes 0-3   magic b"PHEM"
    bytes 4-5   version  u16 = 1
    bytes 6-7   flags    u16 = 0
    bytes 8-11  dim      u32
    bytes 12-19 count    u64
    then `count` records: id_len u16, id bytes (UTF-8), dim x f32

Scores divide the inner product by the stored row's L2 norm only, never
the query norm: ranking is invariant to rescaling any stored row.

`lexical_embed` is a deterministic hash embedder standing in for a neural
encoder in tests and desk-scale runs: a token's vector components come
from a splitmix64 stream seeded with (seed XOR FNV-1a-64 of the token),
each 64-bit draw mapped to [-1, 1); the text vector is the L2-normalized
mean of its token vectors, so lexical overlap drives similarity.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, InvariantError
from .tokenize import tokenize

MAGIC = b"PHEM"
VERSION = 1
_HEADER = struct.Struct("<4sHHIQ")

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_SM64_GAMMA = 0x9E3779B97F4A7C15


@dataclass
class EmbeddingStore:
    """Id-addressed row-major matrix of float32 vectors."""

    dim: int
    ids: list[str]
    vectors: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvariantError(f"dimension must be >= 1, got {self.dim}")
        self.vectors = np.asarray(self.vectors, dtype=np.float32).reshape(
            len(self.ids), self.dim
        )
        self.index = {pid: i for i, pid in enumerate(self.ids)}
        if len(self.index) != len(self.ids):
            raise InvariantError("embedding store contains duplicate ids")
        if len(self.ids) and not np.all(np.any(self.vectors != 0.0, axis=1)):
            bad = [self.ids[i] for i in np.flatnonzero(~np.any(self.vectors != 0.0, axis=1))]
            raise InvariantError(f"all-zero vectors for ids {bad[:5]}")

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, vec_id: str) -> bool:
        return vec_id in self.index

    def row(self, vec_id: str) -> np.ndarray:
        try:
            return self.vectors[self.index[vec_id]]
        except KeyError:
            raise InputError(f"no embedding for id {vec_id!r}") from None

    def rows(self, vec_ids: list[str]) -> np.ndarray:
        missing = [v for v in vec_ids if v not in self.index]
        if missing:
            raise InputError(f"no embeddings for ids {missing[:5]}")
        return self.vectors[[self.index[v] for v in vec_ids]]


@dataclass(frozen=True)
class ScorePair:
    target_id: str
    score: float


def write_store(store: EmbeddingStore, path: str | Path) -> None:
    """Write `store` in PHEM v1 format; byte-deterministic for a given store."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, 0, store.dim, len(store.ids)))
        for i, vec_id in enumerate(store.ids):
            raw = vec_id.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise InputError(f"id too long for PHEM format: {vec_id[:40]!r}...")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(store.vectors[i].tobytes())


def read_store(path: str | Path) -> EmbeddingStore:
    """Read a PHEM v1 file; vector values are restored bit-exactly."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise InputError(f"{path}: truncated header at byte {len(data)}")
    magic, version, flags, dim, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InputError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise InputError(f"{path}: unsupported version {version}")
    if flags != 0:
        raise InputError(f"{path}: unsupported flags {flags:#x}")
    if dim == 0:
        raise InputError(f"{path}: dimension 0")
    ids: list[str] = []
    rows = np.empty((count, dim), dtype=np.float32)
    offset = _HEADER.size
    vec_bytes = 4 * dim
    for i in range(count):
        if offset + 2 > len(data):
            raise InputError(f"{path}: truncated record at byte {offset}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + vec_bytes > len(data):
            raise InputError(f"{path}: truncated record at byte {offset}")
        ids.append(data[offset : offset + id_len].decode("utf-8"))
        offset += id_len
        rows[i] = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
        offset += vec_bytes
    if offset != len(data):
        raise InputError(f"{path}: {len(data) - offset} trailing bytes")
    return EmbeddingStore(dim, ids, rows)


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(seed: int, n: int) -> np.ndarray:
    """First `n` draws of the splitmix64 stream starting at `seed`."""
    state = (np.uint64(seed) + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_SM64_GAMMA))
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return z


def token_vector(token: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic direction for one token, components in [-1, 1)."""
    token_seed = (seed ^ _fnv1a64(token.encode("utf-8"))) & _MASK64
    draws = _splitmix64(token_seed, dim)
    return draws.astype(np.float64) / 2.0**63 - 1.0


def lexical_embed(text: str, dim: int, seed: int) -> np.ndarray:
    """Unit-norm float32 vector for `text`: normalized mean of token vectors.

    Deterministic across runs and platforms. Raises on token-free text and
    on a zero-norm mean (possible only by astronomically unlikely hash
    cancellation; never silently divides by zero).
    """
    if dim < 1:
        raise InvariantError(f"dimension must be >= 1, got {dim}")
    tokens = tokenize(text)
    if not tokens:
        raise InputError(f"no tokens in text {text[:40]!r}")
    acc = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        acc += token_vector(token, dim, seed)
    acc /= len(tokens)
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        raise InvariantError("zero-norm mean vector; cannot normalize")
    return (acc / norm).astype(np.float32)


# Alias keeping the published operation name; tests import the module, not
# the name, so pytest never collects it.
test_embed = lexical_embed


def embed_texts(items: list[tuple[str, str]], dim: int, seed: int) -> EmbeddingStore:
    """Embed (id, text) pairs with `lexical_embed` into one store."""
    ids = [i for i, _ in items]
    if not items:
        return EmbeddingStore(dim, [], np.empty((0, dim), dtype=np.float32))
    rows = np.stack([lexical_embed(text, dim, seed) for _, text in items])
    return EmbeddingStore(dim, ids, rows)


def inner_products(rows: np.ndarray, query_vec: np.ndarray) -> np.ndarray:
    """Row-wise inner products with per-row pairwise float64 summation.

    np.add.reduce keeps each row's accumulation order a function of the
    vector length alone, so a row scores identically whether it is scored
    alone, in a gathered candidate subset, or in the full store. Phrase
    and whole-passage scoring both route through here, which is what makes
    granularity-0 retrieval bit-identical to plain passage scoring.
    """
    return np.add.reduce(rows * query_vec, axis=1)


def row_norms(rows: np.ndarray) -> np.ndarray:
    return np.sqrt(np.add.reduce(rows * rows, axis=1))


def score_normalized(query_vec: np.ndarray, store: EmbeddingStore) -> list[ScorePair]:
    """Inner product of `query_vec` with each row, divided by the row norm.

    Products are taken on the stored 32-bit values and accumulated in
    64-bit; one ScorePair per id, store order preserved.
    """
    query_vec = np.asarray(query_vec, dtype=np.float64)
    if query_vec.shape != (store.dim,):
        raise InputError(
            f"query dimension {query_vec.shape} does not match store dim {store.dim}"
        )
    rows = store.vectors.astype(np.float64)
    scores = inner_products(rows, query_vec) / row_norms(rows)
    return [ScorePair(pid, float(s)) for pid, s in zip(store.ids, scores)]
