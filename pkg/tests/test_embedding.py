import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phrasefuse import embedding
from phrasefuse.embedding import (
    EmbeddingStore,
    read_store,
    score_normalized,
    write_store,
)
from phrasefuse.errors import InputError, InvariantError

from conftest import oracle_cosine, oracle_embed

# Frozen from the scalar oracle (dim=64, seed=42), computed before the
# vectorized implementation existed.
COS_SAT_RAN = 0.6247114460222466
COS_SAT_QQQ = -0.11644737649941195


def store_of(ids, rows, dim=None):
    rows = np.asarray(rows, dtype=np.float32)
    dim = dim if dim is not None else rows.shape[1]
    return EmbeddingStore(dim, list(ids), rows)


class TestPhemFormat:
    def test_header_and_single_record_layout(self, tmp_path):
        path = tmp_path / "one.phem"
        write_store(store_of(["a"], [[1.0, 0.0]]), path)
        data = path.read_bytes()
        assert data[:4] == b"PHEM"
        version, flags, dim, count = struct.unpack_from("<HHIQ", data, 4)
        assert (version, flags, dim, count) == (1, 0, 2, 1)
        assert len(data) == 20 + 2 + 1 + 8  # header, id_len, id, 2 floats

    def test_empty_store(self, tmp_path):
        path = tmp_path / "empty.phem"
        write_store(EmbeddingStore(3, [], np.empty((0, 3), dtype=np.float32)), path)
        loaded = read_store(path)
        assert len(loaded) == 0
        assert loaded.dim == 3

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        rows = rng.standard_normal((5, 8)).astype(np.float32)
        store = store_of([f"id{i}" for i in range(5)], rows)
        path = tmp_path / "rt.phem"
        write_store(store, path)
        loaded = read_store(path)
        assert loaded.ids == store.ids
        assert loaded.dim == store.dim
        assert loaded.vectors.tobytes() == store.vectors.tobytes()

    def test_write_is_byte_deterministic(self, tmp_path):
        rng = np.random.default_rng(3)
        store = store_of(["x", "y"], rng.standard_normal((2, 4)).astype(np.float32))
        p1, p2 = tmp_path / "a.phem", tmp_path / "b.phem"
        write_store(store, p1)
        write_store(store, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.phem"
        write_store(store_of(["a"], [[1.0]]), path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(InputError, match="magic"):
            read_store(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.phem"
        write_store(store_of(["a"], [[1.0]]), path)
        data = bytearray(path.read_bytes())
        struct.pack_into("<H", data, 4, 9)
        path.write_bytes(bytes(data))
        with pytest.raises(InputError, match="version"):
            read_store(path)

    def test_truncation_names_offset(self, tmp_path):
        path = tmp_path / "trunc.phem"
        write_store(store_of(["ab", "cd"], [[1.0, 2.0], [3.0, 4.0]]), path)
        whole = path.read_bytes()
        path.write_bytes(whole[:-5])
        with pytest.raises(InputError, match="truncated.*byte"):
            read_store(path)

    def test_duplicate_id_rejected(self, tmp_path):
        # hand-build a file with a repeated id
        path = tmp_path / "dup.phem"
        rec = struct.pack("<H", 1) + b"a" + struct.pack("<f", 1.0)
        path.write_bytes(struct.pack("<4sHHIQ", b"PHEM", 1, 0, 1, 2) + rec + rec)
        with pytest.raises(InvariantError, match="duplicate"):
            read_store(path)

    def test_zero_dim_rejected(self, tmp_path):
        path = tmp_path / "d0.phem"
        path.write_bytes(struct.pack("<4sHHIQ", b"PHEM", 1, 0, 0, 0))
        with pytest.raises(InputError, match="dimension"):
            read_store(path)


class TestStoreInvariants:
    def test_all_zero_row_rejected(self):
        with pytest.raises(InvariantError, match="all-zero"):
            store_of(["a", "b"], [[1.0, 0.0], [0.0, 0.0]])

    def test_duplicate_ids_rejected(self):
        with pytest.raises(InvariantError, match="duplicate"):
            store_of(["a", "a"], [[1.0], [2.0]])

    def test_row_lookup(self):
        store = store_of(["a", "b"], [[1.0, 2.0], [3.0, 4.0]])
        assert store.row("b").tolist() == [3.0, 4.0]
        with pytest.raises(InputError):
            store.row("zz")


class TestHashEmbedder:
    def test_deterministic(self):
        a = embedding.lexical_embed("some words here", 32, 9)
        b = embedding.lexical_embed("some words here", 32, 9)
        assert a.tobytes() == b.tobytes()

    def test_unit_norm(self):
        for text in ("one", "a few more tokens", "x " * 50):
            vec = embedding.lexical_embed(text, 48, 1)
            assert abs(float(np.linalg.norm(vec.astype(np.float64))) - 1.0) < 1e-6

    def test_matches_scalar_oracle(self):
        vec = embedding.lexical_embed("the cat sat", 64, 42)
        expect = oracle_embed("the cat sat", 64, 42)
        np.testing.assert_allclose(vec.astype(np.float64), expect, atol=1e-7)

    def test_lexical_overlap_fixture(self):
        a = embedding.lexical_embed("the cat sat", 64, 42)
        b = embedding.lexical_embed("the cat ran", 64, 42)
        c = embedding.lexical_embed("qqq zzz www", 64, 42)
        cos_ab = oracle_cosine(a.tolist(), b.tolist())
        cos_ac = oracle_cosine(a.tolist(), c.tolist())
        assert cos_ab == pytest.approx(COS_SAT_RAN, abs=1e-6)
        assert cos_ac == pytest.approx(COS_SAT_QQQ, abs=1e-6)
        assert cos_ab > cos_ac

    def test_token_free_text_rejected(self):
        with pytest.raises(InputError, match="no tokens"):
            embedding.lexical_embed("  ??? ", 16, 0)

    def test_case_insensitive(self):
        a = embedding.lexical_embed("Hello World", 16, 5)
        b = embedding.lexical_embed("hello world", 16, 5)
        assert a.tobytes() == b.tobytes()

    def test_published_alias(self):
        assert embedding.test_embed is embedding.lexical_embed


class TestScoreNormalized:
    def test_orthonormal_rows(self):
        store = store_of(["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
        pairs = score_normalized(np.array([1.0, 0.0]), store)
        assert [(p.target_id, p.score) for p in pairs] == [("a", 1.0), ("b", 0.0)]

    def test_row_norm_divides(self):
        store = store_of(["c"], [[2.0, 0.0]])
        (pair,) = score_normalized(np.array([1.0, 0.0]), store)
        assert pair.score == pytest.approx(1.0, abs=1e-12)

    def test_unit_self_similarity(self):
        store = store_of(["d"], [[0.6, 0.8]])
        (pair,) = score_normalized(np.array([0.6, 0.8]), store)
        assert pair.score == pytest.approx(1.0, rel=1e-6)

    def test_dimension_mismatch(self):
        store = store_of(["a"], [[1.0, 0.0]])
        with pytest.raises(InputError, match="dimension"):
            score_normalized(np.array([1.0, 0.0, 0.0]), store)

    def test_scale_invariance_of_rows(self):
        rng = np.random.default_rng(11)
        rows = rng.standard_normal((6, 5)).astype(np.float32)
        query = rng.standard_normal(5)
        base = [p.score for p in score_normalized(query, store_of(list("abcdef"), rows))]
        for lam in (0.25, 3.0, 117.0):
            scaled = [
                p.score
                for p in score_normalized(query, store_of(list("abcdef"), rows * lam))
            ]
            np.testing.assert_allclose(scaled, base, rtol=1e-6)

    def test_agrees_with_scalar_loop(self):
        rng = np.random.default_rng(23)
        rows = rng.standard_normal((10, 7)).astype(np.float32)
        query = rng.standard_normal(7)
        store = store_of([f"r{i}" for i in range(10)], rows)
        pairs = score_normalized(query, store)
        for i, pair in enumerate(pairs):
            num = sum(float(rows[i][j]) * float(query[j]) for j in range(7))
            den = sum(float(rows[i][j]) ** 2 for j in range(7)) ** 0.5
            assert pair.score == pytest.approx(num / den, rel=1e-5)


class TestRoundTripProperty:
    @given(
        n=st.integers(min_value=0, max_value=6),
        dim=st.integers(min_value=1, max_value=9),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_write_read_identity(self, tmp_path_factory, n, dim, seed):
        rng = np.random.default_rng(seed)
        rows = rng.standard_normal((n, dim)).astype(np.float32)
        if n:
            rows[rows.sum(axis=1) == 0] += 1.0  # avoid the all-zero invariant
        store = EmbeddingStore(dim, [f"id{i}" for i in range(n)], rows)
        path = tmp_path_factory.mktemp("phem") / "s.phem"
        write_store(store, path)
        loaded = read_store(path)
        assert loaded.ids == store.ids
        assert loaded.vectors.tobytes() == store.vectors.tobytes()
