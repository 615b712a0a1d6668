from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coi_rag.providers import CallCache, HashedEmbedder, ProviderError, RemoteEmbedder
from coi_rag.vector_index import VectorIndex, build_index, clamp01, cosine


class TestHashedEmbedder:
    def test_repeated_token_single_coordinate(self):
        v = HashedEmbedder(256).embed(["abc abc"])[0]
        assert np.count_nonzero(v) == 1
        assert v.max() == pytest.approx(1.0)

    def test_deterministic(self):
        emb = HashedEmbedder(256)
        a = emb.embed(["x"])[0]
        b = emb.embed(["x"])[0]
        assert np.array_equal(a, b)

    def test_self_similarity(self):
        emb = HashedEmbedder(256)
        v = emb.embed(["cat dog"])[0]
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_subset_text_similarity(self):
        # "cat dog" vs "cat": one of two unit-mass coordinates shared.
        emb = HashedEmbedder(256)
        a, b = emb.embed(["cat dog", "cat"])
        assert cosine(a, b) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_unit_norm(self):
        for text in ("a", "a b c", "lorem ipsum dolor sit amet"):
            v = HashedEmbedder(64).embed([text])[0]
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            HashedEmbedder(64).embed(["ok", "  "])

    @given(
        st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=6),
        st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=6),
    )
    @settings(max_examples=60, deadline=None)
    def test_disjoint_then_shared_token_raises_similarity(self, xs, ys):
        # Disjoint-vocabulary texts score 0; granting them a shared token
        # can only move the cosine up from there (vectors are nonnegative).
        emb = HashedEmbedder(dims=997)
        a = " ".join("L" + t for t in xs)
        b = " ".join("R" + t for t in ys)
        base = cosine(*emb.embed([a, b]))
        assert base == pytest.approx(0.0, abs=1e-12)
        joined = cosine(*emb.embed([a + " shared", b + " shared"]))
        assert joined >= base


class TestCosine:
    def test_identity(self):
        v = np.array([0.6, 0.8])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal_one_hot(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = rng.normal(size=16)
            b = rng.normal(size=16)
            a /= np.linalg.norm(a)
            b /= np.linalg.norm(b)
            assert abs(cosine(a, b) - cosine(b, a)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine(np.ones(3), np.ones(4))

    def test_clamp(self):
        assert clamp01(-0.2) == 0.0
        assert clamp01(1.0000001) == 1.0
        assert clamp01(0.5) == 0.5


def brute_force_top_k(index: VectorIndex, query: np.ndarray, k: int):
    scored = [(key, float(np.dot(vec, query))) for key, vec in zip(index.keys, index.vectors)]
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return scored[:k]


class TestTopK:
    def make_index(self, n=50, dims=16, seed=0):
        rng = np.random.default_rng(seed)
        vecs = rng.normal(size=(n, dims))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        return VectorIndex([f"k{i:03d}" for i in range(n)], vecs)

    def test_self_retrieval(self):
        index = self.make_index()
        key, score = index.top_k(index.vector("k007"), 1)[0]
        assert key == "k007"
        assert score == pytest.approx(1.0, abs=1e-9)

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            index = self.make_index(n=80, dims=12, seed=trial)
            q = rng.normal(size=12)
            q /= np.linalg.norm(q)
            for k in (1, 5, 10):
                got = index.top_k(q, k)
                want = brute_force_top_k(index, q, k)
                assert [g[0] for g in got] == [w[0] for w in want]
                np.testing.assert_allclose(
                    [g[1] for g in got], [w[1] for w in want], atol=1e-12
                )

    def test_k_exceeds_index(self):
        index = self.make_index(n=7)
        got = index.top_k(index.vectors[0], 99)
        assert len(got) == 7
        scores = [s for _, s in got]
        assert scores == sorted(scores, reverse=True)

    def test_ties_break_by_ascending_key(self):
        v = np.array([1.0, 0.0])
        index = VectorIndex(["b", "a", "c"], np.array([v, v, v]))
        assert [k for k, _ in index.top_k(v, 3)] == ["a", "b", "c"]

    def test_empty_index_error(self):
        index = VectorIndex([], np.zeros((0, 4)))
        with pytest.raises(ValueError):
            index.top_k(np.zeros(4), 1)

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ValueError):
            VectorIndex(["a", "a"], np.eye(2))

    def test_save_load_round_trip(self, tmp_path):
        emb = HashedEmbedder(32)
        index = build_index(
            [("x", "alpha beta", {"n": 1}), ("y", "gamma", {"n": 2})], emb
        )
        path = tmp_path / "index.jsonl"
        index.save(path)
        loaded = VectorIndex.load(path)
        assert loaded.keys == index.keys
        assert loaded.payload("y") == {"n": 2}
        np.testing.assert_allclose(loaded.vectors, index.vectors)


class TestRemoteEmbedder:
    def make_transport(self, dims=4, fail_times=0):
        calls = {"n": 0, "failures_left": fail_times}

        def transport(url, body, headers):
            calls["n"] += 1
            if calls["failures_left"] > 0:
                calls["failures_left"] -= 1
                raise ConnectionError("boom")
            text = body["input"][0]
            vec = [float(len(text)), 1.0, 0.0, 0.0][:dims]
            return {"data": [{"embedding": vec, "index": 0}]}

        return transport, calls

    def test_orders_and_normalizes(self):
        transport, calls = self.make_transport()
        emb = RemoteEmbedder("m", transport=transport, backoff=0.0)
        out = emb.embed(["aa", "bbbb"])
        assert out.shape == (2, 4)
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), [1.0, 1.0])
        assert out[1][0] > out[0][0] * 0.9  # order preserved
        assert calls["n"] == 2

    def test_retries_then_succeeds(self):
        transport, calls = self.make_transport(fail_times=2)
        emb = RemoteEmbedder("m", transport=transport, backoff=0.0)
        emb.embed(["hello"])
        assert calls["n"] == 3

    def test_provider_error_carries_attempts(self):
        transport, _ = self.make_transport(fail_times=99)
        emb = RemoteEmbedder("m", transport=transport, retries=3, backoff=0.0)
        with pytest.raises(ProviderError) as exc:
            emb.embed(["hello"])
        assert exc.value.attempts == 3

    def test_cache_short_circuits_transport(self, tmp_path):
        transport, calls = self.make_transport()
        cache = CallCache(tmp_path / "cache")
        emb = RemoteEmbedder("m", cache=cache, transport=transport, backoff=0.0)
        first = emb.embed(["same text"])
        again = emb.embed(["same text"])
        assert calls["n"] == 1
        np.testing.assert_allclose(first, again)
