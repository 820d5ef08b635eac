import json
import random

import httpx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textgen import random_text

from greekrag.embedding import (
    EmbedderConfig,
    EmbeddingCache,
    EmbeddingClient,
    HashingTextEmbedder,
    cache_lookup_or_embed,
    embed,
    embed_batch,
    reference_embed,
    vector_from_b64,
    vector_to_b64,
)
from greekrag.errors import (
    CacheCorrupt,
    DegenerateText,
    DimensionMismatch,
    EmptyText,
    RemoteUnavailable,
)

LONG_A = ("Η οικογένεια αποτελεί τον πρώτο χώρο κοινωνικοποίησης του παιδιού "
          "και διαμορφώνει τις πρώτες σχέσεις προσκόλλησης.")
LONG_B = ("Ο τραυματισμός του γόνατος απαιτεί σταδιακή αποκατάσταση με ασκήσεις "
          "ενδυνάμωσης και έλεγχο του πόνου.")


class TestReferenceEmbed:
    def test_unit_norm(self):
        vec = reference_embed(LONG_A, 64, seed=1)
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-6
        assert vec.dtype == np.float32

    def test_deterministic(self):
        a = reference_embed(LONG_A, 128, seed=42)
        b = reference_embed(LONG_A, 128, seed=42)
        assert a.tobytes() == b.tobytes()

    def test_seed_changes_vector(self):
        a = reference_embed(LONG_A, 128, seed=1)
        b = reference_embed(LONG_A, 128, seed=2)
        assert a.tobytes() != b.tobytes()

    def test_three_gram_order_does_not_matter(self):
        # blocks wrapped in a 2-char guard can be permuted without changing
        # the 3-gram multiset, so the accumulated vector must be identical
        blocks = ["ΩΩμήλοΩΩ", "ΩΩπορτοκάλιΩΩ", "ΩΩβερίκοκοΩΩ"]
        t1 = "".join(blocks)
        t2 = "".join(reversed(blocks))
        grams = lambda t: sorted(t[i:i + 3] for i in range(len(t) - 2))
        assert t1 != t2 and grams(t1) == grams(t2)
        assert reference_embed(t1, 32, 0).tobytes() == reference_embed(t2, 32, 0).tobytes()

    def test_distinct_texts_not_parallel(self):
        a = reference_embed(LONG_A, 256, seed=0)
        b = reference_embed(LONG_B, 256, seed=0)
        cos = float(np.dot(a.astype(np.float64), b.astype(np.float64)))
        assert cos < 0.999

    def test_empty_text_rejected(self):
        with pytest.raises(EmptyText):
            reference_embed("", 16, 0)
        with pytest.raises(EmptyText):
            reference_embed("   ", 16, 0)

    def test_too_short_is_degenerate(self):
        with pytest.raises(DegenerateText):
            reference_embed("αβ", 16, 0)

    def test_dim_lower_bound(self):
        with pytest.raises(ValueError):
            reference_embed(LONG_A, 1, 0)

    def test_nfc_insensitive(self):
        decomposed = "πάλι καλά εδώ"   # ά decomposed
        composed = "πάλι καλά εδώ"
        a = reference_embed(decomposed, 64, 5)
        b = reference_embed(composed, 64, 5)
        assert a.tobytes() == b.tobytes()

    @given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=2, max_value=96))
    @settings(max_examples=40, deadline=None)
    def test_random_texts_unit_norm(self, seed, dim):
        text = random_text(random.Random(seed))
        vec = reference_embed(text, dim, seed)
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-6
        assert len(vec) == dim
        assert np.any(vec != 0.0)


class TestB64Vectors:
    def test_bit_exact_roundtrip(self):
        vec = reference_embed(LONG_A, 32, 3)
        back = vector_from_b64(vector_to_b64(vec))
        assert back.tobytes() == vec.tobytes()


class TestEmbedFunction:
    def test_reference_mode_shape(self):
        cfg = EmbedderConfig(dim=256)
        assert len(embed(LONG_A, cfg)) == 256

    def test_reference_mode_deterministic(self):
        cfg = EmbedderConfig(dim=64)
        assert embed(LONG_A, cfg).tobytes() == embed(LONG_A, cfg).tobytes()

    def test_empty_text(self):
        with pytest.raises(EmptyText):
            embed("", EmbedderConfig(dim=16))

    def test_distinct_embedder_ids_differ(self):
        a = embed(LONG_A, EmbedderConfig(embedder_id="model-a", dim=64))
        b = embed(LONG_A, EmbedderConfig(embedder_id="model-b", dim=64))
        assert a.tobytes() != b.tobytes()

    def test_batch_empty(self):
        assert embed_batch([], EmbedderConfig(dim=16)) == []

    def test_batch_repeated_text_bit_identical(self):
        out = embed_batch([LONG_A, LONG_B, LONG_A], EmbedderConfig(dim=64))
        assert out[0].tobytes() == out[2].tobytes()
        assert out[0].tobytes() != out[1].tobytes()

    def test_batch_error_carries_index(self):
        with pytest.raises(EmptyText, match="index 1"):
            embed_batch([LONG_A, "  ", LONG_B], EmbedderConfig(dim=16))


class TestCache:
    def test_miss_then_hit(self, tmp_path):
        cache = EmbeddingCache(tmp_path / "c.jsonl")
        cfg = EmbedderConfig(dim=32)
        first = cache_lookup_or_embed(LONG_A, cfg, cache)
        assert len(cache) == 1
        second = cache_lookup_or_embed(LONG_A, cfg, cache)
        assert first.tobytes() == second.tobytes()

    def test_persists_across_instances(self, tmp_path):
        path = tmp_path / "c.jsonl"
        cfg = EmbedderConfig(dim=32)
        v1 = cache_lookup_or_embed(LONG_A, cfg, EmbeddingCache(path))
        v2 = cache_lookup_or_embed(LONG_A, cfg, EmbeddingCache(path))
        assert v1.tobytes() == v2.tobytes()

    def test_transparency(self, tmp_path):
        cfg = EmbedderConfig(dim=48)
        without = embed(LONG_A, cfg)
        with_cache = cache_lookup_or_embed(LONG_A, cfg, EmbeddingCache(tmp_path / "c.jsonl"))
        assert without.tobytes() == with_cache.tobytes()

    def test_distinct_embedder_ids_get_distinct_keys(self, tmp_path):
        cache = EmbeddingCache(tmp_path / "c.jsonl")
        cache_lookup_or_embed(LONG_A, EmbedderConfig(embedder_id="a", dim=16), cache)
        cache_lookup_or_embed(LONG_A, EmbedderConfig(embedder_id="b", dim=16), cache)
        assert len(cache) == 2

    def test_wrong_dim_entry_is_corrupt(self, tmp_path):
        cache = EmbeddingCache(tmp_path / "c.jsonl")
        cfg16 = EmbedderConfig(dim=16)
        cache_lookup_or_embed(LONG_A, cfg16, cache)
        cfg32 = EmbedderConfig(dim=32)
        with pytest.raises(CacheCorrupt):
            cache_lookup_or_embed(LONG_A, cfg32, cache)

    def test_corrupt_file_detected_on_load(self, tmp_path):
        path = tmp_path / "c.jsonl"
        entry = {"digest_hex": "00" * 8, "dim": 8, "vector_b64": vector_to_b64(np.ones(4, np.float32))}
        path.write_text(json.dumps(entry) + "\n", encoding="utf-8")
        with pytest.raises(CacheCorrupt):
            EmbeddingCache(path)

    def test_file_format(self, tmp_path):
        path = tmp_path / "c.jsonl"
        cache_lookup_or_embed(LONG_A, EmbedderConfig(dim=8), EmbeddingCache(path))
        obj = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
        assert set(obj) == {"digest_hex", "dim", "vector_b64"}
        assert len(obj["digest_hex"]) == 16
        assert obj["dim"] == 8


def make_remote(responder):
    """EmbedderConfig + MockTransport wired to ``responder(request) -> httpx.Response``."""
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(json.loads(request.content.decode("utf-8")))
        return responder(request)

    transport = httpx.MockTransport(handler)
    cfg = EmbedderConfig(endpoint="http://embedder.test", dim=None, retry_base_ms=0)
    return cfg, transport, calls


def ok_vectors(dim):
    def responder(request):
        payload = json.loads(request.content.decode("utf-8"))
        vectors = [[float(len(t) % 7 + j) for j in range(dim)] for t in payload["texts"]]
        return httpx.Response(200, json={"dim": dim, "vectors": vectors})
    return responder


class TestRemote:
    def test_single_request_carries_protocol_fields(self):
        cfg, transport, calls = make_remote(ok_vectors(4))
        vec = embed(LONG_A, cfg, transport=transport)
        assert len(vec) == 4
        assert calls[0]["model"] == cfg.embedder_id
        assert calls[0]["texts"] == [LONG_A]

    def test_batch_with_warm_cache_makes_one_call_for_misses(self, tmp_path):
        cfg, transport, calls = make_remote(ok_vectors(4))
        cache = EmbeddingCache(tmp_path / "c.jsonl")
        with EmbeddingClient(cfg, cache=cache, transport=transport) as client:
            client.embed_batch([LONG_A, LONG_B])          # warm 2 entries
            assert len(calls) == 1
            client.embed_batch([LONG_A, LONG_B, "τρίτο κείμενο εδώ"])
            assert len(calls) == 2                        # exactly one extra call
            assert calls[1]["texts"] == ["τρίτο κείμενο εδώ"]

    def test_first_response_fixes_dim(self):
        cfg, transport, _ = make_remote(ok_vectors(6))
        with EmbeddingClient(cfg, transport=transport) as client:
            client.embed(LONG_A)
            assert client.dim == 6

    def test_dim_mismatch_detected(self):
        flip = {"n": 0}

        def responder(request):
            payload = json.loads(request.content.decode("utf-8"))
            dim = 6 if flip["n"] == 0 else 8
            flip["n"] += 1
            return httpx.Response(200, json={
                "dim": dim, "vectors": [[0.5] * dim for _ in payload["texts"]]})

        cfg, transport, _ = make_remote(responder)
        with EmbeddingClient(cfg, transport=transport) as client:
            client.embed(LONG_A)
            with pytest.raises(DimensionMismatch):
                client.embed(LONG_B)

    def test_transport_failure_retries_then_raises(self):
        attempts = []

        def responder(request):
            attempts.append(1)
            raise httpx.ConnectError("refused")

        cfg, transport, _ = make_remote(responder)
        with pytest.raises(RemoteUnavailable):
            embed(LONG_A, cfg, transport=transport)
        assert len(attempts) == 3

    def test_5xx_retries(self):
        attempts = []

        def responder(request):
            attempts.append(1)
            return httpx.Response(503, text="busy")

        cfg, transport, _ = make_remote(responder)
        with pytest.raises(RemoteUnavailable):
            embed(LONG_A, cfg, transport=transport)
        assert len(attempts) == 3

    def test_4xx_never_retries(self):
        attempts = []

        def responder(request):
            attempts.append(1)
            return httpx.Response(422, text="bad request")

        cfg, transport, _ = make_remote(responder)
        with pytest.raises(RemoteUnavailable):
            embed(LONG_A, cfg, transport=transport)
        assert len(attempts) == 1


class TestConcurrency:
    def test_parallel_cache_writes_stay_consistent(self, tmp_path):
        import threading

        cache = EmbeddingCache(tmp_path / "c.jsonl")
        cfg = EmbedderConfig(dim=32)
        texts = [f"κείμενο δοκιμής νούμερο {i} με αρκετό μήκος" for i in range(8)]
        errors = []

        def worker():
            try:
                with EmbeddingClient(cfg, cache=cache) as client:
                    for text in texts:
                        client.embed(text)
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)

        threads = [threading.Thread(target=worker) for _ in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(cache) == len(texts)
        # file reloads cleanly and agrees with a fresh computation
        reloaded = EmbeddingCache(tmp_path / "c.jsonl")
        for text in texts:
            expected = reference_embed(text, 32, cfg.effective_seed)
            got = cache_lookup_or_embed(text, cfg, reloaded)
            assert got.tobytes() == expected.tobytes()


class TestHashingTextEmbedderEstimator:
    def test_transform_shape_and_norms(self):
        est = HashingTextEmbedder(dim=32, seed=9)
        mat = est.fit(None).transform([LONG_A, LONG_B])
        assert mat.shape == (2, 32)
        norms = np.linalg.norm(mat, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-6)

    def test_empty_input(self):
        assert HashingTextEmbedder(dim=8).transform([]).shape == (0, 8)

    def test_get_params(self):
        params = HashingTextEmbedder(dim=16, seed=3).get_params()
        assert params == {"dim": 16, "seed": 3}

    def test_matches_reference_embed(self):
        est = HashingTextEmbedder(dim=24, seed=11)
        row = est.transform([LONG_A])[0]
        assert row.tobytes() == reference_embed(LONG_A, 24, 11).tobytes()
