import numpy as np
import pytest

from coachbot.retrieval import build_index, retrieve
from coachbot.similarity import cosine


def brute_force_scan(vectors, post_ids, q, k):
    """Independent oracle: per-document cosine plus an explicit sort."""
    scored = [(cosine(q, v), i) for i, v in enumerate(vectors)]
    scored.sort(key=lambda si: (-si[0], si[1]))
    return [(post_ids[i], s) for s, i in scored[:k]]


class TestBuildIndex:
    def test_size(self):
        vecs = np.eye(3, dtype=np.float32)
        index = build_index(vecs, ["a", "b", "c"])
        assert len(index) == 3
        assert index.dims == 3

    def test_rows_unit_normalized(self):
        rng = np.random.default_rng(1)
        vecs = rng.normal(size=(20, 8)) * 10
        index = build_index(vecs, [str(i) for i in range(20)])
        norms = np.linalg.norm(index.matrix.astype(np.float64), axis=1)
        assert np.all(np.abs(norms - 1.0) < 1e-6)

    def test_zero_vector_stored_and_flagged(self):
        vecs = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.float32)
        index = build_index(vecs, ["a", "b"])
        assert index.zero_rows.tolist() == [False, True]
        assert np.all(index.matrix[1] == 0.0)

    def test_rebuild_identical(self):
        rng = np.random.default_rng(2)
        vecs = rng.normal(size=(10, 4)).astype(np.float32)
        i1 = build_index(vecs, [str(i) for i in range(10)])
        i2 = build_index(vecs, [str(i) for i in range(10)])
        assert i1.matrix.tobytes() == i2.matrix.tobytes()

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            build_index(np.eye(3), ["a", "b"])


class TestRetrieve:
    def test_identity_query_first(self):
        rng = np.random.default_rng(3)
        vecs = rng.normal(size=(9, 6))
        index = build_index(vecs, [f"p{i}" for i in range(9)])
        results = retrieve(index, vecs[4], k1=3)
        assert results[0][0] == "p4"
        assert results[0][1] == pytest.approx(1.0, abs=1e-6)

    def test_k1_larger_than_corpus(self):
        vecs = np.eye(4)
        index = build_index(vecs, list("abcd"))
        results = retrieve(index, np.ones(4), k1=100)
        assert len(results) == 4
        sims = [s for _, s in results]
        assert sims == sorted(sims, reverse=True)

    def test_subset_and_monotone(self):
        rng = np.random.default_rng(4)
        vecs = rng.normal(size=(30, 5))
        ids = [f"p{i}" for i in range(30)]
        index = build_index(vecs, ids)
        for _ in range(20):
            q = rng.normal(size=5)
            results = retrieve(index, q, k1=7)
            assert len(results) == 7
            assert all(pid in set(ids) for pid, _ in results)
            sims = [s for _, s in results]
            assert all(a >= b for a, b in zip(sims, sims[1:]))

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(5)
        vecs = rng.normal(size=(200, 16)).astype(np.float32)
        ids = [f"p{i}" for i in range(200)]
        index = build_index(vecs, ids)
        for _ in range(25):
            q = rng.normal(size=16)
            got = retrieve(index, q, k1=10)
            expected = brute_force_scan(vecs, ids, q, 10)
            assert [pid for pid, _ in got] == [pid for pid, _ in expected]
            np.testing.assert_allclose(
                [s for _, s in got], [s for _, s in expected], atol=1e-6
            )

    def test_tie_break_by_position(self):
        vecs = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        index = build_index(vecs, ["first", "second", "other"])
        results = retrieve(index, np.array([1.0, 0.0]), k1=3)
        assert [pid for pid, _ in results] == ["first", "second", "other"]

    def test_zero_rows_rank_last_with_zero_similarity(self):
        vecs = np.array([[0.0, 0.0], [-1.0, 0.0], [1.0, 0.0]])
        index = build_index(vecs, ["zero", "anti", "pos"])
        results = retrieve(index, np.array([1.0, 0.0]), k1=3)
        assert [pid for pid, _ in results] == ["pos", "anti", "zero"]
        assert results[2][1] == 0.0

    def test_zero_query_returns_position_order(self):
        vecs = np.eye(3)
        index = build_index(vecs, list("abc"))
        results = retrieve(index, np.zeros(3), k1=2)
        assert [pid for pid, _ in results] == ["a", "b"]
        assert all(s == 0.0 for _, s in results)

    def test_k1_validation(self):
        index = build_index(np.eye(2), ["a", "b"])
        with pytest.raises(ValueError):
            retrieve(index, np.ones(2), k1=0)

    def test_dim_mismatch(self):
        index = build_index(np.eye(3), list("abc"))
        with pytest.raises(ValueError):
            retrieve(index, np.ones(4), k1=1)
