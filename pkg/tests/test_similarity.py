import numpy as np
import pytest

from coachbot.similarity import cosine


class TestDenseCosine:
    def test_self_similarity_is_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            u = rng.normal(size=8)
            assert cosine(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_zero_norm_convention(self):
        assert cosine([0.0, 0.0], [1.0, 2.0]) == 0.0
        assert cosine([1.0, 2.0], [0.0, 0.0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_symmetry_and_scale_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            u = rng.normal(size=6)
            v = rng.normal(size=6)
            alpha = float(rng.uniform(0.1, 10.0))
            assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-12)
            assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-12)

    def test_bounded(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            u = rng.normal(size=5)
            v = rng.normal(size=5)
            assert -1.0 - 1e-12 <= cosine(u, v) <= 1.0 + 1e-12


class TestSparseCosine:
    def test_identity(self):
        v = {"a": 1.5, "b": 0.5}
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_supports(self):
        assert cosine({"a": 1.0}, {"b": 2.0}) == 0.0

    def test_empty_is_zero(self):
        assert cosine({}, {"a": 1.0}) == 0.0

    def test_matches_dense_computation(self):
        u = {"a": 1.0, "b": 2.0}
        v = {"b": 3.0, "c": 4.0}
        dense = cosine(np.array([1.0, 2.0, 0.0]), np.array([0.0, 3.0, 4.0]))
        assert cosine(u, v) == pytest.approx(dense, abs=1e-12)

    def test_mixing_kinds_rejected(self):
        with pytest.raises(ValueError):
            cosine({"a": 1.0}, [1.0, 2.0])
