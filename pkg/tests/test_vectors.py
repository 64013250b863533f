import math

import numpy as np
import pytest

from lexcite.vectors import (
    DEFAULT_THRESHOLD,
    build,
    load_embeddings_jsonl,
    normalize,
    within_threshold,
    write_embeddings_jsonl,
)


def random_entries(n, dim, seed=0):
    rng = np.random.default_rng(seed)
    return [(f"a{i:03d}", rng.normal(size=dim)) for i in range(n)]


class TestBuild:
    def test_size(self):
        index = build([("a", [1, 0, 0, 0]), ("b", [0, 1, 0, 0]), ("c", [0, 0, 1, 0])])
        assert len(index) == 3 and index.dim == 4

    def test_mixed_dims_rejected(self):
        with pytest.raises(ValueError):
            build([("a", [1, 0]), ("b", [1, 0, 0])])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            build([("a", [1.0, float("nan")])])

    def test_input_normalized_on_load(self):
        index = build([("a", [3.0, 4.0])])
        assert abs(np.linalg.norm(index.matrix[0]) - 1.0) < 1e-6

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build([])

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            normalize([0.0, 0.0])


class TestKnn:
    def test_exact_entry_first_distance_zero(self):
        entries = random_entries(10, 8, seed=1)
        index = build(entries)
        hits = index.knn(entries[3][1], k=1)
        assert hits[0][0] == "a003"
        assert hits[0][1] == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_unit_vectors_distance_two(self):
        index = build([("a", [1, 0]), ("b", [0, 1])])
        hits = index.knn([1, 0], k=2)
        assert hits[1][1] == pytest.approx(2.0)

    def test_brute_force_oracle(self):
        entries = random_entries(50, 16, seed=7)
        index = build(entries)
        rng = np.random.default_rng(99)
        for _ in range(5):
            q = rng.normal(size=16)
            got = index.knn(q, k=5)
            qn = q / np.linalg.norm(q)
            brute = []
            for eid, vec in entries:
                v = np.asarray(vec, dtype=np.float64)
                v = v / np.linalg.norm(v)
                brute.append((eid, float(np.sum((v - qn) ** 2))))
            brute.sort(key=lambda t: (t[1], t[0]))
            assert [g[0] for g in got] == [b[0] for b in brute[:5]]
            for (gid, gd), (bid, bd) in zip(got, brute[:5]):
                assert gd == pytest.approx(bd, abs=1e-12)

    def test_k_exceeds_index_returns_permutation(self):
        entries = random_entries(6, 4, seed=2)
        index = build(entries)
        hits = index.knn([1, 0, 0, 0], k=10)
        assert sorted(h[0] for h in hits) == sorted(e[0] for e in entries)

    def test_tie_break_by_id(self):
        index = build([("b", [1, 0]), ("a", [1, 0]), ("c", [0, 1])])
        hits = index.knn([1, 0], k=2)
        assert [h[0] for h in hits] == ["a", "b"]

    def test_dim_mismatch(self):
        index = build([("a", [1, 0, 0])])
        with pytest.raises(ValueError):
            index.knn([1, 0], k=1)

    def test_deterministic(self):
        entries = random_entries(20, 8, seed=5)
        index = build(entries)
        q = np.ones(8)
        assert index.knn(q, 5) == index.knn(q, 5)

    def test_squared_l2_equals_two_minus_two_dot(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            u = rng.normal(size=12)
            v = rng.normal(size=12)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            direct = float(np.sum((u - v) ** 2))
            via_dot = 2.0 - 2.0 * float(u @ v)
            assert abs(direct - via_dot) < 1e-9


class TestThreshold:
    def test_boundary_inclusive(self):
        assert within_threshold(DEFAULT_THRESHOLD)

    def test_just_above(self):
        assert not within_threshold(0.5741)

    def test_zero(self):
        assert within_threshold(0.0)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            within_threshold(-0.1)


class TestEmbeddingsJsonl:
    def test_round_trip_and_normalization(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_embeddings_jsonl([("x", [3.0, 4.0]), ("y", [0.0, 2.0])], path)
        loaded = load_embeddings_jsonl(path)
        assert [eid for eid, _ in loaded] == ["x", "y"]
        for _, vec in loaded:
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-6

    def test_declared_dim_checked(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "x", "dim": 3, "vector": [1.0, 0.0]}\n')
        with pytest.raises(ValueError):
            load_embeddings_jsonl(path)
