import random

import pytest

import fastmks


def uniform_points(n, dim, seed):
    rng = random.Random(seed)
    return [[rng.random() for _ in range(dim)] for _ in range(n)]


def test_kernel_values():
    assert fastmks.kernel_value("linear", [1.0, 2.0], [3.0, 4.0]) == 11.0
    assert fastmks.kernel_value("polynomial:d=10,c=1", [1.0, 0.0], [1.0, 0.0]) == 1024.0
    assert fastmks.kernel_value("pspectrum:p=2", "abab", "ab") == 2.0
    assert fastmks.kernel_value("cosine", [2.0, 0.0], [5.0, 0.0]) == 1.0


def test_rank_sample_count():
    assert fastmks.rank_sample_count(10000, 100.0, 0.05) == 299


def test_exact_query_matches_linear_scan():
    points = uniform_points(300, 4, seed=1)
    index = fastmks.Index(points, kernel="linear")
    queries = uniform_points(25, 4, seed=2)
    for q in queries:
        got = index.query(q, k=5)
        want = index.linear_scan(q, k=5)
        assert [(h.index, h.value) for h in got.hits] == [
            (h.index, h.value) for h in want.hits
        ]
        assert got.kernel_evals <= want.kernel_evals


def test_validate_and_stats():
    index = fastmks.Index(uniform_points(128, 3, seed=3), kernel="cosine")
    report = index.validate()
    assert report["ok"], report
    stats = index.stats()
    assert stats["points"] == 128
    assert stats["nodes"] <= 2 * 128
    assert len(index) == 128


def test_save_load_roundtrip(tmp_path):
    points = uniform_points(200, 3, seed=4)
    index = fastmks.Index(points, kernel="gaussian:sigma=1")
    path = str(tmp_path / "index.bin")
    index.save(path)
    loaded = fastmks.load_index(path, points, kernel="gaussian:sigma=1")
    q = uniform_points(1, 3, seed=5)[0]
    a = index.query(q, k=3)
    b = loaded.query(q, k=3)
    assert [(h.index, h.value) for h in a.hits] == [(h.index, h.value) for h in b.hits]
    assert a.kernel_evals == b.kernel_evals


def test_sequences_pspectrum():
    alphabet = "ACDEFGHIKLMNPQRSTVWY"
    rng = random.Random(6)
    seqs = [
        "".join(rng.choice(alphabet) for _ in range(rng.randint(10, 25)))
        for _ in range(150)
    ]
    index = fastmks.Index(seqs, kernel="pspectrum:p=3")
    q = "".join(rng.choice(alphabet) for _ in range(18))
    got = index.query(q, k=3)
    want = index.linear_scan(q, k=3)
    assert [(h.index, h.value) for h in got.hits] == [
        (h.index, h.value) for h in want.hits
    ]


def test_approximate_modes_hold_guarantees():
    points = uniform_points(400, 3, seed=7)
    index = fastmks.Index(points)
    for q in uniform_points(20, 3, seed=8):
        exact = index.linear_scan(q, k=1).hits[0].value
        ava = index.query(q, k=1, mode="ava:eps=0.05").hits[0].value
        assert ava >= exact - 0.05 - 1e-12
        rva = index.query(q, k=1, mode="rva:eps=0.1")
        if not rva.guarantee_void:
            assert rva.hits[0].value >= (1 - 0.1) * exact - 1e-12


def test_errors():
    points = uniform_points(5, 2, seed=9)
    index = fastmks.Index(points)
    with pytest.raises(ValueError, match="exceeds dataset size"):
        index.query([0.0, 0.0], k=10)
    with pytest.raises(ValueError, match="unknown kernel"):
        fastmks.Index(points, kernel="nosuch")
    with pytest.raises(ValueError):
        fastmks.kernel_value("cosine", [0.0, 0.0], [1.0, 0.0])


def test_expansion_constant():
    assert fastmks.expansion_constant([[0.0], [1.0]], kernel="linear") == 2.0
