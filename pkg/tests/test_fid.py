import numpy as np
import pytest

from synbench.metrics import (
    Embedder,
    EmbeddingStats,
    MetricError,
    compute_fid,
    frechet_distance,
    gaussian_stats,
)


class FlattenEmbedder(Embedder):
    """Deterministic test embedder: raw pixels flattened (optionally projected)."""

    def __init__(self, dim=None, seed=0, count_calls=False):
        self.dim = dim
        self.seed = seed
        self.calls = []

    def embed(self, images):
        x = np.asarray(images, dtype=np.float64).reshape(len(images), -1)
        self.calls.append(len(images))
        if self.dim is not None and self.dim < x.shape[1]:
            rng = np.random.default_rng(self.seed)
            proj = rng.standard_normal((x.shape[1], self.dim))
            x = x @ proj
        return x


def diag_closed_form(m1, v1, m2, v2):
    """Independent oracle for diagonal covariances:
    sum (m1-m2)^2 + sum (v1 + v2 - 2 sqrt(v1 v2))."""
    return float(np.sum((m1 - m2) ** 2) + np.sum(v1 + v2 - 2.0 * np.sqrt(v1 * v2)))


def test_gaussian_stats_hand_case():
    stats = gaussian_stats(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert np.allclose(stats.m, [1.0, 0.0])
    assert np.allclose(stats.C, [[1.0, 0.0], [0.0, 0.0]])
    assert stats.n == 2


def test_gaussian_stats_identical_rows_and_permutation():
    x = np.tile([1.5, -2.0, 3.0], (5, 1))
    assert np.allclose(gaussian_stats(x).C, 0.0)
    rng = np.random.default_rng(1)
    y = rng.standard_normal((30, 4))
    a = gaussian_stats(y)
    b = gaussian_stats(y[rng.permutation(30)])
    assert np.allclose(a.m, b.m) and np.allclose(a.C, b.C)


def test_frechet_identity_is_zero():
    rng = np.random.default_rng(2)
    s = gaussian_stats(rng.standard_normal((50, 6)))
    assert frechet_distance(s, s) <= 1e-8


def test_frechet_analytic_mean_shift():
    eye = np.eye(2)
    s1 = EmbeddingStats(m=np.zeros(2), C=eye, n=10)
    s2 = EmbeddingStats(m=np.ones(2), C=eye, n=10)
    assert frechet_distance(s1, s2) == pytest.approx(2.0, abs=1e-12)


def test_frechet_analytic_covariance_scale():
    # equal means, C=4I vs I in d=2: Tr(5I - 2*2I) = 2.
    s1 = EmbeddingStats(m=np.zeros(2), C=4.0 * np.eye(2), n=10)
    s2 = EmbeddingStats(m=np.zeros(2), C=np.eye(2), n=10)
    assert frechet_distance(s1, s2) == pytest.approx(2.0, abs=1e-12)


def test_frechet_matches_diagonal_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 8))
        m1, m2 = rng.standard_normal(d), rng.standard_normal(d)
        v1, v2 = rng.uniform(0.1, 3.0, d), rng.uniform(0.1, 3.0, d)
        s1 = EmbeddingStats(m=m1, C=np.diag(v1), n=10)
        s2 = EmbeddingStats(m=m2, C=np.diag(v2), n=10)
        got = frechet_distance(s1, s2)
        assert abs(got - diag_closed_form(m1, v1, m2, v2)) <= 1e-8


def test_frechet_symmetry():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = gaussian_stats(rng.standard_normal((40, 5)))
        b = gaussian_stats(rng.standard_normal((40, 5)) * 1.7 + 0.3)
        assert abs(frechet_distance(a, b) - frechet_distance(b, a)) <= 1e-8


def test_frechet_rejects_dimension_mismatch_and_non_psd():
    s1 = EmbeddingStats(m=np.zeros(2), C=np.eye(2), n=5)
    s2 = EmbeddingStats(m=np.zeros(3), C=np.eye(3), n=5)
    with pytest.raises(MetricError):
        frechet_distance(s1, s2)
    bad = EmbeddingStats(m=np.zeros(2), C=np.array([[1.0, 0.0], [0.0, -0.5]]), n=5)
    good = EmbeddingStats(m=np.zeros(2), C=np.eye(2), n=5)
    with pytest.raises(MetricError):
        frechet_distance(bad, good)


def test_compute_fid_identical_sets():
    rng = np.random.default_rng(5)
    images = rng.uniform(0, 1, (64, 8, 8))
    fid = compute_fid(images, images.copy(), FlattenEmbedder(dim=4), n=64)
    assert fid <= 1e-6


def test_compute_fid_wraps_reals_exactly():
    rng = np.random.default_rng(6)
    reals = rng.uniform(0, 1, (16, 4, 4))
    syn = rng.uniform(0, 1, (32, 4, 4))
    emb = FlattenEmbedder()

    class Recorder(FlattenEmbedder):
        def __init__(self):
            super().__init__()
            self.seen = []

        def embed(self, images):
            self.seen.append(np.asarray(images))
            return super().embed(images)

    rec = Recorder()
    compute_fid(reals, syn, rec, n=32)
    real_batch = rec.seen[0]
    assert real_batch.shape[0] == 32
    # |real| = N/2: each real appears exactly twice, in manifest order.
    assert np.array_equal(real_batch[:16], reals)
    assert np.array_equal(real_batch[16:], reals)


def test_compute_fid_sample_size_bias():
    # FID is biased in n: same two distributions, different n, different score.
    rng = np.random.default_rng(7)
    reals = rng.normal(0.5, 0.1, (2000, 4, 4)).clip(0, 1)
    syn = rng.normal(0.5, 0.12, (2000, 4, 4)).clip(0, 1)
    emb = FlattenEmbedder(dim=6)
    small = compute_fid(reals, syn, emb, n=100)
    large = compute_fid(reals, syn, emb, n=2000)
    assert abs(small - large) > 1e-6


def test_compute_fid_input_validation():
    rng = np.random.default_rng(8)
    imgs = rng.uniform(0, 1, (10, 4, 4))
    with pytest.raises(MetricError):
        compute_fid(imgs, imgs, FlattenEmbedder(), n=1)
    with pytest.raises(MetricError):
        compute_fid(imgs, imgs[:5], FlattenEmbedder(), n=10)

    class BadEmbedder(Embedder):
        dim = 2

        def embed(self, images):
            out = np.zeros((len(images), 2))
            out[0, 0] = np.nan
            return out

    with pytest.raises(MetricError):
        compute_fid(imgs, imgs, BadEmbedder(), n=10)
