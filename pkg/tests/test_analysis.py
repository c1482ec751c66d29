import numpy as np
import pytest
import torch

from synbench.analysis import (
    AttributionError,
    cosine_distances,
    final_layer_embedding,
    masking_attribution,
    nearest_neighbor,
    nn_audit,
    save_panel,
    top_decile_mass_in_region,
)
from synbench.data import ImageRecord, LabeledImageSet, primitive_region
from synbench.nets import SmallConvNet


@pytest.fixture(scope="module")
def model():
    torch.manual_seed(7)
    return SmallConvNet(n_labels=2, width=8).eval()


@pytest.fixture(scope="module")
def train_subset(toy_corpus):
    return toy_corpus.subset(toy_corpus.ids()[:200])


# ------------------------------------------------------------- embeddings


def test_embedding_deterministic_and_finite(model, train_subset):
    img = train_subset.records[0].pixels
    a = final_layer_embedding(model, img)
    b = final_layer_embedding(model, img)
    assert np.array_equal(a, b)
    assert a.shape == (model.feature_dim,)
    zeros = final_layer_embedding(model, np.zeros((32, 32), dtype=np.float32))
    assert np.isfinite(zeros).all()


# ------------------------------------------------------- nearest neighbors


def test_self_match_distance_zero(model, train_subset):
    rec = train_subset.records[17]
    result = nearest_neighbor(rec.pixels, train_subset, model)
    assert result.train_id == rec.image_id
    assert result.distance <= 1e-9


def test_two_point_toy_case(model):
    recs = [
        ImageRecord("a", "p1", np.zeros((32, 32), dtype=np.float32), np.zeros(2, dtype=np.uint8)),
        ImageRecord("b", "p2", np.ones((32, 32), dtype=np.float32), np.zeros(2, dtype=np.uint8)),
    ]
    train = LabeledImageSet(labels=["x", "y"], records=recs)
    got = nearest_neighbor(np.ones((32, 32), dtype=np.float32), train, model)
    assert got.train_id == "b"
    assert got.distance <= 1e-9


def test_nn_audit_matches_brute_force(model, train_subset, toy_corpus):
    queries = toy_corpus.subset(toy_corpus.ids()[200:260])
    results = nn_audit(queries, train_subset, model)
    train_ids = sorted(train_subset.ids())
    by_id = train_subset.by_id()
    emb_cache = {
        tid: final_layer_embedding(model, by_id[tid].pixels) for tid in train_ids
    }
    for rec, got in zip(queries.records, results):
        q = final_layer_embedding(model, rec.pixels)
        q = q / np.linalg.norm(q)
        best_id, best_d = None, np.inf
        for tid in train_ids:
            e = emb_cache[tid]
            d = 1.0 - float(q @ (e / np.linalg.norm(e)))
            if d < best_d:
                best_id, best_d = tid, d
        # equivalence up to float noise between the two evaluation orders
        assert got.distance == pytest.approx(best_d, abs=1e-8)
        assert got.train_id == best_id or abs(got.distance - best_d) <= 1e-8
        assert 0.0 <= got.distance <= 2.0


def test_zero_norm_embedding_distance_two():
    with pytest.warns(UserWarning):
        d = cosine_distances(np.zeros((1, 4)), np.ones((3, 4)))
    assert np.all(d == 2.0)


# ------------------------------------------------------------- attribution


class RegionDetector(SmallConvNet):
    """Hand-built model whose only signal is the mean of one pixel region."""

    def __init__(self, region, gain=30.0, bias=-8.0):
        super().__init__(n_labels=1, width=1)
        self.region = region
        self.gain = gain
        self.bias_value = bias

    def forward(self, x):
        ys, xs = self.region
        pooled = x[:, 0, ys, xs].mean(dim=(1, 2))
        return (self.gain * pooled + self.bias_value).unsqueeze(1)


def test_constant_model_gives_zero_map():
    class ConstantModel(SmallConvNet):
        def __init__(self):
            super().__init__(n_labels=2, width=1)

        def forward(self, x):
            return torch.zeros(x.shape[0], 2)

    rng = np.random.default_rng(0)
    img = rng.uniform(0, 1, (32, 32)).astype(np.float32)
    amap = masking_attribution(ConstantModel(), img, np.array([1, 0]))
    assert amap.values.shape == (16, 16)
    assert np.all(amap.values == 0.0)


def test_region_detector_concentrates_attribution(toy_corpus):
    region = primitive_region(0, 2, 32)
    detector = RegionDetector(region)
    positives = [r for r in toy_corpus.records if r.bits[0] == 1][:5]
    for rec in positives:
        amap = masking_attribution(detector, rec.pixels, rec.bits[:1])
        mass = top_decile_mass_in_region(amap, region)
        assert mass >= 0.7


def test_region_count_follows_mask_size():
    img = np.zeros((64, 64), dtype=np.float32)
    detector = RegionDetector((slice(0, 8), slice(0, 8)))
    amap = masking_attribution(detector, img, np.array([0]))
    assert amap.n_regions == (64 // 2) ** 2
    with pytest.raises(AttributionError):
        masking_attribution(detector, np.zeros((30, 30), dtype=np.float32), np.array([0]),
                            mask_size=4)


def test_attribution_values_bounded(model, toy_corpus):
    rec = toy_corpus.records[3]
    amap = masking_attribution(model, rec.pixels, rec.bits)
    assert amap.values.min() >= 0.0
    assert amap.values.max() <= 1.0


# ------------------------------------------------------------------ panels


def test_save_panel_writes_png(tmp_path, toy_corpus, model):
    rec = toy_corpus.records[0]
    amap = masking_attribution(model, rec.pixels, rec.bits)
    out = save_panel(tmp_path / "panel.png", rec.pixels, rec.pixels, amap, distance=0.12)
    assert out.exists() and out.stat().st_size > 0
