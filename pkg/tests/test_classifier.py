import numpy as np
import pytest

from synbench.classifier import (
    ClassifierProtocol,
    ProtocolError,
    evaluate,
    run_pair,
    train_classifier,
)
from synbench.data import LabeledImageSet
from synbench.metrics import benchmark_delta


def split_corpus(corpus, n_train, n_val, n_test):
    ids = corpus.ids()
    return (
        corpus.subset(ids[:n_train]),
        corpus.subset(ids[n_train : n_train + n_val]),
        corpus.subset(ids[n_train + n_val : n_train + n_val + n_test]),
    )


@pytest.fixture(scope="module")
def toy_folds(toy_corpus):
    return split_corpus(toy_corpus, 400, 100, 100)


@pytest.fixture(scope="module")
def trained(toy_folds):
    train, val, _ = toy_folds
    protocol = ClassifierProtocol(seed=3, max_epochs=20)
    return train_classifier(train, val, protocol)


def test_classifier_reaches_signal_on_toy_corpus(toy_folds, trained):
    # The threshold oracle guarantees >= 0.95 separability; the conv net must
    # come close within 20 epochs.
    _, _, test = toy_folds
    model, history = trained
    assert history.best_val_auc >= 0.9
    assert evaluate(model, test).mean_auc >= 0.9


def test_history_invariants(trained):
    _, history = trained
    lrs = [lr for _, lr, _ in history.rows]
    assert all(b <= a for a, b in zip(lrs, lrs[1:]))
    aucs = [a for _, _, a in history.rows]
    assert history.best_val_auc == pytest.approx(max(aucs), abs=1e-12)
    assert history.stopped_epoch == history.rows[-1][0]
    assert history.stopped_epoch <= history.best_epoch + 3


def test_returned_model_matches_best_epoch(toy_folds, trained):
    train, val, _ = toy_folds
    model, history = trained
    assert evaluate(model, val).mean_auc == pytest.approx(history.best_val_auc, abs=1e-9)


def test_plateau_rule_trace(monkeypatch, toy_folds):
    # val sequence .7 .8 .8 .8 .8 ...: lr drops after two flat epochs
    # following the best, training stops after three.
    train, val, _ = toy_folds
    seq = iter([0.7, 0.8, 0.8, 0.8, 0.8, 0.8, 0.8])

    class FakeReport:
        def __init__(self, v):
            self.mean_auc = v

    import synbench.classifier.train as ct

    real_evaluate = ct.evaluate
    monkeypatch.setattr(ct, "evaluate", lambda model, fold: FakeReport(next(seq)))
    protocol = ClassifierProtocol(seed=0, max_epochs=10, epoch_cap_images=96, batch_size=48)
    _, history = ct.train_classifier(train, val, protocol)
    monkeypatch.setattr(ct, "evaluate", real_evaluate)

    lrs = [lr for _, lr, _ in history.rows]
    assert lrs == pytest.approx([1e-4, 1e-4, 1e-4, 1e-4, 1e-5])
    assert history.stopped_epoch == 5
    assert history.best_epoch == 2


def test_epoch_sees_whole_fold_below_cap(toy_folds):
    train, val, _ = toy_folds
    protocol = ClassifierProtocol(seed=0, max_epochs=1)
    assert len(train) < protocol.epoch_cap_images
    # one epoch = len(train) images -> ceil(400/48) optimizer steps
    counted = {"steps": 0}
    import torch

    orig = torch.optim.Adam.step

    def counting(self, *a, **k):
        counted["steps"] += 1
        return orig(self, *a, **k)

    torch.optim.Adam.step = counting
    try:
        train_classifier(train, val, protocol)
    finally:
        torch.optim.Adam.step = orig
    assert counted["steps"] == int(np.ceil(len(train) / protocol.batch_size))


def test_evaluate_is_deterministic_and_checks_labels(toy_folds, trained):
    _, _, test = toy_folds
    model, _ = trained
    a = evaluate(model, test)
    b = evaluate(model, test)
    assert a.per_label == b.per_label
    bad = LabeledImageSet(labels=["only"], records=[])
    with pytest.raises(ProtocolError):
        evaluate(model, bad)


def test_label_shuffled_fold_scores_near_half(toy_folds, trained):
    _, _, test = toy_folds
    model, _ = trained
    rng = np.random.default_rng(0)
    shuffled = LabeledImageSet(labels=test.labels, records=list(test.records))
    perm = rng.permutation(len(test))
    bits = test.label_array()[perm]
    from synbench.data import ImageRecord

    shuffled.records = [
        ImageRecord(r.image_id, r.patient_id, r.pixels, bits[i])
        for i, r in enumerate(test.records)
    ]
    report = evaluate(model, shuffled)
    assert abs(report.mean_auc - 0.5) <= 0.08


def test_run_pair_identity_gan_delta_near_zero(toy_folds):
    train, val, test = toy_folds
    protocol = ClassifierProtocol(max_epochs=12)
    results = run_pair(train, val, test, train, val, protocol, seeds=[1, 2])
    for r in results:
        assert abs(r.delta) <= 0.02
    assert [r.seed for r in results] == [1, 2]


def test_memorizing_model_saturates_on_train_fold(toy_folds, trained):
    train, _, _ = toy_folds
    model, _ = trained
    assert evaluate(model, train).mean_auc >= 0.95


def test_corner_pixel_generator_delta_syn_oracle(toy_corpus):
    # A "generator" that hides each label in a corner marker of an otherwise
    # uninformative noise image: the classifier trained on such synthetics is
    # nearly perfect on synthetic test data and at chance on real data, so the
    # label-overfitting score lands near the 0.5 gap pattern. The marker spans
    # 2x2 pixels, the smallest region the stride-2 backbone resolves.
    from synbench.data import ImageRecord, LabeledImageSet
    from synbench.metrics import delta_syn

    rng = np.random.default_rng(77)

    def corner_pixel_fold(labels_from, tag):
        records = []
        for i, rec in enumerate(labels_from.records):
            noise = rng.uniform(0.3, 0.7, rec.pixels.shape).astype(np.float32)
            noise[0:2, 0:2] = 1.0 if rec.bits[0] else 0.0
            noise[0:2, -2:] = 1.0 if rec.bits[1] else 0.0
            records.append(ImageRecord(f"{tag}{i}", f"{tag}{i}", noise, rec.bits))
        return LabeledImageSet(labels=list(labels_from.labels), records=records)

    real_train = toy_corpus.subset(toy_corpus.ids()[:300])
    real_val = toy_corpus.subset(toy_corpus.ids()[300:380])
    real_test = toy_corpus.subset(toy_corpus.ids()[380:500])
    syn_train = corner_pixel_fold(real_train, "st")
    syn_val = corner_pixel_fold(real_val, "sv")
    syn_test = corner_pixel_fold(real_test, "sx")

    protocol = ClassifierProtocol(seed=5, max_epochs=20, lr0=1e-3)
    model, _ = train_classifier(syn_train, syn_val, protocol)
    on_syn = evaluate(model, syn_test)
    on_real = evaluate(model, real_test)
    assert on_syn.mean_auc >= 0.95
    assert abs(on_real.mean_auc - 0.5) <= 0.15
    assert delta_syn(on_syn, on_real) >= 0.3


def test_run_pair_warns_on_size_mismatch(toy_folds):
    train, val, test = toy_folds
    protocol = ClassifierProtocol(max_epochs=2)
    smaller = train.subset(train.ids()[:100])
    with pytest.warns(UserWarning):
        run_pair(train, val, test, smaller, val, protocol, seeds=[1])
