import numpy as np
import pytest
import torch

from synbench.data import ToySpec, generate_toy_corpus
from synbench.metrics import Embedder
from synbench.models import cpd_topology, prog_topology
from synbench.training import (
    AuxTerms,
    TrainSchedule,
    TrainingError,
    adversarial_losses,
    gradient_penalty,
    progressive_phase,
    run_repetitions,
    should_stop,
    softmax_label_ce,
    synthesize_fold,
    train_gan,
)


# ----------------------------------------------------------- gradient penalty


def _linear_d(w):
    def fn(x, y):
        return (x.flatten(1) * w.flatten()).sum(dim=1)

    return fn


def test_gp_zero_for_unit_gradient_linear_discriminator():
    gen = torch.Generator().manual_seed(0)
    w = torch.randn(1, 4, 4, generator=gen)
    w = w / w.norm()
    x_real = torch.randn(8, 1, 4, 4, generator=gen)
    x_fake = torch.randn(8, 1, 4, 4, generator=gen)
    gp = gradient_penalty(_linear_d(w), x_real, x_fake, None, gp_lambda=10.0, generator=gen)
    assert abs(float(gp)) <= 1e-6


def test_gp_lambda_for_constant_discriminator():
    gen = torch.Generator().manual_seed(1)
    x = torch.randn(4, 1, 2, 2, generator=gen)

    def const_d(xx, yy):
        return (xx * 0.0).sum(dim=(1, 2, 3))

    gp = gradient_penalty(const_d, x, x.clone(), None, gp_lambda=7.5, generator=gen)
    assert float(gp) == pytest.approx(7.5, abs=1e-6)


def test_gp_slope_two_gives_lambda():
    gen = torch.Generator().manual_seed(2)
    w = torch.randn(1, 3, 3, generator=gen)
    w = 2.0 * w / w.norm()
    x_real = torch.randn(6, 1, 3, 3, generator=gen)
    x_fake = torch.randn(6, 1, 3, 3, generator=gen)
    gp = gradient_penalty(_linear_d(w), x_real, x_fake, None, gp_lambda=10.0, generator=gen)
    assert float(gp) == pytest.approx(10.0, abs=1e-4)


# ------------------------------------------------------------------- losses


def test_losses_symmetric_case_is_zero():
    d = torch.tensor([0.3, -0.2, 1.0])
    loss_d, _ = adversarial_losses(d, d.clone(), 0.0)
    assert float(loss_d) == pytest.approx(0.0, abs=1e-7)


def test_losses_hand_arithmetic():
    d_real = torch.tensor([2.0, 2.0])
    d_fake = torch.tensor([-1.0, -1.0])
    loss_d, loss_g = adversarial_losses(d_real, d_fake, 0.5)
    assert float(loss_d) == pytest.approx(-2.5, abs=1e-7)
    assert float(loss_g) == pytest.approx(1.0, abs=1e-7)


def test_losses_aux_terms_reduce_to_wasserstein_when_zero():
    d_real = torch.tensor([1.0, 0.0])
    d_fake = torch.tensor([0.5, 0.5])
    aux = AuxTerms(ce_real=torch.tensor(0.0), ce_fake=torch.tensor(0.0))
    with_aux = adversarial_losses(d_real, d_fake, 0.2, aux, conditioning="auxiliary")
    without = adversarial_losses(d_real, d_fake, 0.2)
    assert float(with_aux[0]) == pytest.approx(float(without[0]), abs=1e-7)
    assert float(with_aux[1]) == pytest.approx(float(without[1]), abs=1e-7)


def test_losses_reject_aux_under_projection():
    aux = AuxTerms(ce_real=torch.tensor(0.0), ce_fake=torch.tensor(0.0))
    with pytest.raises(TrainingError):
        adversarial_losses(torch.zeros(2), torch.zeros(2), 0.0, aux, conditioning="projection")


def test_softmax_label_ce_perfect_prediction_near_zero():
    y = torch.tensor([[1.0, 0.0], [0.0, 1.0]])
    logits = y * 50.0
    assert float(softmax_label_ce(logits, y)) <= 1e-6
    # all-zero rows contribute nothing
    assert float(softmax_label_ce(torch.randn(3, 2), torch.zeros(3, 2))) == 0.0


# --------------------------------------------------------------- should_stop


def _hist(fids, start=100, step=100):
    return [(start + i * step, f) for i, f in enumerate(fids)]


def test_should_stop_golden_traces():
    # two non-improvements after best=4.0 -> stop
    assert should_stop(_hist([5.0, 4.0, 4.1, 4.2]), min_images=100) is True
    # strictly decreasing -> never stop
    assert should_stop(_hist([5.0, 4.0, 3.5, 3.0]), min_images=100) is False
    # second evaluation improved on the best -> no stop
    assert should_stop(_hist([5.0, 4.0, 4.5, 3.9]), min_images=100) is False


def test_should_stop_respects_min_images():
    history = _hist([5.0, 5.1, 5.2], start=100, step=100)
    assert should_stop(history, min_images=100) is True
    assert should_stop(history, min_images=10_000) is False


def test_should_stop_monotone_under_extension():
    rng = np.random.default_rng(3)
    for _ in range(50):
        fids = list(rng.uniform(1.0, 5.0, size=10))
        history = _hist(fids)
        fired = [should_stop(history[: i + 1], min_images=100) for i in range(10)]
        # once true, stays true
        for a, b in zip(fired, fired[1:]):
            assert not (a and not b)


# ------------------------------------------------------------ training loop


class TinyEmbedder(Embedder):
    """4-dim moment embedder, good enough to rank toy GAN progress."""

    dim = 4

    def embed(self, images):
        x = np.asarray(images, dtype=np.float64)
        n, s, _ = x.shape
        half = s // 2
        return np.stack(
            [
                x.mean(axis=(1, 2)),
                x.std(axis=(1, 2)),
                x[:, :half, :].mean(axis=(1, 2)),
                x[:, :, :half].mean(axis=(1, 2)),
            ],
            axis=1,
        )


@pytest.fixture(scope="module")
def tiny_corpus():
    spec = ToySpec(n_patients=30, labels=["disc", "bar"], images_per_patient=6,
                   resolution=32, noise_level=0.08, combos=["10", "01"])
    return generate_toy_corpus(spec, seed=5)


def _tiny_schedule(**kw):
    base = dict(batch_size=16, min_images=640, fid_interval=320, phase_images=128,
                fid_n=64, seed=1, max_images=1920)
    base.update(kw)
    return TrainSchedule(**base)


def test_train_gan_step_bookkeeping_and_stream(tiny_corpus):
    topo = cpd_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    checkpoints = list(train_gan(tiny_corpus, topo, _tiny_schedule(), TinyEmbedder()))
    final = checkpoints[-1]
    assert final.stopped_at is not None
    assert final.stopped_at >= 640
    seen = [s for s, _ in final.fid_history]
    assert seen == sorted(set(seen))
    assert all(np.isfinite(f) and f >= 0 for _, f in final.fid_history)


def test_train_gan_equal_step_counts_with_ncritic_one(tiny_corpus):
    from synbench.training.loop import GanTrainer

    topo = cpd_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    trainer = GanTrainer(tiny_corpus, topo, _tiny_schedule(), TinyEmbedder())
    for _ in range(5):
        phase = progressive_phase(topo, trainer.schedule, trainer.images_seen)
        trainer._d_step(phase)
        trainer._g_step(phase)
    assert abs(trainer.d_steps - trainer.g_steps) <= 1


def test_train_gan_deterministic_history(tiny_corpus):
    topo = cpd_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    a = list(train_gan(tiny_corpus, topo, _tiny_schedule(), TinyEmbedder()))[-1]
    b = list(train_gan(tiny_corpus, topo, _tiny_schedule(), TinyEmbedder()))[-1]
    assert a.fid_history == b.fid_history
    assert a.stopped_at == b.stopped_at


def test_progressive_phase_walk():
    topo = prog_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    sched = _tiny_schedule(phase_images=100)
    # stabilize 8, fade 16, stabilize 16, fade 32, stabilize 32
    assert progressive_phase(topo, sched, 0).resolution == 8
    p = progressive_phase(topo, sched, 150)
    assert p.resolution == 16 and 0.0 < p.alpha < 1.0
    assert progressive_phase(topo, sched, 250).alpha == 1.0
    p = progressive_phase(topo, sched, 350)
    assert p.resolution == 32 and p.alpha == pytest.approx(0.5)
    assert progressive_phase(topo, sched, 10_000).resolution == 32


def test_prog_training_runs_through_growth(tiny_corpus):
    topo = prog_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    sched = _tiny_schedule(min_images=768, phase_images=128, fid_interval=256, max_images=1536)
    final = list(train_gan(tiny_corpus, topo, sched, TinyEmbedder()))[-1]
    assert final.stopped_at is not None


def test_run_repetitions_stop_alignment(tiny_corpus):
    topo = cpd_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    results = run_repetitions(tiny_corpus, topo, _tiny_schedule(), TinyEmbedder(), n_seeds=3)
    assert len(results) == 3
    stops = [r.stopped_at for r in results]
    assert all(s == stops[0] for s in stops)


# ------------------------------------------------------------- synthesis


def test_synthesize_fold_preserves_label_multiset(tiny_corpus):
    topo = cpd_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    torch.manual_seed(0)
    from synbench.models import Generator

    g = Generator(topo)
    labels = np.array([[1, 0]] * 3 + [[0, 1]] * 2, dtype=np.uint8)
    fold = synthesize_fold(g, labels, seed=9)
    assert len(fold) == 5
    counts = fold.combo_counts()
    assert counts["10"] == 3 and counts["01"] == 2
    # patient ids are synthetic and unique per record
    assert len(set(r.patient_id for r in fold.records)) == 5
    assert all(r.patient_id.startswith("syn") for r in fold.records)


def test_synthesize_fold_deterministic_and_empty():
    topo = cpd_topology(32, label_dim=2, max_channels=8, latent_dim=8)
    torch.manual_seed(1)
    from synbench.models import Generator

    g = Generator(topo)
    labels = np.array([[1, 0], [0, 1]], dtype=np.uint8)
    a = synthesize_fold(g, labels, seed=4)
    b = synthesize_fold(g, labels, seed=4)
    for ra, rb in zip(a.records, b.records):
        assert np.array_equal(ra.pixels, rb.pixels)
    empty = synthesize_fold(g, np.zeros((0, 2)), seed=4)
    assert len(empty) == 0
