import math

import numpy as np
import pytest
import torch

from synbench.models import (
    Discriminator,
    Generator,
    ModelError,
    NetworkTopology,
    NormalizationParams,
    conditional_pixel_norm,
    cpd_topology,
    equalized_scale,
    load_checkpoint,
    minibatch_stddev,
    pixel_norm,
    prog_topology,
    progressive_blend,
    projection_score,
    save_checkpoint,
    checkpoint_from_models,
)

torch.manual_seed(0)


# ---------------------------------------------------------------- pixel norm


def test_pixel_norm_all_ones():
    x = torch.ones(1, 5, 1, 1)
    out = pixel_norm(x)
    assert torch.allclose(out, torch.full_like(x, 1.0), atol=1e-6)


def test_pixel_norm_zero_vector_stays_zero():
    x = torch.zeros(1, 4, 2, 2)
    assert pixel_norm(x).abs().max() == 0.0


def test_pixel_norm_hand_case():
    # a=(3,4): mean square 12.5, divisor sqrt(12.5)
    x = torch.tensor([3.0, 4.0])
    out = pixel_norm(x, dim=0)
    assert out[0].item() == pytest.approx(0.84853, abs=1e-5)
    assert out[1].item() == pytest.approx(1.13137, abs=1e-5)


def test_pixel_norm_unit_mean_square():
    rng = torch.Generator().manual_seed(1)
    x = torch.randn(4, 8, 3, 3, generator=rng) * 10
    ms = pixel_norm(x).pow(2).mean(dim=1)
    assert float(ms.min()) >= 1 - 1e-6
    assert float(ms.max()) <= 1 + 1e-6  # float32 rounding headroom


# ------------------------------------------------- conditional pixel norm


def _params(W1, b1, W2, b2):
    return NormalizationParams(
        W1=torch.as_tensor(W1, dtype=torch.float64),
        b1=torch.as_tensor(b1, dtype=torch.float64),
        W2=torch.as_tensor(W2, dtype=torch.float64),
        b2=torch.as_tensor(b2, dtype=torch.float64),
    )


def test_conditional_reduces_to_pixel_norm():
    z = torch.randn(3, dtype=torch.float64)
    y = torch.tensor([1.0, 0.0], dtype=torch.float64)
    x = torch.randn(6, dtype=torch.float64)
    params = _params(np.zeros((6, 5)), np.ones(6), np.zeros((6, 5)), np.zeros(6))
    out = conditional_pixel_norm(x, z, y, params, dim=0)
    assert torch.allclose(out, pixel_norm(x, dim=0), atol=0, rtol=0)


def test_conditional_gamma_zero_gives_constant_beta():
    z = torch.randn(3, dtype=torch.float64)
    y = torch.tensor([0.0, 1.0], dtype=torch.float64)
    c = 2.5
    params = _params(np.zeros((4, 5)), np.zeros(4), np.zeros((4, 5)), np.full(4, c))
    for _ in range(3):
        x = torch.randn(4, dtype=torch.float64)
        out = conditional_pixel_norm(x, z, y, params, dim=0)
        assert torch.allclose(out, torch.full_like(out, c))


def test_conditional_hand_case():
    # pixel_norm((3,4)) * (2,2) + (1,-1)
    x = torch.tensor([3.0, 4.0], dtype=torch.float64)
    z = torch.zeros(1, dtype=torch.float64)
    y = torch.zeros(1, dtype=torch.float64)
    params = _params(np.zeros((2, 2)), np.array([2.0, 2.0]), np.zeros((2, 2)), np.array([1.0, -1.0]))
    out = conditional_pixel_norm(x, z, y, params, dim=0)
    assert out[0].item() == pytest.approx(2.69706, abs=1e-5)
    assert out[1].item() == pytest.approx(1.26274, abs=1e-5)


def test_conditional_rejects_dimension_mismatch():
    x = torch.randn(4, dtype=torch.float64)
    z = torch.randn(2, dtype=torch.float64)
    y = torch.randn(1, dtype=torch.float64)
    params = _params(np.zeros((3, 3)), np.zeros(3), np.zeros((3, 3)), np.zeros(3))
    with pytest.raises(ModelError):
        conditional_pixel_norm(x, z, y, params, dim=0)


# ------------------------------------------------------------- projection


def _psi(w, b):
    def fn(phi):
        return phi @ w + b

    return fn


def test_projection_zero_label_reduces_to_psi():
    phi = torch.randn(5, dtype=torch.float64)
    V = torch.randn(3, 5, dtype=torch.float64)
    w = torch.randn(5, dtype=torch.float64)
    score = projection_score(phi, torch.zeros(3, dtype=torch.float64), V, _psi(w, 0.7))
    assert score.item() == pytest.approx(float(phi @ w + 0.7), abs=1e-12)


def test_projection_orthogonal_embedding_reduces_to_psi():
    phi = torch.tensor([1.0, 0.0], dtype=torch.float64)
    V = torch.tensor([[0.0, 3.0]], dtype=torch.float64)  # V y orthogonal to phi
    w = torch.randn(2, dtype=torch.float64)
    score = projection_score(phi, torch.ones(1, dtype=torch.float64), V, _psi(w, 0.0))
    assert score.item() == pytest.approx(float(phi @ w), abs=1e-12)


def test_projection_hand_case():
    phi = torch.tensor([1.0, 2.0], dtype=torch.float64)
    V = torch.tensor([[3.0, -1.0]], dtype=torch.float64)
    y = torch.ones(1, dtype=torch.float64)
    score = projection_score(phi, y, V, lambda p: torch.tensor(0.5, dtype=torch.float64))
    assert score.item() == pytest.approx(1.5, abs=1e-12)


def test_projection_additive_in_labels():
    rng = torch.Generator().manual_seed(2)
    phi = torch.randn(6, generator=rng, dtype=torch.float64)
    V = torch.randn(4, 6, generator=rng, dtype=torch.float64)
    psi = _psi(torch.randn(6, generator=rng, dtype=torch.float64), 0.3)
    y1 = torch.tensor([1.0, 0.0, 1.0, 0.0], dtype=torch.float64)
    y2 = torch.tensor([0.0, 1.0, 0.0, 0.0], dtype=torch.float64)
    base = psi(phi)
    s1 = projection_score(phi, y1, V, psi) - base
    s2 = projection_score(phi, y2, V, psi) - base
    s12 = projection_score(phi, y1 + y2, V, psi) - base
    assert s12.item() == pytest.approx((s1 + s2).item(), abs=1e-10)


# ------------------------------------------------------ minibatch stddev


def test_minibatch_stddev_identical_batch_is_zero():
    x = torch.ones(4, 3, 2, 2)
    out = minibatch_stddev(x)
    assert out.shape == (4, 4, 2, 2)
    assert float(out[:, -1].abs().max()) <= 1e-4


def test_minibatch_stddev_two_point_closed_form():
    # samples x and x+c: population std is c/2 for every feature
    c = 0.8
    base = torch.randn(1, 3, 4, 4)
    batch = torch.cat([base, base + c], dim=0)
    out = minibatch_stddev(batch)
    assert float(out[:, -1].mean()) == pytest.approx(c / 2, abs=1e-6)


def test_minibatch_stddev_permutation_invariant():
    rng = torch.Generator().manual_seed(3)
    x = torch.randn(6, 2, 2, 2, generator=rng)
    a = minibatch_stddev(x)[0, -1, 0, 0]
    b = minibatch_stddev(x[torch.randperm(6, generator=rng)])[0, -1, 0, 0]
    assert float(a) == pytest.approx(float(b), abs=1e-7)


def test_minibatch_stddev_single_sample_warns_zero():
    with pytest.warns(UserWarning):
        out = minibatch_stddev(torch.randn(1, 2, 2, 2))
    assert float(out[:, -1].abs().max()) == 0.0


# ----------------------------------------------------------------- blend


def test_progressive_blend_endpoints_and_midpoint():
    low = torch.zeros(1, 1, 4, 4)
    high = torch.full((1, 1, 4, 4), 2.0)
    assert torch.equal(progressive_blend(low, high, 0.0), low)
    assert torch.equal(progressive_blend(low, high, 1.0), high)
    assert torch.allclose(progressive_blend(low, high, 0.5), torch.ones_like(low))
    with pytest.raises(ModelError):
        progressive_blend(low, high, 1.5)


# ------------------------------------------------------- equalized scale


def test_equalized_scale_values():
    assert equalized_scale(2) == pytest.approx(1.0)
    assert equalized_scale(8) == pytest.approx(0.5)
    assert equalized_scale(512 * 3 * 3) == pytest.approx(0.02083, abs=1e-5)
    with pytest.raises(ModelError):
        equalized_scale(0)


# ------------------------------------------------------------ topologies


def test_channel_schedule_constant_then_halving():
    t = cpd_topology(256, label_dim=2, max_channels=512)
    sched = t.channel_schedule()
    assert sched[8] == sched[16] == sched[32] == 512
    assert sched[64] == 256 and sched[128] == 128 and sched[256] == 64
    assert t.resolutions() == [8, 16, 32, 64, 128, 256]


def test_topology_rejects_bad_resolution():
    with pytest.raises(ModelError):
        NetworkTopology(target_resolution=48, label_dim=2)


# ------------------------------------------------------------- generators


def _small_cpd(target=32):
    return cpd_topology(target, label_dim=2, max_channels=16, latent_dim=8)


def _small_prog(target=32):
    return prog_topology(target, label_dim=2, max_channels=16, latent_dim=8)


def expected_cpd_generator_params(t):
    """Closed-form parameter count from the channel schedule (output_skip)."""
    sched = t.channel_schedule()
    cond = t.latent_dim + t.label_dim
    c8 = sched[8]
    total = cond * (c8 * 64) + c8 * 64          # stem linear
    total += c8 * c8 * 9 + c8                   # stem conv
    total += 2 * 2 * (cond * c8 + c8)           # two stem conditional norms
    total += c8 * 1 + 1                         # to_image at 8
    for r in t.resolutions()[1:]:
        cin, cout = sched[r // 2], sched[r]
        total += cin * cout * 9 + cout          # conv1 (narrows first)
        total += cout * cout * 9 + cout         # conv2
        total += 2 * 2 * (cond * cout + cout)   # two conditional norms
        total += cout * 1 + 1                   # to_image
    return total


def test_generator_blocks_and_parameter_count():
    t = _small_cpd(32)
    g = Generator(t)
    assert sorted(int(r) for r in g.blocks) == [16, 32]
    assert sorted(int(r) for r in g.to_image) == [8, 16, 32]
    got = sum(p.numel() for p in g.parameters())
    assert got == expected_cpd_generator_params(t)


def test_generator_output_shape_and_range():
    for t in (_small_cpd(32), _small_prog(32)):
        g = Generator(t)
        z = torch.randn(5, t.latent_dim)
        y = torch.randint(0, 2, (5, t.label_dim)).float()
        img = g(z, y)
        assert img.shape == (5, 1, 32, 32)
        assert float(img.min()) >= -1.0 and float(img.max()) <= 1.0


def test_prog_generator_fade_matches_blend():
    torch.manual_seed(123)
    t = _small_prog(32)
    g = Generator(t)
    # keep pre-activation outputs in tanh's invertible region
    with torch.no_grad():
        for conv in g.to_image.values():
            conv.weight.mul_(0.05)
    z = torch.randn(2, t.latent_dim)
    y = torch.zeros(2, t.label_dim)
    low = g(z, y, resolution=16)
    full = g(z, y, alpha=1.0, resolution=32)
    faded = g(z, y, alpha=0.0, resolution=32)
    # alpha=0 output equals the upsampled 16px image (same tanh squash)
    up = torch.nn.functional.interpolate(torch.atanh(low.clamp(-0.999, 0.999)),
                                         scale_factor=2, mode="nearest")
    assert torch.allclose(faded, torch.tanh(up), atol=1e-5)
    assert not torch.allclose(full, faded)


def test_cpd_generator_conditioning_is_live():
    t = _small_cpd(32)
    g = Generator(t)
    z = torch.randn(1, t.latent_dim)
    a = g(z, torch.tensor([[1.0, 0.0]]))
    b = g(z, torch.tensor([[0.0, 1.0]]))
    assert float((a - b).abs().max()) > 0.0


def test_cpd_generator_disabled_conditioning_ignores_labels():
    t = _small_cpd(32)
    g = Generator(t)
    with torch.no_grad():
        for module in g.modules():
            if module.__class__.__name__ == "ConditionalPixelNorm":
                module.to_gamma.weight.zero_()
                module.to_beta.weight.zero_()
        # cut the label slice of the stem input as well
        g.input_linear.weight[:, t.latent_dim:] = 0.0
    z = torch.randn(1, t.latent_dim)
    a = g(z, torch.tensor([[1.0, 0.0]]))
    b = g(z, torch.tensor([[0.0, 1.0]]))
    assert torch.equal(a, b)


# --------------------------------------------------------- discriminators


def test_cpd_discriminator_score_shape_and_projection():
    t = _small_cpd(32)
    d = Discriminator(t)
    img = torch.randn(4, 1, 32, 32)
    y = torch.randint(0, 2, (4, t.label_dim)).float()
    score, logits = d(img, y)
    assert score.shape == (4,)
    assert logits is None
    with pytest.raises(ModelError):
        d(img, None)


def test_prog_discriminator_aux_logits():
    t = _small_prog(32)
    d = Discriminator(t)
    img = torch.randn(3, 1, 32, 32)
    score, logits = d(img)
    assert score.shape == (3,)
    assert logits.shape == (3, t.label_dim)
    # low-resolution phase with fade
    img16 = torch.randn(3, 1, 16, 16)
    score16, _ = d(img16, alpha=0.5, resolution=16)
    assert score16.shape == (3,)


def test_discriminator_rejects_wrong_side():
    t = _small_cpd(32)
    d = Discriminator(t)
    with pytest.raises(ModelError):
        d(torch.randn(2, 1, 16, 16), torch.zeros(2, 2))


# ------------------------------------------------------------ checkpoints


def test_checkpoint_round_trip(tmp_path):
    t = _small_cpd(32)
    g, d = Generator(t), Discriminator(t)
    ckpt = checkpoint_from_models(t, g, d, images_seen=128, fid_history=[(64, 3.0), (128, 2.5)])
    path = save_checkpoint(ckpt, tmp_path / "model.npz")
    loaded = load_checkpoint(path)
    assert loaded.topology == t
    assert loaded.images_seen == 128
    assert loaded.fid_history == [(64, 3.0), (128, 2.5)]
    g2 = loaded.build_generator()
    z = torch.randn(2, t.latent_dim)
    y = torch.zeros(2, t.label_dim)
    with torch.no_grad():
        assert torch.allclose(g(z, y), g2(z, y), atol=1e-6)


def test_checkpoint_rejects_topology_mismatch(tmp_path):
    t = _small_cpd(32)
    ckpt = checkpoint_from_models(t, Generator(t), Discriminator(t), 0, [])
    path = save_checkpoint(ckpt, tmp_path / "model.npz")
    with pytest.raises(ModelError):
        load_checkpoint(path, expect=_small_prog(32))


def test_checkpoint_rejects_unordered_history():
    t = _small_cpd(32)
    with pytest.raises(ModelError):
        checkpoint_from_models(t, Generator(t), Discriminator(t), 0, [(10, 1.0), (10, 0.9)])


# -------------------------------------------------------- gradient checks


def _numeric_grad(fn, tensors, step=1e-4):
    grads = []
    for t in tensors:
        g = torch.zeros_like(t)
        flat = t.view(-1)
        gflat = g.view(-1)
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + step
            hi = fn().item()
            flat[i] = orig - step
            lo = fn().item()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2 * step)
        grads.append(g)
    return grads


def _rel_err(a, b):
    denom = max(float(a.abs().max()), float(b.abs().max()), 1e-8)
    return float((a - b).abs().max()) / denom


def test_conditional_pixel_norm_gradcheck():
    rng = torch.Generator().manual_seed(4)
    x = torch.randn(8, generator=rng, dtype=torch.float64, requires_grad=True)
    z = torch.randn(3, generator=rng, dtype=torch.float64, requires_grad=True)
    y = torch.tensor([1.0, 0.0], dtype=torch.float64, requires_grad=True)
    W1 = torch.randn(8, 5, generator=rng, dtype=torch.float64, requires_grad=True)
    b1 = torch.randn(8, generator=rng, dtype=torch.float64, requires_grad=True)
    W2 = torch.randn(8, 5, generator=rng, dtype=torch.float64, requires_grad=True)
    b2 = torch.randn(8, generator=rng, dtype=torch.float64, requires_grad=True)
    probe = torch.randn(8, generator=rng, dtype=torch.float64)

    def objective():
        params = NormalizationParams(W1=W1, b1=b1, W2=W2, b2=b2)
        return (conditional_pixel_norm(x, z, y, params, dim=0) * probe).sum()

    leaves = [x, z, y, W1, b1, W2, b2]
    out = objective()
    analytic = torch.autograd.grad(out, leaves)
    numeric = _numeric_grad(objective, [t.data for t in leaves])
    for a, n in zip(analytic, numeric):
        assert _rel_err(a, n) <= 1e-3


def test_projection_score_gradcheck():
    rng = torch.Generator().manual_seed(5)
    phi = torch.randn(8, generator=rng, dtype=torch.float64, requires_grad=True)
    V = torch.randn(3, 8, generator=rng, dtype=torch.float64, requires_grad=True)
    w = torch.randn(8, generator=rng, dtype=torch.float64, requires_grad=True)
    y = torch.tensor([1.0, 0.0, 1.0], dtype=torch.float64)

    def objective():
        return projection_score(phi, y, V, lambda p: p @ w)

    leaves = [phi, V, w]
    analytic = torch.autograd.grad(objective(), leaves)
    numeric = _numeric_grad(objective, [t.data for t in leaves])
    for a, n in zip(analytic, numeric):
        assert _rel_err(a, n) <= 1e-3
