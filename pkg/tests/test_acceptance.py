"""Acceptance criteria, one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The desk-scale training
criteria share one full training run (session fixtures); everything here is
CPU-only.  Paper-scale scores are out of reach at desk scale by design, so
the gates are property-based plus directional checks on the synthetic
corpus.
"""

import math
import time

import numpy as np
import pytest
import torch

from persongen.corpus import (
    load_doll_meta,
    make_synthetic_corpus,
    render_doll,
    sample_outfit,
    sample_pose_params,
    scan_corpus,
)
from persongen.evalsuite import (
    OneHotCycleClassifier,
    UniformClassifier,
    inception_score,
    mask_ssim,
    ssim,
)
from persongen.nets import (
    adversarial_loss,
    appearance_adv_loss,
    ce_loss,
    content_loss,
    face_loss,
    ha_forward,
    hs_forward,
    make_extractor,
    pose_loss,
    semantic_style_loss,
)
from persongen.pair_miner import (
    MiningRecord,
    PairIndex,
    estimate_part_affine,
    mine_pairs,
    mining_records_from_corpus,
)
from persongen.representation import (
    SemanticMap,
    decompose_body_parts,
    encode_pose_mask,
)
from persongen.service import InferenceEngine
from persongen.trainer import (
    TrainConfig,
    init_state,
    load_checkpoint,
    phase1_pretrain_hs,
    phase2_train_ha,
    phase3_joint,
    pretrain_pose_detector,
    save_checkpoint,
)
from persongen.trainer.loop import RecordBank

from conftest import make_pose
from oracles import brute_mine_fast, finite_diff_grad, max_rel_err

DESK_SEED = 11


def _verdict(name: str, detail: str):
    print(f"\n[PASS] {name}: {detail}")


# --------------------------------------------------------------------------
# shared desk-scale fixtures


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    make_synthetic_corpus(root, n_outfits=25, poses_per_outfit=8, seed=DESK_SEED)
    records, errors = scan_corpus(root)
    assert not errors
    train = [r for r in records if r.split == "train"]
    test = [r for r in records if r.split == "test"]
    return root, records, train, test


@pytest.fixture(scope="session")
def desk_index(desk_corpus):
    _, _, train, _ = desk_corpus
    return mine_pairs(mining_records_from_corpus(train), threshold=2.0, workers=2)


def _content_probe(state, bank, test_records, extractor, n=8):
    """Cycle-reconstruction content loss on a fixed held-out probe set."""
    total = 0.0
    with torch.no_grad():
        for i in range(n):
            ref = test_records[i % len(test_records)]
            tgt = test_records[(i + 3) % len(test_records)]
            e_r, e_t = bank.entry(ref), bank.entry(tgt)
            pred = hs_forward(
                state.nets["hs"], e_r["parse"][None], e_r["heatmap"][None],
                e_r["mask"][None], e_t["heatmap"][None], e_t["mask"][None],
            ).data
            hard = torch.nn.functional.one_hot(pred.argmax(dim=1), 10).permute(0, 3, 1, 2).float()
            fwd = ha_forward(
                state.nets["ha"], e_r["image"][None], e_r["parse"][None],
                e_r["heatmap"][None], pred, e_t["heatmap"][None],
            )
            pred_back = hs_forward(
                state.nets["hs"], hard, e_t["heatmap"][None], e_t["mask"][None],
                e_r["heatmap"][None], e_r["mask"][None],
            ).data
            back = ha_forward(
                state.nets["ha"], fwd, hard, e_t["heatmap"][None], pred_back, e_r["heatmap"][None],
            )
            total += float(content_loss(back, e_r["image"][None], extractor))
    return total / n


@pytest.fixture(scope="session")
def trained_full(desk_corpus, desk_index):
    """Phases 1-3 at desk scale; returns state + timing + content probes."""
    root, records, train, test = desk_corpus
    cfg = TrainConfig(base_channels=16, batch_size=4, seed=0)
    state = init_state(cfg)
    t0 = time.time()
    phase1_pretrain_hs(state, train, desk_index, steps=1500)
    pretrain_pose_detector(state, train)
    bank = RecordBank(records, cfg)
    extractor = make_extractor(cfg.extractor, seed=cfg.seed)
    probe_before = _content_probe(state, bank, test, extractor)
    phase2_train_ha(state, train, steps=1000)
    probe_after = _content_probe(state, bank, test, extractor)
    hs_hash_after_p2 = state.net_parameter_hash("hs")
    phase3_joint(state, train, steps=200)
    return {
        "state": state,
        "seconds": time.time() - t0,
        "probe_before": probe_before,
        "probe_after": probe_after,
        "hs_hash_after_p2": hs_hash_after_p2,
    }


@pytest.fixture(scope="session")
def trained_baseline(desk_corpus):
    """The no-parsing ablation baseline (mask-style loss), phase-2 schedule."""
    _, records, train, _ = desk_corpus
    cfg = TrainConfig(base_channels=16, batch_size=4, seed=0, use_parsing=False)
    state = init_state(cfg)
    state.completed.add(1)  # phase 1 does not apply without parsing
    phase2_train_ha(state, train, steps=1000)
    return state


# --------------------------------------------------------------------------
# [PRIMARY] pair-miner oracle equivalence


def test_pair_miner_oracle_equivalence():
    rng = np.random.default_rng(1234)
    corpora = []
    for _ in range(20):
        n = int(rng.integers(8, 33))
        recs = []
        for i in range(n):
            outfit = sample_outfit(rng)
            _, labels, pose = render_doll(outfit, sample_pose_params(rng))
            recs.append(MiningRecord(f"r{i:02d}", pose, SemanticMap.from_labels(labels)))
        corpora.append(recs)

    mining_seconds = 0.0
    compared = 0
    for recs in corpora:
        t0 = time.time()
        index = mine_pairs(recs, threshold=3.0)
        mining_seconds += time.time() - t0
        prepared = [
            (r.image_id, r.pose, r.parse.data.numpy(), decompose_body_parts(r.parse, r.pose))
            for r in recs
        ]
        ref = brute_mine_fast(prepared, threshold=3.0)
        assert set(index.entries) == set(ref)
        for sid, e in index.entries.items():
            assert e.matched_id == ref[sid][0], f"match mismatch for {sid}"
            assert abs(e.cost - ref[sid][1]) <= 1e-9, f"cost mismatch for {sid}"
            compared += 1
    assert mining_seconds < 10.0, f"mining took {mining_seconds:.1f}s (budget 10s)"
    _verdict(
        "pair-miner oracle equivalence",
        f"20 corpora, {compared} matches identical, costs within 1e-9, "
        f"mining {mining_seconds:.1f}s < 10s",
    )


# --------------------------------------------------------------------------
# [PRIMARY] affine solver exactness


def test_affine_solver_exactness():
    rng = np.random.default_rng(99)
    worst = 0.0
    done = 0
    while done < 100:
        src = rng.uniform(0, 64, size=(4, 2))
        spread = abs(np.linalg.det(np.array([src[1] - src[0], src[2] - src[0]])))
        if spread < 1.0:
            continue
        true = rng.uniform(-2, 2, size=(2, 3))
        true[:, 2] = rng.uniform(-20, 20, size=2)
        dst = src @ true[:, :2].T + true[:, 2]
        got = estimate_part_affine(src, dst)
        assert got.valid
        worst = max(worst, float(np.abs(got.matrix - true).max()))
        done += 1
    assert worst < 1e-6
    _verdict("affine solver exactness", f"100 random true affines recovered, max |err| = {worst:.2e} < 1e-6")


# --------------------------------------------------------------------------
# [PRIMARY] loss gradient suite


def _smooth_conv(out_channels=6, seed=0):
    g = torch.Generator().manual_seed(seed)
    conv = torch.nn.Conv2d(3, out_channels, 3, padding=1)
    with torch.no_grad():
        conv.weight.copy_(torch.randn(conv.weight.shape, generator=g) * 0.3)
        conv.bias.copy_(torch.randn(conv.bias.shape, generator=g) * 0.1)
    stub = torch.nn.Sequential(conv, torch.nn.Tanh()).double()
    for p in stub.parameters():
        p.requires_grad_(False)
    return stub


def _smooth_disc(seed=0):
    g = torch.Generator().manual_seed(seed)
    conv = torch.nn.Conv2d(3, 1, 3, padding=1)
    with torch.no_grad():
        conv.weight.copy_(torch.randn(conv.weight.shape, generator=g) * 0.3)
        conv.bias.zero_()
    stub = torch.nn.Sequential(conv, torch.nn.Sigmoid()).double()
    for p in stub.parameters():
        p.requires_grad_(False)
    return stub


def _grad_check(name, f, x, results):
    x = x.clone().requires_grad_(True)
    f(x).backward()
    numeric = finite_diff_grad(f, x.detach().clone())
    err = max_rel_err(x.grad, numeric)
    assert err < 1e-3, f"{name} gradient relative error {err:.2e} >= 1e-3"
    results.append((name, err))


def test_loss_gradient_suite():
    t0 = time.time()
    torch.manual_seed(0)
    results = []

    # weighted cross entropy (w.r.t. pre-softmax logits)
    gt = torch.zeros(1, 10, 4, 4, dtype=torch.float64)
    gt[0, 3] = 1.0
    mask = (torch.rand(1, 1, 4, 4) > 0.5).double()
    _grad_check(
        "cross-entropy",
        lambda x: ce_loss(torch.softmax(x, dim=1), gt, mask),
        torch.randn(1, 10, 4, 4, dtype=torch.float64),
        results,
    )

    # semantic adversarial loss (both sides, through sigmoid)
    fixed = torch.rand(8, dtype=torch.float64) * 0.8 + 0.1
    _grad_check(
        "semantic-adv-D",
        lambda x: adversarial_loss(torch.sigmoid(x), fixed)[0],
        torch.randn(8, dtype=torch.float64),
        results,
    )
    _grad_check(
        "semantic-adv-G",
        lambda x: adversarial_loss(fixed, torch.sigmoid(x))[1],
        torch.randn(8, dtype=torch.float64),
        results,
    )

    # two-image appearance adversarial term
    _grad_check(
        "appearance-adv",
        lambda x: appearance_adv_loss(fixed, torch.sigmoid(x), torch.sigmoid(x * 0.5))[0],
        torch.randn(8, dtype=torch.float64),
        results,
    )

    # pose loss through a smooth frozen detector
    det = _smooth_conv(out_channels=18, seed=1)
    tgt = torch.rand(1, 18, 6, 6, dtype=torch.float64)
    frozen_back = torch.rand(1, 3, 6, 6, dtype=torch.float64)
    _grad_check(
        "pose",
        lambda x: pose_loss(x, frozen_back, tgt, tgt, det),
        torch.rand(1, 3, 6, 6, dtype=torch.float64),
        results,
    )

    # cycle content loss
    ext = _smooth_conv(seed=2)
    ref = torch.rand(1, 3, 6, 6, dtype=torch.float64)
    _grad_check(
        "content",
        lambda x: content_loss(x, ref, ext),
        torch.rand(1, 3, 6, 6, dtype=torch.float64),
        results,
    )

    # semantic-aware style loss
    parse = torch.zeros(10, 6, 6, dtype=torch.float64)
    parse[2, :3] = 1.0
    parse[4, 3:] = 1.0
    other = torch.rand(3, 6, 6, dtype=torch.float64)
    _grad_check(
        "style",
        lambda x: semantic_style_loss(x, other, parse, parse, ext),
        torch.rand(3, 6, 6, dtype=torch.float64),
        results,
    )

    # face adversarial loss (generator side through the crops)
    pose = make_pose({0: (4, 4), 14: (3, 3), 15: (5, 3)}, (8, 8))
    disc = _smooth_disc(seed=3)
    frozen = torch.rand(3, 8, 8, dtype=torch.float64)
    _grad_check(
        "face-adv",
        lambda x: face_loss(frozen, x, frozen, pose, pose, disc, crop_size=(6, 6))[1],
        torch.rand(3, 8, 8, dtype=torch.float64),
        results,
    )

    elapsed = time.time() - t0
    assert elapsed < 60.0, f"gradient suite took {elapsed:.1f}s (budget 60s)"
    detail = ", ".join(f"{n} {e:.1e}" for n, e in results)
    _verdict("loss gradient suite", f"{detail}; {elapsed:.1f}s < 60s")


# --------------------------------------------------------------------------
# [PRIMARY] analytic loss values


def test_analytic_loss_values():
    checks = []

    pred = torch.full((1, 10, 4, 4), 0.1, dtype=torch.float64)
    gt = torch.zeros(1, 10, 4, 4, dtype=torch.float64)
    gt[0, 2] = 1.0
    v = float(ce_loss(pred, gt, torch.zeros(1, 1, 4, 4, dtype=torch.float64)))
    assert abs(v - math.log(10)) < 1e-6
    checks.append(f"uniform CE = ln10 ({v:.6f})")
    v = float(ce_loss(pred, gt, torch.ones(1, 1, 4, 4, dtype=torch.float64)))
    assert abs(v - 2 * math.log(10)) < 1e-6
    checks.append("masked CE = 2 ln10")

    half = torch.full((1, 1, 3, 3), 0.5, dtype=torch.float64)
    ld, lg = adversarial_loss(half, half)
    assert abs(float(ld) - 2 * math.log(2)) < 1e-6
    assert abs(float(lg) - math.log(2)) < 1e-6
    checks.append("D=0.5: loss_D = 2 ln2, loss_G = ln2")
    ld, lg = appearance_adv_loss(half, half, half)
    assert abs(float(ld) - 4 * math.log(2)) < 1e-6
    checks.append("two-image adv D=0.5: loss_D = 4 ln2")

    class HalfD(torch.nn.Module):
        def forward(self, x):
            return torch.full((x.shape[0], 1, 2, 2), 0.5, dtype=x.dtype)

    img = torch.rand(3, 32, 32, dtype=torch.float64)
    pose = make_pose({0: (16, 16), 14: (12, 12), 15: (20, 12)}, (32, 32))
    ld, lg = face_loss(img, img, img, pose, pose, HalfD(), crop_size=(8, 8))
    assert abs(float(ld) - 4 * math.log(2)) < 1e-6
    checks.append("face adv D=0.5: loss_D = 4 ln2")

    ext = make_extractor("identity")
    a = torch.rand(3, 8, 8, dtype=torch.float64)
    parse = torch.zeros(10, 8, 8, dtype=torch.float64)
    parse[3] = 1.0
    assert float(content_loss(a, a.clone(), ext)) <= 1e-9
    assert float(semantic_style_loss(a, a.clone(), parse, parse.clone(), ext)) <= 1e-9
    x = np.random.default_rng(0).random((16, 16))
    assert abs(ssim(x, x.copy()) - 1.0) <= 1e-9
    checks.append("identical-input content/style/SSIM = 0-or-1 exactly")

    _verdict("analytic loss values", "; ".join(checks))


# --------------------------------------------------------------------------
# [PRIMARY] Algorithm-1 conformance


def test_algorithm1_conformance(desk_corpus, desk_index, tmp_path):
    _, records, train, _ = desk_corpus
    cfg = TrainConfig(
        base_channels=12, batch_size=2, seed=5,
        pose_detector_steps=5, phase2_steps=3,
    )

    # phase-2 freeze leaves H_S bit-identical
    state = init_state(cfg)
    phase1_pretrain_hs(state, train, desk_index, steps=5)
    hs_before = state.net_parameter_hash("hs")
    phase2_train_ha(state, train)
    assert state.net_parameter_hash("hs") == hs_before

    # one joint step changes at least one H_S parameter
    phase3_joint(state, train, steps=1)
    assert state.net_parameter_hash("hs") != hs_before

    # checkpoint resume reproduces the unbroken run's loss at step 100
    full = phase1_pretrain_hs(init_state(cfg), train, desk_index, steps=100)
    half = phase1_pretrain_hs(init_state(cfg), train, desk_index, steps=50)
    path = tmp_path / "mid.pt"
    save_checkpoint(half, path)
    resumed = load_checkpoint(path)
    phase1_pretrain_hs(resumed, train, desk_index, steps=50)
    full_losses = [r["total"] for r in full.history]
    resumed_losses = [r["total"] for r in resumed.history]
    assert resumed_losses == full_losses, "resumed run diverged from unbroken run"
    assert resumed.net_parameter_hash("hs") == full.net_parameter_hash("hs")
    _verdict(
        "Algorithm-1 conformance",
        "phase-2 freeze bit-identical; phase-3 step reaches H_S; "
        f"resume reproduces loss at step 100 exactly ({full_losses[-1]:.6f})",
    )


# --------------------------------------------------------------------------
# [PRIMARY] desk-scale training smoke


def test_desk_training_smoke_overfit(desk_corpus, desk_index):
    _, records, train, _ = desk_corpus
    sid = sorted(desk_index.entries)[0]
    single = PairIndex(entries={sid: desk_index.entries[sid]})
    cfg = TrainConfig(base_channels=24, batch_size=4, seed=0)
    state = init_state(cfg)
    t0 = time.time()
    phase1_pretrain_hs(state, train, single, steps=500)
    ce_final = state.history[-1]["ce"]
    assert ce_final < 0.1, f"single-pair overfit ce {ce_final:.3f} >= 0.1 after 500 steps"
    _verdict(
        "desk smoke: phase-1 overfit",
        f"single mined pair, 500 steps, ce = {ce_final:.4f} < 0.1 ({time.time()-t0:.0f}s)",
    )


def test_desk_training_smoke_phase2_content(trained_full):
    before = trained_full["probe_before"]
    after = trained_full["probe_after"]
    drop = 1.0 - after / before
    assert drop >= 0.5, f"content probe dropped only {drop*100:.0f}% (< 50%)"
    _verdict(
        "desk smoke: phase-2 content",
        f"held-out cycle content loss {before:.4f} -> {after:.4f} ({drop*100:.0f}% >= 50%)",
    )


def test_desk_training_smoke_iou(desk_corpus, trained_full):
    root, records, _, test = desk_corpus
    state = trained_full["state"]
    engine = InferenceEngine(state, records)
    rng = np.random.default_rng(123)
    ious = []
    for _ in range(50):
        ref = test[int(rng.integers(0, len(test)))]
        tgt = test[int(rng.integers(0, len(test)))]
        if tgt.image_id == ref.image_id:
            continue
        outfit, _ = load_doll_meta(root, ref.image_id)
        _, tgt_pose_params = load_doll_meta(root, tgt.image_id)
        _, gt_labels, _ = render_doll(outfit, tgt_pose_params)
        prep = engine._prep_record(ref)
        hm, m = engine._pose_tensors(tgt.pose)
        with torch.no_grad():
            hard = engine.predict_parse(prep, hm, m)
        pred_fg = hard.argmax(dim=0).numpy() > 0
        gt_fg = gt_labels > 0
        ious.append((pred_fg & gt_fg).sum() / (pred_fg | gt_fg).sum())
    mean_iou = float(np.mean(ious))
    total_min = trained_full["seconds"] / 60
    assert mean_iou >= 0.6, f"pose-transfer parse IoU {mean_iou:.3f} < 0.6"
    assert trained_full["seconds"] < 1800, f"training took {total_min:.1f} min (budget 30)"
    _verdict(
        "desk smoke: post-phase-3 parse IoU",
        f"foreground IoU {mean_iou:.3f} >= 0.6 over {len(ious)} held-out transfers; "
        f"full pipeline {total_min:.1f} min < 30 min",
    )


# --------------------------------------------------------------------------
# trained-model sanity: self-transfer reconstructs the reference better than
# it matches any other record (desk-corpus check of the texture-transfer
# identity example)


def test_texture_transfer_reconstruction_identity(desk_corpus, trained_full):
    from persongen.corpus import load_record_image

    _, records, _, test = desk_corpus
    engine = InferenceEngine(trained_full["state"], records)
    ref = test[0]
    recon, _ = engine.texture_transfer(ref, ref)
    recon01 = recon.astype(np.float64).transpose(2, 0, 1) / 255.0
    own = load_record_image(ref).astype(np.float64).transpose(2, 0, 1) / 255.0
    s_own = ssim(recon01, own)
    others = []
    for other in test[1:10]:
        img = load_record_image(other).astype(np.float64).transpose(2, 0, 1) / 255.0
        others.append(ssim(recon01, img))
    assert s_own > max(others), f"self-reconstruction SSIM {s_own:.3f} <= best other {max(others):.3f}"
    _verdict(
        "texture-transfer reconstruction identity",
        f"SSIM(recon, self) = {s_own:.3f} > best other record {max(others):.3f}",
    )


# --------------------------------------------------------------------------
# [PRIMARY] metric correctness


def test_metric_correctness():
    x = np.random.default_rng(5).random((3, 24, 24))
    assert ssim(x, x.copy()) == 1.0

    imgs = torch.rand(12, 3, 8, 8)
    mean, _ = inception_score(imgs, UniformClassifier(), splits=2)
    assert abs(mean - 1.0) < 1e-6
    c = 6
    mean_c, _ = inception_score(torch.rand(c, 3, 8, 8), OneHotCycleClassifier(c), splits=1)
    assert abs(mean_c - c) < 1e-6 * c

    a = np.random.default_rng(6).random((16, 16))
    b = np.random.default_rng(7).random((16, 16))
    full = np.ones((16, 16))
    assert abs(mask_ssim(a, b, full) - ssim(a, b)) < 1e-9
    _verdict(
        "metric correctness",
        f"SSIM(x,x)=1; IS(uniform)=1, IS(one-hot,n=C)={mean_c:.6f}=C; full-mask mask-SSIM == SSIM",
    )


# --------------------------------------------------------------------------
# [PRIMARY] ablation direction (semantic parsing beats the no-parsing baseline)


def test_ablation_direction(desk_corpus, trained_full, trained_baseline):
    root, records, _, test = desk_corpus
    cfg = trained_full["state"].config
    engine_full = InferenceEngine(trained_full["state"], records)
    engine_base = InferenceEngine(trained_baseline, records)
    rng = np.random.default_rng(77)
    full_scores, base_scores = [], []
    for _ in range(50):
        ref = test[int(rng.integers(0, len(test)))]
        tgt = test[int(rng.integers(0, len(test)))]
        if tgt.image_id == ref.image_id:
            tgt = test[(test.index(tgt) + 1) % len(test)]
        outfit, _ = load_doll_meta(root, ref.image_id)
        _, tgt_pose_params = load_doll_meta(root, tgt.image_id)
        gt_img, _, gt_pose = render_doll(outfit, tgt_pose_params)
        pm = encode_pose_mask(gt_pose, cfg.limb_radius, cfg.dilation_radius).data[0].numpy()
        gt01 = gt_img.astype(np.float64).transpose(2, 0, 1) / 255.0
        gen_f = engine_full.pose_transfer(ref, tgt.pose).astype(np.float64).transpose(2, 0, 1) / 255.0
        gen_b = engine_base.pose_transfer(ref, tgt.pose).astype(np.float64).transpose(2, 0, 1) / 255.0
        full_scores.append(mask_ssim(gen_f, gt01, pm))
        base_scores.append(mask_ssim(gen_b, gt01, pm))
    mean_full = float(np.mean(full_scores))
    mean_base = float(np.mean(base_scores))
    assert mean_full > mean_base, (
        f"parsing pipeline mask-SSIM {mean_full:.4f} not above baseline {mean_base:.4f}"
    )
    _verdict(
        "ablation direction",
        f"mask-SSIM vs ground truth over 50 held-out transfers: "
        f"parsing {mean_full:.4f} > baseline {mean_base:.4f}",
    )
