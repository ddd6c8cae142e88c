"""The three training phases: pretrain the semantic network on mined pairs,
train the appearance network with the semantic network frozen, then refine
everything jointly through the soft predicted maps."""

from __future__ import annotations

import csv
import os

import numpy as np
import torch

from ..corpus import load_record_image, load_record_parse, sample_training_batch
from ..nets import (
    PoseRegressor,
    ce_loss,
    content_loss,
    face_loss,
    ha_forward,
    ha_total_loss,
    hs_forward,
    hs_total_loss,
    make_extractor,
    mask_style_loss,
    pose_loss,
    semantic_adv_loss,
    semantic_style_loss,
)
from ..representation import (
    CorpusRecord,
    encode_heatmap,
    encode_pose_mask,
    image_to_tensor,
    tensor_to_image,
)
from ..representation.parts import pose_part_rectangles
from .config import TrainConfig
from .state import TrainState, save_checkpoint


class RecordBank:
    """Caches per-record conditioning tensors for the training loop."""

    def __init__(self, records: list[CorpusRecord], config: TrainConfig):
        self.records = records
        self.config = config
        self.by_id = {r.image_id: r for r in records}
        self._cache: dict[str, dict] = {}

    def entry(self, record: CorpusRecord) -> dict:
        cached = self._cache.get(record.image_id)
        if cached is None:
            cfg = self.config
            cached = {
                "image": image_to_tensor(load_record_image(record)),
                "parse": load_record_parse(record).data,
                "heatmap": encode_heatmap(record.pose, cfg.heatmap_sigma).data,
                "mask": encode_pose_mask(record.pose, cfg.limb_radius, cfg.dilation_radius).data,
                "pose": record.pose,
            }
            self._cache[record.image_id] = cached
        return cached

    def pose_tensors(self, pose) -> tuple[torch.Tensor, torch.Tensor]:
        cfg = self.config
        hm = encode_heatmap(pose, cfg.heatmap_sigma).data
        mask = encode_pose_mask(pose, cfg.limb_radius, cfg.dilation_radius).data
        return hm, mask


def _step_seed(config: TrainConfig, phase: int, step: int):
    return [config.seed, phase, step]


def _maybe_emit(state: TrainState, records, out_dir) -> None:
    """Periodic checkpoint / sample-grid emission during a phase."""
    if not out_dir:
        return
    cfg = state.config
    if cfg.checkpoint_every > 0 and state.global_step % cfg.checkpoint_every == 0:
        save_checkpoint(state, os.path.join(out_dir, f"step_{state.global_step:06d}.pt"))
    if cfg.sample_every > 0 and state.global_step % cfg.sample_every == 0:
        save_sample_grid(state, records, os.path.join(out_dir, f"samples_{state.global_step:06d}.png"))


def pretrain_pose_detector(state: TrainState, records: list[CorpusRecord]) -> PoseRegressor:
    """Fit the small heatmap regressor on the corpus, then freeze it."""
    cfg = state.config
    torch.manual_seed(cfg.seed + 77)
    detector = PoseRegressor()
    optim = torch.optim.Adam(detector.parameters(), lr=2e-3)
    bank = RecordBank(records, cfg)
    batch = min(8, len(records))
    for step in range(cfg.pose_detector_steps):
        rng = np.random.default_rng(_step_seed(cfg, 9, step))
        idx = rng.choice(len(records), size=batch, replace=False)
        images = torch.stack([bank.entry(records[int(i)])["image"] for i in idx])
        target = torch.stack([bank.entry(records[int(i)])["heatmap"] for i in idx])
        optim.zero_grad()
        loss = ((detector(images) - target) ** 2).mean()
        loss.backward()
        optim.step()
    state.pose_detector = detector.freeze()
    return state.pose_detector


def phase1_pretrain_hs(state: TrainState, records, pair_index, steps: int | None = None, out_dir=None) -> TrainState:
    """Alternate D_S / generator updates on mined pseudo pairs."""
    cfg = state.config
    if not cfg.use_parsing:
        raise ValueError("phase 1 does not apply to the no-parsing baseline")
    if pair_index is None or not pair_index.entries:
        raise ValueError("pair index is empty; run mine-pairs first")
    steps = cfg.phase1_steps if steps is None else steps
    bank = RecordBank(records, cfg)
    pool = sorted(pid for pid in pair_index.entries if pid in bank.by_id
                  and pair_index.entries[pid].matched_id in bank.by_id)
    if not pool:
        raise ValueError("pair index does not reference any corpus records")
    hs, ds = state.nets["hs"], state.nets["ds"]
    opt_hs, opt_ds = state.optims["hs"], state.optims["ds"]
    hs.train(), ds.train()
    for _ in range(steps):
        rng = np.random.default_rng(_step_seed(cfg, 1, state.global_step))
        replace = len(pool) < cfg.batch_size
        chosen = rng.choice(len(pool), size=cfg.batch_size, replace=replace)
        src, tgt_parse, tgt_hm, tgt_mask = [], [], [], []
        src_hm, src_mask = [], []
        for i in chosen:
            e_src = bank.entry(bank.by_id[pool[int(i)]])
            e_tgt = bank.entry(bank.by_id[pair_index.entries[pool[int(i)]].matched_id])
            src.append(e_src["parse"])
            src_hm.append(e_src["heatmap"])
            src_mask.append(e_src["mask"])
            tgt_parse.append(e_tgt["parse"])
            tgt_hm.append(e_tgt["heatmap"])
            tgt_mask.append(e_tgt["mask"])
        src = torch.stack(src)
        src_hm, src_mask = torch.stack(src_hm), torch.stack(src_mask)
        tgt_parse = torch.stack(tgt_parse)
        tgt_hm, tgt_mask = torch.stack(tgt_hm), torch.stack(tgt_mask)

        pred = hs_forward(hs, src, src_hm, src_mask, tgt_hm, tgt_mask).data

        opt_ds.zero_grad()
        d_real = ds(torch.cat([tgt_parse, tgt_hm], dim=1))
        d_fake = ds(torch.cat([pred.detach(), tgt_hm], dim=1))
        loss_d, _ = semantic_adv_loss(d_real, d_fake)
        loss_d.backward()
        opt_ds.step()

        opt_hs.zero_grad()
        _, loss_g = semantic_adv_loss(d_real.detach(), ds(torch.cat([pred, tgt_hm], dim=1)))
        ce = ce_loss(pred, tgt_parse, tgt_mask)
        total, report = hs_total_loss(loss_g, ce, cfg.lambda_ce)
        total.backward()
        opt_hs.step()

        state.global_step += 1
        row = {"phase": 1, "step": state.global_step, "d": float(loss_d.detach())}
        row.update(report.as_row())
        state.history.append(row)
        _maybe_emit(state, records, out_dir)
    state.phase = 1
    state.completed.add(1)
    return state


def _freeze(net, flag: bool):
    for p in net.parameters():
        p.requires_grad_(not flag)


def _style_term(cfg, ref_img, fwd, back, ref_parse, pred_fwd, pred_back, poses, extractor):
    """Per-batch-item style term: reference vs forward plus forward vs
    back, with semantic or body-part masks."""
    total = fwd.new_zeros(())
    b = fwd.shape[0]
    for i in range(b):
        if cfg.use_parsing:
            total = total + semantic_style_loss(
                ref_img[i], fwd[i], ref_parse[i], pred_fwd[i], extractor
            )
            total = total + semantic_style_loss(
                fwd[i], back[i], pred_fwd[i], pred_back[i], extractor
            )
        else:
            src_parts = pose_part_rectangles(poses[i][0]).parts
            tgt_parts = pose_part_rectangles(poses[i][1]).parts
            total = total + mask_style_loss(ref_img[i], fwd[i], src_parts, tgt_parts, extractor)
            total = total + mask_style_loss(fwd[i], back[i], tgt_parts, tgt_parts, extractor)
    return total / b


def _cycle_step(state: TrainState, bank: RecordBank, extractor, phase: int):
    """One appearance-training step (phases 2 and 3 share this body)."""
    cfg = state.config
    joint = phase == 3
    use_parsing = cfg.use_parsing
    hs = state.nets.get("hs")
    ha, da, df = state.nets["ha"], state.nets["da"], state.nets["df"]

    batch = sample_training_batch(
        bank.records, None, cfg.batch_size, _step_seed(cfg, phase, state.global_step)
    )
    ref_img, ref_parse, ref_hm, ref_mask = [], [], [], []
    tgt_hm, tgt_mask, poses = [], [], []
    for s in batch:
        e = bank.entry(s.reference)
        ref_img.append(e["image"])
        ref_parse.append(e["parse"])
        ref_hm.append(e["heatmap"])
        ref_mask.append(e["mask"])
        hm, mask = bank.pose_tensors(s.target_pose)
        tgt_hm.append(hm)
        tgt_mask.append(mask)
        poses.append((s.reference.pose, s.target_pose))
    ref_img = torch.stack(ref_img)
    ref_parse = torch.stack(ref_parse)
    ref_hm, ref_mask = torch.stack(ref_hm), torch.stack(ref_mask)
    tgt_hm, tgt_mask = torch.stack(tgt_hm), torch.stack(tgt_mask)

    # predicted target / back parses (soft); joint phase keeps the graph
    if use_parsing:
        with torch.set_grad_enabled(joint):
            pred_fwd = hs_forward(hs, ref_parse, ref_hm, ref_mask, tgt_hm, tgt_mask).data
            hard_fwd = torch.nn.functional.one_hot(
                pred_fwd.detach().argmax(dim=1), pred_fwd.shape[1]
            ).permute(0, 3, 1, 2).float()
            pred_back = hs_forward(hs, hard_fwd, tgt_hm, tgt_mask, ref_hm, ref_mask).data
        fwd = ha_forward(ha, ref_img, ref_parse, ref_hm, pred_fwd, tgt_hm)
        back = ha_forward(ha, fwd, hard_fwd, tgt_hm, pred_back, ref_hm)
    else:
        pred_fwd = pred_back = None
        fwd = ha_forward(ha, ref_img, None, ref_hm, None, tgt_hm)
        back = ha_forward(ha, fwd, None, tgt_hm, None, ref_hm)

    # discriminator updates on detached fakes
    opt_da = state.optims["da"]
    opt_da.zero_grad()
    d_real = da(ref_img)
    ld1, _ = semantic_adv_loss(d_real, da(fwd.detach()))
    ld2, _ = semantic_adv_loss(d_real, da(back.detach()))
    loss_da = ld1 + ld2
    loss_da.backward()
    opt_da.step()

    loss_df = torch.zeros(())
    face_enabled = cfg.face_loss_enabled()
    if face_enabled:
        opt_df = state.optims["df"]
        opt_df.zero_grad()
        acc = fwd.new_zeros(())
        for i in range(fwd.shape[0]):
            ld, _ = face_loss(
                ref_img[i], fwd[i].detach(), back[i].detach(), poses[i][0], poses[i][1], df
            )
            acc = acc + ld
        loss_df = acc / fwd.shape[0]
        if loss_df.requires_grad:
            loss_df.backward()
            opt_df.step()

    if phase == 3 and use_parsing:
        # keep the semantic discriminator in the game: parser outputs real,
        # predictions fake (the generator objective stays L_A^total)
        opt_ds = state.optims["ds"]
        opt_ds.zero_grad()
        ds = state.nets["ds"]
        ds_real = ds(torch.cat([ref_parse, ref_hm], dim=1))
        ds_fake = ds(torch.cat([pred_fwd.detach(), tgt_hm], dim=1))
        loss_ds, _ = semantic_adv_loss(ds_real, ds_fake)
        loss_ds.backward()
        opt_ds.step()

    # generator update
    gen_opts = [state.optims["ha"]] + ([state.optims["hs"]] if joint and use_parsing else [])
    for opt in gen_opts:
        opt.zero_grad()
    _, lg1 = semantic_adv_loss(d_real.detach(), da(fwd))
    _, lg2 = semantic_adv_loss(d_real.detach(), da(back))
    adv_g = lg1 + lg2
    lpose = pose_loss(fwd, back, tgt_hm, ref_hm, state.pose_detector)
    lcont = content_loss(back, ref_img, extractor)
    lsty = _style_term(cfg, ref_img, fwd, back, ref_parse, pred_fwd, pred_back, poses, extractor)
    lface = fwd.new_zeros(())
    if face_enabled:
        for i in range(fwd.shape[0]):
            _, lg = face_loss(ref_img[i], fwd[i], back[i], poses[i][0], poses[i][1], df)
            lface = lface + lg
        lface = lface / fwd.shape[0]
    total, report = ha_total_loss(adv_g, lpose, lcont, lsty, lface, ha.config)
    total.backward()
    for opt in gen_opts:
        opt.step()

    state.global_step += 1
    row = {
        "phase": phase,
        "step": state.global_step,
        "d_a": float(loss_da.detach()),
        "d_f": float(loss_df.detach()),
    }
    row.update(report.as_row())
    state.history.append(row)
    return row


def phase2_train_ha(state: TrainState, records, steps: int | None = None, out_dir=None) -> TrainState:
    """Train the appearance stack with the semantic networks frozen."""
    cfg = state.config
    if cfg.use_parsing and 1 not in state.completed:
        raise ValueError("phase 2 requires a completed phase 1 (load or train it first)")
    steps = cfg.phase2_steps if steps is None else steps
    if state.pose_detector is None:
        pretrain_pose_detector(state, records)
    bank = RecordBank(records, cfg)
    extractor = make_extractor(cfg.extractor, seed=cfg.seed)
    if cfg.use_parsing:
        _freeze(state.nets["hs"], True)
        _freeze(state.nets["ds"], True)
        state.nets["hs"].eval()
    state.nets["ha"].train()
    for _ in range(steps):
        _cycle_step(state, bank, extractor, phase=2)
        _maybe_emit(state, records, out_dir)
    state.phase = 2
    state.completed.add(2)
    return state


def phase3_joint(state: TrainState, records, steps: int | None = None, out_dir=None) -> TrainState:
    """End-to-end refinement: the appearance objective backpropagates
    through the soft predicted semantic maps into the semantic network."""
    cfg = state.config
    if 2 not in state.completed:
        raise ValueError("phase 3 requires completed phases 1 and 2")
    if cfg.use_parsing and 1 not in state.completed:
        raise ValueError("phase 3 requires completed phases 1 and 2")
    steps = cfg.phase3_steps if steps is None else steps
    if state.pose_detector is None:
        pretrain_pose_detector(state, records)
    bank = RecordBank(records, cfg)
    extractor = make_extractor(cfg.extractor, seed=cfg.seed)
    if cfg.use_parsing:
        _freeze(state.nets["hs"], False)
        _freeze(state.nets["ds"], False)
        state.nets["hs"].train()
    for _ in range(steps):
        _cycle_step(state, bank, extractor, phase=3)
        _maybe_emit(state, records, out_dir)
    state.phase = 3
    state.completed.add(3)
    return state


def run_phases(state: TrainState, records, pair_index, phases, out_dir=None) -> TrainState:
    for phase in phases:
        if phase == 1:
            phase1_pretrain_hs(state, records, pair_index, out_dir=out_dir)
        elif phase == 2:
            phase2_train_ha(state, records, out_dir=out_dir)
        elif phase == 3:
            phase3_joint(state, records, out_dir=out_dir)
        else:
            raise ValueError(f"unknown phase {phase}")
        if out_dir:
            save_checkpoint(state, os.path.join(out_dir, f"phase{phase}.pt"))
            write_history_csv(state, os.path.join(out_dir, "loss.csv"))
    return state


def write_history_csv(state: TrainState, path) -> None:
    if not state.history:
        return
    keys = sorted({k for row in state.history for k in row})
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=keys)
        writer.writeheader()
        writer.writerows(state.history)


def save_sample_grid(state: TrainState, records, path, n: int = 4) -> None:
    """Tile a few (reference, generated) pose transfers for eyeballing."""
    from PIL import Image

    cfg = state.config
    bank = RecordBank(records, cfg)
    n = min(n, len(records) - 1)
    cols = []
    with torch.no_grad():
        for i in range(n):
            ref = bank.entry(records[i])
            tgt = bank.entry(records[(i + 1) % len(records)])
            if cfg.use_parsing:
                pred = hs_forward(
                    state.nets["hs"], ref["parse"][None], ref["heatmap"][None],
                    ref["mask"][None], tgt["heatmap"][None], tgt["mask"][None],
                ).data
                hard = torch.nn.functional.one_hot(pred.argmax(dim=1), pred.shape[1])
                hard = hard.permute(0, 3, 1, 2).float()
                gen = ha_forward(
                    state.nets["ha"], ref["image"][None], ref["parse"][None],
                    ref["heatmap"][None], hard, tgt["heatmap"][None],
                )[0]
            else:
                gen = ha_forward(
                    state.nets["ha"], ref["image"][None], None, ref["heatmap"][None],
                    None, tgt["heatmap"][None],
                )[0]
            col = np.concatenate([tensor_to_image(ref["image"]), tensor_to_image(gen)], axis=0)
            cols.append(col)
    Image.fromarray(np.concatenate(cols, axis=1)).save(path)
