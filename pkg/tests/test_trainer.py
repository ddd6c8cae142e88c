import copy

import numpy as np
import pytest
import torch

from persongen.corpus import scan_corpus
from persongen.pair_miner import PairIndex, mine_pairs, mining_records_from_corpus
from persongen.trainer import (
    CheckpointError,
    TrainConfig,
    init_state,
    load_checkpoint,
    phase1_pretrain_hs,
    phase2_train_ha,
    phase3_joint,
    save_checkpoint,
    write_history_csv,
)


def tiny_config(**kw):
    defaults = dict(
        phase1_steps=3,
        phase2_steps=2,
        phase3_steps=2,
        pose_detector_steps=4,
        base_channels=12,
        batch_size=2,
        seed=0,
    )
    defaults.update(kw)
    return TrainConfig(**defaults)


@pytest.fixture(scope="module")
def mined(small_corpus):
    root, records = small_corpus
    index = mine_pairs(mining_records_from_corpus(records), threshold=2.0)
    return records, index


class TestConfig:
    def test_text_roundtrip(self):
        cfg = tiny_config(lambda_ce=3.5, extractor="identity")
        again = TrainConfig.from_text(cfg.to_text())
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig.from_text("no_such_key = 1\n")

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(phase1_steps=-1)

    def test_face_loss_auto_by_resolution(self):
        assert not tiny_config(height=64, width=48).face_loss_enabled()
        assert tiny_config(height=128, width=96).face_loss_enabled()
        assert tiny_config(use_face_loss="on").face_loss_enabled()


class TestPhase1:
    def test_empty_index_rejected(self, mined):
        records, _ = mined
        state = init_state(tiny_config())
        with pytest.raises(ValueError, match="mine-pairs"):
            phase1_pretrain_hs(state, records, PairIndex())

    def test_zero_steps_marks_phase(self, mined):
        records, index = mined
        state = init_state(tiny_config(phase1_steps=0))
        before = state.net_parameter_hash("hs")
        phase1_pretrain_hs(state, records, index)
        assert state.phase == 1 and 1 in state.completed
        assert state.net_parameter_hash("hs") == before
        assert state.history == []

    def test_fixed_seed_identical_loss_curves(self, mined):
        records, index = mined
        a = phase1_pretrain_hs(init_state(tiny_config()), records, index)
        b = phase1_pretrain_hs(init_state(tiny_config()), records, index)
        assert [r["total"] for r in a.history] == [r["total"] for r in b.history]

    def test_losses_recorded(self, mined):
        records, index = mined
        state = phase1_pretrain_hs(init_state(tiny_config()), records, index)
        assert len(state.history) == 3
        assert {"phase", "step", "d", "adv", "ce", "total"} <= set(state.history[0])


class TestPhaseOrdering:
    def test_phase2_requires_phase1(self, mined):
        records, _ = mined
        state = init_state(tiny_config())
        with pytest.raises(ValueError, match="phase 1"):
            phase2_train_ha(state, records)

    def test_phase3_requires_phase2(self, mined):
        records, index = mined
        state = phase1_pretrain_hs(init_state(tiny_config()), records, index)
        with pytest.raises(ValueError, match="phase"):
            phase3_joint(state, records)


@pytest.fixture(scope="module")
def trained(mined):
    records, index = mined
    state = init_state(tiny_config())
    phase1_pretrain_hs(state, records, index)
    hs_hash = state.net_parameter_hash("hs")
    ds_hash = state.net_parameter_hash("ds")
    phase2_train_ha(state, records)
    return records, state, hs_hash, ds_hash


class TestFreezeAndJoint:
    def test_phase2_freezes_hs_bitwise(self, trained):
        records, state, hs_hash, ds_hash = trained
        assert state.net_parameter_hash("hs") == hs_hash
        assert state.net_parameter_hash("ds") == ds_hash

    def test_phase2_trains_ha(self, trained):
        records, state, *_ = trained
        fresh = init_state(tiny_config())
        assert state.net_parameter_hash("ha") != fresh.net_parameter_hash("ha")

    def test_phase3_updates_all_five(self, trained):
        records, state, *_ = trained
        state = copy.deepcopy(state)
        hashes = {k: state.net_parameter_hash(k) for k in ("hs", "ds", "ha", "da", "df")}
        phase3_joint(state, records, steps=1)
        changed = {k for k in hashes if state.net_parameter_hash(k) != hashes[k]}
        assert "hs" in changed  # gradient reached the semantic net
        assert {"ds", "ha", "da"} <= changed
        # df only sees gradients when the face loss is active (off at 64x48)

    def test_zero_step_phase2_noop_on_ha(self, mined):
        records, index = mined
        state = phase1_pretrain_hs(init_state(tiny_config(phase2_steps=0)), records, index)
        before = state.net_parameter_hash("ha")
        phase2_train_ha(state, records)
        assert state.net_parameter_hash("ha") == before
        assert state.phase == 2


class TestCheckpoint:
    def test_roundtrip_equality(self, mined, tmp_path):
        records, index = mined
        state = phase1_pretrain_hs(init_state(tiny_config()), records, index)
        path = tmp_path / "ckpt.pt"
        save_checkpoint(state, path)
        again = load_checkpoint(path)
        for name in state.nets:
            assert again.net_parameter_hash(name) == state.net_parameter_hash(name)
        assert again.phase == state.phase
        assert again.global_step == state.global_step
        assert again.history == state.history
        assert again.config == state.config

    def test_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.pt"
        torch.save({"version": "other-format-v9"}, path)
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)

    def test_corrupt_file_rejected(self, tmp_path):
        path = tmp_path / "junk.pt"
        path.write_bytes(b"not a checkpoint at all")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_resume_reproduces_unbroken_run(self, mined, tmp_path):
        records, index = mined
        # unbroken: 6 phase-1 steps
        full = phase1_pretrain_hs(init_state(tiny_config()), records, index, steps=6)
        # broken: 3 steps, save, load, 3 more
        half = phase1_pretrain_hs(init_state(tiny_config()), records, index, steps=3)
        path = tmp_path / "mid.pt"
        save_checkpoint(half, path)
        resumed = load_checkpoint(path)
        phase1_pretrain_hs(resumed, records, index, steps=3)
        assert [r["total"] for r in resumed.history] == [r["total"] for r in full.history]
        for name in full.nets:
            assert resumed.net_parameter_hash(name) == full.net_parameter_hash(name)

    def test_history_csv(self, mined, tmp_path):
        records, index = mined
        state = phase1_pretrain_hs(init_state(tiny_config()), records, index)
        out = tmp_path / "loss.csv"
        write_history_csv(state, out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + len(state.history)
        assert "total" in lines[0]
