"""Three-phase training schedule, configuration and checkpointing."""

from .config import TrainConfig
from .loop import (
    RecordBank,
    phase1_pretrain_hs,
    phase2_train_ha,
    phase3_joint,
    pretrain_pose_detector,
    run_phases,
    save_sample_grid,
    write_history_csv,
)
from .state import (
    CHECKPOINT_VERSION,
    CheckpointError,
    TrainState,
    init_state,
    load_checkpoint,
    save_checkpoint,
)

__all__ = [
    "CHECKPOINT_VERSION",
    "CheckpointError",
    "RecordBank",
    "TrainConfig",
    "TrainState",
    "init_state",
    "load_checkpoint",
    "phase1_pretrain_hs",
    "phase2_train_ha",
    "phase3_joint",
    "pretrain_pose_detector",
    "run_phases",
    "save_checkpoint",
    "save_sample_grid",
    "write_history_csv",
]
