"""Training state container and versioned checkpointing."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from ..nets import (
    AppearanceDiscriminator,
    AppearanceGenerator,
    FaceDiscriminator,
    PoseRegressor,
    SemanticDiscriminator,
    SemanticGenerator,
)
from .config import TrainConfig

CHECKPOINT_VERSION = "persongen-checkpoint-v1"


class CheckpointError(RuntimeError):
    pass


@dataclass
class TrainState:
    config: TrainConfig
    nets: dict[str, torch.nn.Module]
    optims: dict[str, torch.optim.Optimizer]
    phase: int = 0
    global_step: int = 0
    completed: set[int] = field(default_factory=set)
    history: list[dict] = field(default_factory=list)
    pose_detector: PoseRegressor | None = None

    def net_parameter_hash(self, name: str) -> str:
        import hashlib

        h = hashlib.sha256()
        sd = self.nets[name].state_dict()
        for key in sorted(sd):
            h.update(key.encode())
            h.update(sd[key].detach().cpu().numpy().tobytes())
        return h.hexdigest()


def _make_optimizer(net: torch.nn.Module, config: TrainConfig) -> torch.optim.Optimizer:
    return torch.optim.Adam(
        net.parameters(), lr=config.learning_rate, betas=(config.beta1, config.beta2)
    )


def init_state(config: TrainConfig) -> TrainState:
    """Seeded network + optimizer construction."""
    torch.manual_seed(config.seed)
    nets: dict[str, torch.nn.Module] = {}
    if config.use_parsing:
        nets["hs"] = SemanticGenerator(config.semantic_config())
        nets["ds"] = SemanticDiscriminator(config.semantic_config())
    nets["ha"] = AppearanceGenerator(config.appearance_config())
    nets["da"] = AppearanceDiscriminator(config.appearance_config())
    nets["df"] = FaceDiscriminator(config.appearance_config())
    optims = {name: _make_optimizer(net, config) for name, net in nets.items()}
    return TrainState(config=config, nets=nets, optims=optims)


def save_checkpoint(state: TrainState, path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": state.config.as_dict(),
        "phase": state.phase,
        "global_step": state.global_step,
        "completed": sorted(state.completed),
        "nets": {k: v.state_dict() for k, v in state.nets.items()},
        "optims": {k: v.state_dict() for k, v in state.optims.items()},
        "pose_detector": state.pose_detector.state_dict() if state.pose_detector else None,
        "history": state.history,
        "torch_rng": torch.get_rng_state(),
    }
    torch.save(payload, path)


def load_checkpoint(path) -> TrainState:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as e:  # corrupt / not a checkpoint
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(payload, dict) or payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version mismatch: expected {CHECKPOINT_VERSION}, "
            f"got {payload.get('version') if isinstance(payload, dict) else type(payload)}"
        )
    config = TrainConfig(**payload["config"])
    state = init_state(config)
    for name, sd in payload["nets"].items():
        state.nets[name].load_state_dict(sd)
    for name, sd in payload["optims"].items():
        state.optims[name].load_state_dict(sd)
    if payload["pose_detector"] is not None:
        det = PoseRegressor()
        det.load_state_dict(payload["pose_detector"])
        state.pose_detector = det.freeze()
    state.phase = payload["phase"]
    state.global_step = payload["global_step"]
    state.completed = set(payload["completed"])
    state.history = payload["history"]
    torch.set_rng_state(payload["torch_rng"])
    return state
