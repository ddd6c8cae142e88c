"""Semantic generative network: parse + pose -> parse under a new pose.

Two encoders (source parse branch, target pose branch) meet at the
bottleneck; the decoder upsamples with skip connections from the target-pose
branch only, so spatial detail is anchored to the target pose rather than
copied from the source layout.  Softmax head yields a soft semantic map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

from .. import constants
from ..representation import SemanticMap
from .blocks import Encoder, PatchDiscriminator, conv_block, up_block, weights_init_normal


@dataclass
class SemanticNetConfig:
    base_channels: int = 24
    depth: int = 2
    lambda_ce: float = 10.0
    input_resolution: tuple[int, int] = (64, 48)
    disc_base_channels: int = 32

    def __post_init__(self):
        if self.depth < 2:
            raise ValueError("depth must be >= 2")
        if self.lambda_ce <= 0:
            raise ValueError("lambda_ce must be positive")


@dataclass
class SemanticPrediction:
    """Batched soft semantic maps [B, L, H, W] (softmax-normalized)."""

    data: torch.Tensor

    def maps(self) -> list[SemanticMap]:
        return [SemanticMap(self.data[i].detach(), mode="soft") for i in range(self.data.shape[0])]


PARSE_CH = constants.NUM_LABELS
POSE_CH = constants.NUM_JOINTS


class SemanticGenerator(nn.Module):
    def __init__(self, config: SemanticNetConfig):
        super().__init__()
        self.config = config
        base, depth = config.base_channels, config.depth
        self.enc_source = Encoder(PARSE_CH + POSE_CH + 1, base, depth)
        self.enc_pose = Encoder(POSE_CH + 1, base, depth)
        chans = self.enc_source.out_channels
        self.fuse = conv_block(2 * chans[-1], chans[-1])
        ups = []
        mixes = []
        for lvl in range(depth, 0, -1):
            ups.append(up_block(chans[lvl], chans[lvl - 1]))
            mixes.append(conv_block(2 * chans[lvl - 1], chans[lvl - 1]))
        self.ups = nn.ModuleList(ups)
        self.mixes = nn.ModuleList(mixes)
        self.head = nn.Conv2d(chans[0], PARSE_CH, 3, padding=1)
        self.apply(weights_init_normal)

    def forward(self, src_parse, src_pose, src_mask, tgt_pose, tgt_mask):
        src_feats = self.enc_source(torch.cat([src_parse, src_pose, src_mask], dim=1))
        pose_feats = self.enc_pose(torch.cat([tgt_pose, tgt_mask], dim=1))
        x = self.fuse(torch.cat([src_feats[-1], pose_feats[-1]], dim=1))
        for i, (up, mix) in enumerate(zip(self.ups, self.mixes)):
            x = up(x)
            skip = pose_feats[len(pose_feats) - 2 - i]
            x = mix(torch.cat([x, skip], dim=1))
        return torch.softmax(self.head(x), dim=1)


class SemanticDiscriminator(PatchDiscriminator):
    """Judges (semantic map, target pose heatmap) pairs."""

    def __init__(self, config: SemanticNetConfig):
        super().__init__(PARSE_CH + POSE_CH, base=config.disc_base_channels, n_down=3)
        self.apply(weights_init_normal)


def _as_batched(t: torch.Tensor, name: str, channels: int) -> torch.Tensor:
    if t.ndim == 3:
        t = t[None]
    if t.ndim != 4 or t.shape[1] != channels:
        raise ValueError(f"{name} must be [B, {channels}, H, W], got {tuple(t.shape)}")
    return t


def hs_forward(
    model: SemanticGenerator,
    src_parse: torch.Tensor,
    src_pose: torch.Tensor,
    src_mask: torch.Tensor,
    tgt_pose: torch.Tensor,
    tgt_mask: torch.Tensor,
) -> SemanticPrediction:
    """Run the semantic generative network on (possibly batched) tensors.

    All spatial sizes must equal the configured input resolution.
    """
    src_parse = _as_batched(src_parse, "src_parse", PARSE_CH)
    src_pose = _as_batched(src_pose, "src_pose", POSE_CH)
    src_mask = _as_batched(src_mask, "src_mask", 1)
    tgt_pose = _as_batched(tgt_pose, "tgt_pose", POSE_CH)
    tgt_mask = _as_batched(tgt_mask, "tgt_mask", 1)
    res = tuple(model.config.input_resolution)
    for name, t in (
        ("src_parse", src_parse),
        ("src_pose", src_pose),
        ("src_mask", src_mask),
        ("tgt_pose", tgt_pose),
        ("tgt_mask", tgt_mask),
    ):
        if tuple(t.shape[2:]) != res:
            raise ValueError(f"{name} resolution {tuple(t.shape[2:])} != configured {res}")
    return SemanticPrediction(model(src_parse, src_pose, src_mask, tgt_pose, tgt_mask))
