"""Appearance generative network with deformable part-wise skip connections.

The source branch encodes (image, parse, pose); its skip features are warped
part-by-part onto the target geometry before entering the decoder, so
textures travel with their body parts.  The target branch encodes the
(predicted) target parse and pose.  Output is a tanh image in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .. import constants
from ..pair_miner.affine import PartAffine, invert_affine, rect_affine, scale_affine
from ..representation import PoseSpec, SemanticMap, decompose_body_parts
from ..representation.face import warp_image_affine
from ..representation.parts import pose_part_rectangles
from .blocks import Encoder, PatchDiscriminator, conv_block, up_block, weights_init_normal
from .semantic import PARSE_CH, POSE_CH, _as_batched


@dataclass
class AppearanceNetConfig:
    base_channels: int = 24
    depth: int = 2
    lambda_pose: float = 700.0
    lambda_cont: float = 0.03
    lambda_sty: float = 1.0
    use_face_loss: bool = True
    input_resolution: tuple[int, int] = (64, 48)
    use_parsing: bool = True  # False = ablation baseline without semantic maps
    disc_base_channels: int = 32

    def __post_init__(self):
        if min(self.lambda_pose, self.lambda_cont, self.lambda_sty) < 0:
            raise ValueError("loss weights must be non-negative")


def deformable_skip(
    src_feature: torch.Tensor,
    part_affines: list[PartAffine],
    part_masks: torch.Tensor,
) -> torch.Tensor:
    """Warp each part's masked feature region by its affine; merge by max.

    part_affines and part_masks live at the feature resolution.  Pixels not
    covered by any warped part pass the input feature through unchanged, so
    all-identity affines (and all-degenerate parts) give the identity map.

    All valid parts are warped in one vectorized bilinear gather; since
    warping is linear in the input, warp(feature * mask) is evaluated as the
    per-corner product of gathered feature and mask values, which keeps the
    identity case exact.
    """
    c, h, w = src_feature.shape
    dt = src_feature.dtype
    inv_rows = []
    masks = []
    for j, aff in enumerate(part_affines):
        if aff is None or not aff.valid:
            continue
        mask = part_masks[j].to(dt)
        if float(mask.sum()) == 0.0:
            continue
        inv = invert_affine(aff)
        if not inv.valid:
            continue
        inv_rows.append(torch.as_tensor(inv.matrix, dtype=dt))
        masks.append(mask)
    if not inv_rows:
        return src_feature
    p = len(inv_rows)
    m = torch.stack(inv_rows)  # [P, 2, 3]
    mask_stack = torch.stack(masks)  # [P, h, w]
    gy = torch.arange(h, dtype=dt)[None, :, None]
    gx = torch.arange(w, dtype=dt)[None, None, :]
    sx = m[:, 0, 0, None, None] * gx + m[:, 0, 1, None, None] * gy + m[:, 0, 2, None, None]
    sy = m[:, 1, 0, None, None] * gx + m[:, 1, 1, None, None] * gy + m[:, 1, 2, None, None]
    x0 = sx.floor()
    y0 = sy.floor()
    fx = sx - x0
    fy = sy - y0
    feat_flat = src_feature.reshape(c, -1)
    mask_flat = mask_stack.reshape(p, -1)
    warped = src_feature.new_zeros((c, p, h, w))
    cov = src_feature.new_zeros((p, h, w))
    for dy, dx, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (0, 1, fx * (1 - fy)),
        (1, 0, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        xi = x0 + dx
        yi = y0 + dy
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        idx = (yi.clamp(0, h - 1) * w + xi.clamp(0, w - 1)).long().reshape(p, -1)
        g_mask = torch.gather(mask_flat, 1, idx).reshape(p, h, w)
        g_feat = feat_flat[:, idx.reshape(-1)].reshape(c, p, h, w)
        wm = wgt * inside.to(dt) * g_mask
        warped = warped + g_feat * wm[None]
        cov = cov + wm
    covered = cov > 0.5
    neg = torch.finfo(dt).min
    cand = torch.where(covered[None], warped, torch.full_like(warped, neg))
    combined = cand.max(dim=1).values
    any_cov = covered.any(dim=0)
    return torch.where(any_cov[None], combined, src_feature)


@dataclass
class DeformSpec:
    """Per-item part warp: pixel-space affines + source part masks [10, H, W]."""

    affines: list[PartAffine]
    src_masks: np.ndarray

    def at_scale(self, level: int, size: tuple[int, int]) -> tuple[list[PartAffine], torch.Tensor]:
        factor = 0.5 ** level
        affs = [scale_affine(a, factor) for a in self.affines]
        m = torch.from_numpy(self.src_masks.astype(np.float32))
        # any-coverage downsampling keeps thin limbs alive at feature scale
        pooled = torch.nn.functional.adaptive_max_pool2d(m, size)
        return affs, pooled


def pose_spec_from_heatmap(heatmap: torch.Tensor) -> PoseSpec:
    """Recover keypoints from a heatmap: per-channel argmax; all-zero
    channels are invisible joints."""
    k, h, w = heatmap.shape
    arr = np.zeros((k, 3), dtype=np.float64)
    flat = heatmap.detach().reshape(k, -1)
    mx, idx = flat.max(dim=1)
    for c in range(k):
        if float(mx[c]) > 0:
            arr[c] = [int(idx[c]) % w, int(idx[c]) // w, 1]
    return PoseSpec.from_array(arr, (h, w))


def compute_deform_spec(
    src_parse: torch.Tensor | None,
    src_pose_hm: torch.Tensor,
    tgt_parse: torch.Tensor | None,
    tgt_pose_hm: torch.Tensor,
) -> DeformSpec:
    """Part affines (source -> target geometry) for one sample.

    Parses are hardened by argmax for part extraction; without parses the
    padded joint rectangles are used on both sides.
    """
    src_pose = pose_spec_from_heatmap(src_pose_hm)
    tgt_pose = pose_spec_from_heatmap(tgt_pose_hm)
    if src_parse is not None and tgt_parse is not None:
        src_map = SemanticMap.from_labels(src_parse.detach().argmax(dim=0).numpy())
        tgt_map = SemanticMap.from_labels(tgt_parse.detach().argmax(dim=0).numpy())
        src_parts = decompose_body_parts(src_map, src_pose)
        tgt_parts = decompose_body_parts(tgt_map, tgt_pose)
    else:
        src_parts = pose_part_rectangles(src_pose)
        tgt_parts = pose_part_rectangles(tgt_pose)
    affines: list[PartAffine] = []
    for j in range(constants.NUM_BODY_PARTS):
        if src_parts.degenerate[j] or tgt_parts.degenerate[j]:
            affines.append(PartAffine.invalid())
        else:
            affines.append(rect_affine(src_parts.boxes[j], tgt_parts.boxes[j]))
    return DeformSpec(affines=affines, src_masks=src_parts.parts)


class AppearanceGenerator(nn.Module):
    def __init__(self, config: AppearanceNetConfig):
        super().__init__()
        self.config = config
        base, depth = config.base_channels, config.depth
        parse_ch = PARSE_CH if config.use_parsing else 0
        self.enc_app = Encoder(3 + parse_ch + POSE_CH, base, depth)
        self.enc_target = Encoder(parse_ch + POSE_CH, base, depth)
        chans = self.enc_app.out_channels
        self.fuse = conv_block(2 * chans[-1], chans[-1])
        ups, mixes = [], []
        for lvl in range(depth, 0, -1):
            ups.append(up_block(chans[lvl], chans[lvl - 1]))
            mixes.append(conv_block(3 * chans[lvl - 1], chans[lvl - 1]))
        self.ups = nn.ModuleList(ups)
        self.mixes = nn.ModuleList(mixes)
        self.head = nn.Conv2d(chans[0], 3, 3, padding=1)
        self.apply(weights_init_normal)

    def forward(self, app_in, target_in, deform_specs: list[DeformSpec] | None):
        app_feats = self.enc_app(app_in)
        tgt_feats = self.enc_target(target_in)
        x = self.fuse(torch.cat([app_feats[-1], tgt_feats[-1]], dim=1))
        depth = len(self.ups)
        for i, (up, mix) in enumerate(zip(self.ups, self.mixes)):
            lvl = depth - 1 - i
            x = up(x)
            skip_t = tgt_feats[lvl]
            skip_a = app_feats[lvl]
            if deform_specs is not None:
                size = tuple(skip_a.shape[2:])
                warped = []
                for b in range(skip_a.shape[0]):
                    affs, masks = deform_specs[b].at_scale(lvl, size)
                    warped.append(deformable_skip(skip_a[b], affs, masks))
                skip_a = torch.stack(warped)
            x = mix(torch.cat([x, skip_t, skip_a], dim=1))
        return torch.tanh(self.head(x))


class AppearanceDiscriminator(PatchDiscriminator):
    """Unconditional patch discriminator on images."""

    def __init__(self, config: AppearanceNetConfig):
        super().__init__(3, base=config.disc_base_channels, n_down=3)
        self.apply(weights_init_normal)


class FaceDiscriminator(PatchDiscriminator):
    def __init__(self, config: AppearanceNetConfig):
        super().__init__(3, base=config.disc_base_channels, n_down=3)
        self.apply(weights_init_normal)


def ha_forward(
    model: AppearanceGenerator,
    ref_image: torch.Tensor,
    ref_parse: torch.Tensor | None,
    ref_pose: torch.Tensor,
    tgt_parse: torch.Tensor | None,
    tgt_pose: torch.Tensor,
) -> torch.Tensor:
    """Generate images under the target parse + pose.

    tgt_parse may be soft; gradients flow into it through the target
    encoder (part warp geometry uses a detached argmax copy).  Returns
    [B, 3, H, W] in [-1, 1].
    """
    use_parsing = model.config.use_parsing
    ref_image = _as_batched(ref_image, "ref_image", 3)
    ref_pose = _as_batched(ref_pose, "ref_pose", POSE_CH)
    tgt_pose = _as_batched(tgt_pose, "tgt_pose", POSE_CH)
    if use_parsing:
        if ref_parse is None or tgt_parse is None:
            raise ValueError("this appearance net is configured with parses as input")
        ref_parse = _as_batched(ref_parse, "ref_parse", PARSE_CH)
        tgt_parse = _as_batched(tgt_parse, "tgt_parse", PARSE_CH)
    res = tuple(model.config.input_resolution)
    tensors = {"ref_image": ref_image, "ref_pose": ref_pose, "tgt_pose": tgt_pose}
    if use_parsing:
        tensors.update({"ref_parse": ref_parse, "tgt_parse": tgt_parse})
    for name, t in tensors.items():
        if tuple(t.shape[2:]) != res:
            raise ValueError(f"{name} resolution {tuple(t.shape[2:])} != configured {res}")
    specs = []
    for b in range(ref_image.shape[0]):
        specs.append(
            compute_deform_spec(
                ref_parse[b] if use_parsing else None,
                ref_pose[b],
                tgt_parse[b] if use_parsing else None,
                tgt_pose[b],
            )
        )
    if use_parsing:
        app_in = torch.cat([ref_image, ref_parse, ref_pose], dim=1)
        target_in = torch.cat([tgt_parse, tgt_pose], dim=1)
    else:
        app_in = torch.cat([ref_image, ref_pose], dim=1)
        target_in = tgt_pose
    return model(app_in, target_in, specs)
