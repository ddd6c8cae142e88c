"""Deterministic encoders from keypoints to dense conditioning tensors."""

from __future__ import annotations

import numpy as np
import torch
from scipy import ndimage

from .. import constants
from .types import PoseHeatmap, PoseMask, PoseSpec


def encode_heatmap(pose: PoseSpec, sigma: float) -> PoseHeatmap:
    """Per-joint Gaussian heatmaps, peak 1 at the rounded keypoint.

    Invisible joints give all-zero channels.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    h, w = pose.image_size
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    data = np.zeros((constants.NUM_JOINTS, h, w), dtype=np.float32)
    for c, kp in enumerate(pose.keypoints):
        if not kp.visible:
            continue
        cx = min(int(np.floor(kp.x + 0.5)), w - 1)
        cy = min(int(np.floor(kp.y + 0.5)), h - 1)
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        data[c] = np.exp(-d2 / (2.0 * sigma * sigma))
    return PoseHeatmap(torch.from_numpy(data))


def _disk(radius: float) -> np.ndarray:
    r = int(np.floor(radius))
    if r < 1:
        return np.ones((1, 1), dtype=bool)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (xx * xx + yy * yy) <= radius * radius


def _segment_distance(h: int, w: int, p0, p1) -> np.ndarray:
    """Distance from every pixel center to the segment p0-p1."""
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    seg2 = dx * dx + dy * dy
    if seg2 == 0:
        return np.hypot(xs - p0[0], ys - p0[1])
    t = ((xs - p0[0]) * dx + (ys - p0[1]) * dy) / seg2
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(xs - (p0[0] + t * dx), ys - (p0[1] + t * dy))


def encode_pose_mask(pose: PoseSpec, limb_radius: float, dilation_radius: float) -> PoseMask:
    """Rasterize limb segments between visible joints, then dilate.

    limb_radius is the capsule radius of each skeleton edge.  Zero visible
    joints give an all-zero mask.
    """
    if limb_radius < 1 or dilation_radius < 0:
        raise ValueError("limb_radius must be >= 1 and dilation_radius >= 0")
    h, w = pose.image_size
    mask = np.zeros((h, w), dtype=bool)
    vis = pose.visible_mask()
    pts = pose.to_array()[:, :2]
    for a, b in constants.SKELETON_EDGES:
        if vis[a] and vis[b]:
            mask |= _segment_distance(h, w, pts[a], pts[b]) <= limb_radius
    if mask.any() and dilation_radius >= 1:
        mask = ndimage.binary_dilation(mask, structure=_disk(dilation_radius))
    return PoseMask(torch.from_numpy(mask[None].astype(np.float32)))
