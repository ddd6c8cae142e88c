"""Ten-part rigid body decomposition of a semantic map."""

from __future__ import annotations

import numpy as np

from .. import constants
from .types import BodyPartMasks, PoseSpec, SemanticMap


def _box_points(x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64)


def pose_part_rectangles(
    pose: PoseSpec,
    image_size: tuple[int, int] | None = None,
    pad_fraction: float = constants.PART_BOX_PAD,
) -> BodyPartMasks:
    """Part masks from pose alone: the padded joint-spanning rectangles.

    Used where no semantic map is available (the no-parsing baseline).
    """
    h, w = image_size if image_size is not None else pose.image_size
    vis = pose.visible_mask()
    pts = pose.to_array()[:, :2]
    n = constants.NUM_BODY_PARTS
    parts = np.zeros((n, h, w), dtype=bool)
    boxes = np.zeros((n, 4, 2), dtype=np.float64)
    degenerate = np.ones(n, dtype=bool)
    for j, (_, joint_ids, _) in enumerate(constants.BODY_PARTS):
        jsel = [i for i in joint_ids if vis[i]]
        if len(jsel) < 2:
            continue
        p = pts[jsel]
        x0, y0 = p[:, 0].min(), p[:, 1].min()
        x1, y1 = p[:, 0].max(), p[:, 1].max()
        pad = pad_fraction * float(np.hypot(x1 - x0, y1 - y0)) + 1.0
        ix0, iy0 = max(0, int(np.floor(x0 - pad))), max(0, int(np.floor(y0 - pad)))
        ix1, iy1 = min(w - 1, int(np.ceil(x1 + pad))), min(h - 1, int(np.ceil(y1 + pad)))
        if ix1 <= ix0 or iy1 <= iy0:
            continue
        parts[j, iy0 : iy1 + 1, ix0 : ix1 + 1] = True
        boxes[j] = _box_points(ix0, iy0, ix1, iy1)
        degenerate[j] = False
    return BodyPartMasks(parts=parts, boxes=boxes, degenerate=degenerate)


def decompose_body_parts(
    semantic_map: SemanticMap,
    pose: PoseSpec,
    pad_fraction: float = constants.PART_BOX_PAD,
) -> BodyPartMasks:
    """Split a hard semantic map into the ten canonical rigid parts.

    Each part is the intersection of its semantic labels with the rectangle
    spanned by its visible defining joints, padded by pad_fraction of the
    rectangle diagonal.  Parts with fewer than two visible defining joints,
    or whose intersection is empty, are degenerate.
    """
    if semantic_map.mode != "hard":
        raise ValueError("decompose_body_parts requires a hard semantic map")
    h, w = semantic_map.data.shape[1:]
    if (h, w) != tuple(pose.image_size):
        raise ValueError("semantic map and pose image sizes differ")

    labels = semantic_map.to_labels()
    vis = pose.visible_mask()
    pts = pose.to_array()[:, :2]

    n = constants.NUM_BODY_PARTS
    parts = np.zeros((n, h, w), dtype=bool)
    boxes = np.zeros((n, 4, 2), dtype=np.float64)
    degenerate = np.ones(n, dtype=bool)

    for j, (_, joint_ids, label_ids) in enumerate(constants.BODY_PARTS):
        jsel = [i for i in joint_ids if vis[i]]
        if len(jsel) < 2:
            continue
        p = pts[jsel]
        x0, y0 = p[:, 0].min(), p[:, 1].min()
        x1, y1 = p[:, 0].max(), p[:, 1].max()
        pad = pad_fraction * float(np.hypot(x1 - x0, y1 - y0))
        ix0 = max(0, int(np.floor(x0 - pad)))
        iy0 = max(0, int(np.floor(y0 - pad)))
        ix1 = min(w - 1, int(np.ceil(x1 + pad)))
        iy1 = min(h - 1, int(np.ceil(y1 + pad)))
        if ix1 < ix0 or iy1 < iy0:
            continue
        region = np.zeros((h, w), dtype=bool)
        sub = labels[iy0 : iy1 + 1, ix0 : ix1 + 1]
        region[iy0 : iy1 + 1, ix0 : ix1 + 1] = np.isin(sub, label_ids)
        if not region.any():
            continue
        ys, xs = np.nonzero(region)
        if xs.min() == xs.max() or ys.min() == ys.max():
            # zero-area box cannot anchor an affine
            continue
        parts[j] = region
        boxes[j] = _box_points(xs.min(), ys.min(), xs.max(), ys.max())
        degenerate[j] = False

    return BodyPartMasks(parts=parts, boxes=boxes, degenerate=degenerate)
