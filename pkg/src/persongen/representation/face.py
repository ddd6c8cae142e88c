"""Face crop extraction via a non-parametric affine warp on face joints."""

from __future__ import annotations

import numpy as np
import torch

from .. import constants
from .types import FaceCrop, PoseSpec


def _estimate_to_template(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    """Affine (2x3) mapping src points onto dst points.

    Three or more correspondences use least squares; exactly two use a
    closed-form similarity transform.  Returns None when degenerate.
    """
    n = len(src)
    if n < 2:
        return None
    if n == 2:
        s0 = complex(src[0, 0], src[0, 1])
        s1 = complex(src[1, 0], src[1, 1])
        d0 = complex(dst[0, 0], dst[0, 1])
        d1 = complex(dst[1, 0], dst[1, 1])
        if s1 == s0:
            return None
        s = (d1 - d0) / (s1 - s0)
        t = d0 - s * s0
        return np.array(
            [[s.real, -s.imag, t.real], [s.imag, s.real, t.imag]], dtype=np.float64
        )
    a = np.zeros((2 * n, 6), dtype=np.float64)
    b = np.zeros(2 * n, dtype=np.float64)
    a[0::2, 0] = src[:, 0]
    a[0::2, 1] = src[:, 1]
    a[0::2, 2] = 1.0
    a[1::2, 3] = src[:, 0]
    a[1::2, 4] = src[:, 1]
    a[1::2, 5] = 1.0
    b[0::2] = dst[:, 0]
    b[1::2] = dst[:, 1]
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < 6 or not np.all(np.isfinite(sol)):
        return None
    return sol.reshape(2, 3)


def warp_image_affine(
    image: torch.Tensor, affine_inv: np.ndarray, out_size: tuple[int, int]
) -> torch.Tensor:
    """Resample image at affine_inv-mapped output coordinates (bilinear).

    affine_inv maps output (x, y) to input coordinates.  Out-of-bounds
    samples are zero.  Differentiable with respect to image values.
    """
    c, h, w = image.shape
    oh, ow = out_size
    dt = image.dtype if image.dtype.is_floating_point else torch.float32
    ys, xs = torch.meshgrid(
        torch.arange(oh, dtype=dt), torch.arange(ow, dtype=dt), indexing="ij"
    )
    m = torch.as_tensor(affine_inv, dtype=dt)
    sx = m[0, 0] * xs + m[0, 1] * ys + m[0, 2]
    sy = m[1, 0] * xs + m[1, 1] * ys + m[1, 2]

    x0 = torch.floor(sx)
    y0 = torch.floor(sy)
    fx = sx - x0
    fy = sy - y0
    out = torch.zeros((c, oh, ow), dtype=dt)
    img = image.to(dt)
    for dy8, dx8, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (0, 1, fx * (1 - fy)),
        (1, 0, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        xi = x0 + dx8
        yi = y0 + dy8
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        xi_c = xi.clamp(0, w - 1).long()
        yi_c = yi.clamp(0, h - 1).long()
        vals = img[:, yi_c, xi_c]
        out = out + vals * (wgt * inside.to(dt))[None]
    return out


def extract_face(
    image: torch.Tensor,
    pose: PoseSpec,
    crop_size: tuple[int, int] = constants.DEFAULT_FACE_CROP,
) -> FaceCrop:
    """Warp the face region onto a fixed-size template crop.

    The affine is estimated from visible face joints (nose, eyes, ears) to
    their template positions in the crop frame.  Fewer than two visible face
    joints give an invalid, all-zero crop.
    """
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError("image must be [3, H, W]")
    h_f, w_f = crop_size
    vis = pose.visible_mask()
    pts = pose.to_array()[:, :2]
    src = []
    dst = []
    for j, (fx, fy) in zip(constants.FACE_JOINTS, constants.FACE_TEMPLATE):
        if vis[j]:
            src.append(pts[j])
            dst.append((fx * w_f, fy * h_f))
    if len(src) < 2:
        return FaceCrop(torch.zeros((3, h_f, w_f), dtype=image.dtype), valid=False)
    fwd = _estimate_to_template(np.asarray(src), np.asarray(dst))
    if fwd is None:
        return FaceCrop(torch.zeros((3, h_f, w_f), dtype=image.dtype), valid=False)
    m = fwd[:, :2]
    det = float(np.linalg.det(m))
    if abs(det) < 1e-8:
        return FaceCrop(torch.zeros((3, h_f, w_f), dtype=image.dtype), valid=False)
    m_inv = np.linalg.inv(m)
    inv = np.concatenate([m_inv, -m_inv @ fwd[:, 2:]], axis=1)
    return FaceCrop(warp_image_affine(image, inv, (h_f, w_f)), valid=True)
