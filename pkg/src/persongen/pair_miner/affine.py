"""Part-affine estimation and label-map warping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PartAffine:
    """2x3 affine in pixel units; valid=False for degenerate corner sets."""

    matrix: np.ndarray
    valid: bool

    @classmethod
    def identity(cls) -> "PartAffine":
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), valid=True)

    @classmethod
    def invalid(cls) -> "PartAffine":
        return cls(np.zeros((2, 3)), valid=False)


def estimate_part_affine(src_box: np.ndarray, dst_box: np.ndarray) -> PartAffine:
    """Least-squares affine mapping 4 source corners onto 4 destination corners.

    Solves the 8-equation system; exact whenever a true affine relates the
    corner sets.  Degenerate (collinear / zero-area) sources give valid=False.
    """
    src = np.asarray(src_box, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(dst_box, dtype=np.float64).reshape(4, 2)
    a = np.zeros((8, 6), dtype=np.float64)
    b = np.empty(8, dtype=np.float64)
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
        return PartAffine.invalid()
    return PartAffine(sol.reshape(2, 3), valid=True)


def rect_affine(src_box: np.ndarray, dst_box: np.ndarray) -> PartAffine:
    """Closed-form affine between two axis-aligned boxes in canonical corner
    order (tl, tr, br, bl).  Equals the least-squares solve for such boxes."""
    sx0, sy0 = src_box[0]
    sx1, sy1 = src_box[2]
    dx0, dy0 = dst_box[0]
    dx1, dy1 = dst_box[2]
    if sx1 == sx0 or sy1 == sy0:
        return PartAffine.invalid()
    ax = (dx1 - dx0) / (sx1 - sx0)
    ay = (dy1 - dy0) / (sy1 - sy0)
    m = np.array([[ax, 0.0, dx0 - ax * sx0], [0.0, ay, dy0 - ay * sy0]])
    return PartAffine(m, valid=True)


def invert_affine(affine: PartAffine) -> PartAffine:
    if not affine.valid:
        return PartAffine.invalid()
    m = affine.matrix[:, :2]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-12:
        return PartAffine.invalid()
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    t = -inv @ affine.matrix[:, 2]
    return PartAffine(np.concatenate([inv, t[:, None]], axis=1), valid=True)


def scale_affine(affine: PartAffine, factor: float) -> PartAffine:
    """Re-express a pixel-space affine at a scaled resolution (e.g. feature
    maps at 1/stride): coordinates on both sides shrink by factor."""
    if not affine.valid:
        return PartAffine.invalid()
    m = affine.matrix.copy()
    m[:, 2] *= factor
    return PartAffine(m, valid=True)


def warp_mask_values_nn(
    values: np.ndarray,
    presence: np.ndarray,
    affine: PartAffine,
    out_slice: tuple[slice, slice],
):
    """Nearest-neighbour pull-back of (values, presence) under an affine.

    affine maps source to target pixels; each target pixel in out_slice
    samples the source at the rounded inverse-mapped location.  Rounding is
    floor(x + 0.5 + 1e-7): ties go toward +inf, and the epsilon makes the
    tie decision stable against last-ulp noise in the affine coefficients
    (exact .5 offsets arise whenever integer boxes scale by even ratios).
    Returns (warped_values, warped_presence) on the subgrid.
    """
    inv = invert_affine(affine)
    ys, xs = out_slice
    h_sub = ys.stop - ys.start
    w_sub = xs.stop - xs.start
    if not inv.valid:
        return (
            np.zeros((h_sub, w_sub), dtype=values.dtype),
            np.zeros((h_sub, w_sub), dtype=bool),
        )
    gy = np.arange(ys.start, ys.stop, dtype=np.float64)[:, None]
    gx = np.arange(xs.start, xs.stop, dtype=np.float64)[None, :]
    m = inv.matrix
    sx = m[0, 0] * gx + m[0, 1] * gy + m[0, 2]
    sy = m[1, 0] * gx + m[1, 1] * gy + m[1, 2]
    ix = np.floor(sx + 0.5 + 1e-7).astype(np.int64)
    iy = np.floor(sy + 0.5 + 1e-7).astype(np.int64)
    h, w = presence.shape
    inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    ixc = np.clip(ix, 0, w - 1)
    iyc = np.clip(iy, 0, h - 1)
    warped_presence = presence[iyc, ixc] & inside
    warped_values = np.where(warped_presence, values[iyc, ixc], 0)
    return warped_values, warped_presence
