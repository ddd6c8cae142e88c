"""Independent brute-force oracles used to freeze expected test values.

Everything here is deliberately written pixel-by-pixel / definitionally,
separate from the library's vectorized implementations.
"""

from __future__ import annotations

import math

import numpy as np
import torch


def brute_dilate(mask: np.ndarray, radius: float) -> np.ndarray:
    """Morphological dilation by a disk, by stamping every foreground pixel."""
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    r = int(math.floor(radius))
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    if dx * dx + dy * dy <= radius * radius:
                        yy, xx = y + dy, x + dx
                        if 0 <= yy < h and 0 <= xx < w:
                            out[yy, xx] = True
    return out


def brute_warp_onehot(onehot: np.ndarray, mask: np.ndarray, affine: np.ndarray) -> np.ndarray:
    """Full-grid nearest-neighbour pull-back of a masked one-hot map.

    affine (2x3) maps source to target pixels; rounding follows the
    documented convention floor(x + 0.5 + 1e-7) (ties toward +inf, stable
    against last-ulp coefficient noise).
    """
    L, h, w = onehot.shape
    m = affine[:, :2]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    t = affine[:, 2]
    out = np.zeros_like(onehot, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            sx, sy = inv @ (np.array([x, y], dtype=np.float64) - t)
            ix = math.floor(sx + 0.5 + 1e-7)
            iy = math.floor(sy + 0.5 + 1e-7)
            if 0 <= ix < w and 0 <= iy < h and mask[iy, ix]:
                out[:, y, x] = onehot[:, iy, ix]
    return out


def brute_alignment_cost(src_onehot, src_parts, cand_onehot, cand_parts, penalty="area"):
    """Channel-space ten-part alignment cost, straight from the definition."""
    total = 0.0
    for j in range(src_parts.parts.shape[0]):
        s_deg = bool(src_parts.degenerate[j])
        c_deg = bool(cand_parts.degenerate[j])
        if s_deg and c_deg:
            continue
        if s_deg or c_deg:
            box = cand_parts.boxes[j] if s_deg else src_parts.boxes[j]
            if penalty == "area":
                total += float((box[2, 0] - box[0, 0]) * (box[2, 1] - box[0, 1]))
            else:
                total += float(penalty)
            continue
        src_box = src_parts.boxes[j]
        cand_box = cand_parts.boxes[j]
        a = np.zeros((8, 6))
        b = np.zeros(8)
        for i in range(4):
            a[2 * i, :3] = [src_box[i, 0], src_box[i, 1], 1.0]
            a[2 * i + 1, 3:] = [src_box[i, 0], src_box[i, 1], 1.0]
            b[2 * i] = cand_box[i, 0]
            b[2 * i + 1] = cand_box[i, 1]
        sol = np.linalg.lstsq(a, b, rcond=None)[0].reshape(2, 3)
        warped = brute_warp_onehot(src_onehot, src_parts.parts[j], sol)
        masked_cand = cand_onehot * cand_parts.parts[j][None]
        total += float(((masked_cand - warped) ** 2).sum())
    return total


def brute_warp_onehot_fast(onehot: np.ndarray, mask: np.ndarray, affine: np.ndarray) -> np.ndarray:
    """Vectorized full-grid variant of brute_warp_onehot (same definition:
    channel-space nearest pull-back over the whole image, no subgrids)."""
    L, h, w = onehot.shape
    m = affine[:, :2]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    t = affine[:, 2]
    gy, gx = np.mgrid[0:h, 0:w].astype(np.float64)
    sx = inv[0, 0] * (gx - t[0]) + inv[0, 1] * (gy - t[1])
    sy = inv[1, 0] * (gx - t[0]) + inv[1, 1] * (gy - t[1])
    ix = np.floor(sx + 0.5 + 1e-7).astype(np.int64)
    iy = np.floor(sy + 0.5 + 1e-7).astype(np.int64)
    ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    ixc, iyc = np.clip(ix, 0, w - 1), np.clip(iy, 0, h - 1)
    present = mask[iyc, ixc] & ok
    return onehot[:, iyc, ixc] * present[None]


def brute_alignment_cost_fast(src_onehot, src_parts, cand_onehot, cand_parts, penalty="area"):
    """brute_alignment_cost with the vectorized full-grid warp; still a
    definitional channel-space computation, independent of the library's
    label-arithmetic subgrid path."""
    total = 0.0
    for j in range(src_parts.parts.shape[0]):
        s_deg = bool(src_parts.degenerate[j])
        c_deg = bool(cand_parts.degenerate[j])
        if s_deg and c_deg:
            continue
        if s_deg or c_deg:
            box = cand_parts.boxes[j] if s_deg else src_parts.boxes[j]
            if penalty == "area":
                total += float((box[2, 0] - box[0, 0]) * (box[2, 1] - box[0, 1]))
            else:
                total += float(penalty)
            continue
        a = np.zeros((8, 6))
        b = np.zeros(8)
        for i in range(4):
            a[2 * i, :3] = [src_parts.boxes[j][i, 0], src_parts.boxes[j][i, 1], 1.0]
            a[2 * i + 1, 3:] = [src_parts.boxes[j][i, 0], src_parts.boxes[j][i, 1], 1.0]
            b[2 * i] = cand_parts.boxes[j][i, 0]
            b[2 * i + 1] = cand_parts.boxes[j][i, 1]
        sol = np.linalg.lstsq(a, b, rcond=None)[0].reshape(2, 3)
        warped = brute_warp_onehot_fast(src_onehot, src_parts.parts[j], sol)
        masked_cand = cand_onehot * cand_parts.parts[j][None]
        total += float(((masked_cand - warped) ** 2).sum())
    return total


def brute_mine_fast(prepared, threshold, penalty="area"):
    """Exhaustive mining using the vectorized definitional cost."""
    matches = {}
    for i, (sid, spose, sone, sparts) in enumerate(prepared):
        best = None
        for k, (cid, cpose, cone, cparts) in enumerate(prepared):
            if k == i:
                continue
            a, b = spose.to_array(), cpose.to_array()
            both = (a[:, 2] > 0) & (b[:, 2] > 0)
            if not both.any():
                continue
            d = np.hypot(a[both, 0] - b[both, 0], a[both, 1] - b[both, 1]).mean()
            if d < threshold:
                continue
            cost = brute_alignment_cost_fast(sone, sparts, cone, cparts, penalty)
            if best is None or (cost, cid) < best:
                best = (cost, cid)
        if best is not None:
            matches[sid] = (best[1], best[0])
    return matches


def brute_mine(prepared, threshold, penalty="area"):
    """O(n^2) exhaustive mining over (id, pose, onehot, parts) tuples."""
    matches = {}
    for i, (sid, spose, sone, sparts) in enumerate(prepared):
        best = None
        for k, (cid, cpose, cone, cparts) in enumerate(prepared):
            if k == i:
                continue
            a, b = spose.to_array(), cpose.to_array()
            both = (a[:, 2] > 0) & (b[:, 2] > 0)
            if not both.any():
                continue
            d = np.hypot(a[both, 0] - b[both, 0], a[both, 1] - b[both, 1]).mean()
            if d < threshold:
                continue
            cost = brute_alignment_cost(sone, sparts, cone, cparts, penalty)
            if best is None or (cost, cid) < best:
                best = (cost, cid)
        if best is not None:
            matches[sid] = (best[1], best[0])
    return matches


def hand_gram(features: np.ndarray) -> np.ndarray:
    """Gram matrix normalized by channels x positions, elementwise loops."""
    c = features.shape[0]
    flat = features.reshape(c, -1)
    n = flat.shape[1]
    g = np.zeros((c, c))
    for i in range(c):
        for j in range(c):
            g[i, j] = float(np.dot(flat[i], flat[j])) / (c * n)
    return g


def finite_diff_grad(f, x: torch.Tensor, eps: float = 1e-4) -> torch.Tensor:
    """Central finite differences of scalar f with respect to tensor x."""
    grad = torch.zeros_like(x, dtype=torch.float64)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.numel()):
        orig = float(flat[i])
        flat[i] = orig + eps
        hi = float(f(x))
        flat[i] = orig - eps
        lo = float(f(x))
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * eps)
    return grad


def max_rel_err(analytic: torch.Tensor, numeric: torch.Tensor) -> float:
    """Elementwise relative error with an absolute floor for near-zeros."""
    a = analytic.detach().double()
    n = numeric.double()
    denom = torch.maximum(a.abs().maximum(n.abs()), torch.tensor(1e-3, dtype=torch.float64))
    return float(((a - n).abs() / denom).max())


def gaussian_heatmap_value(dx: float, dy: float, sigma: float) -> float:
    return math.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
