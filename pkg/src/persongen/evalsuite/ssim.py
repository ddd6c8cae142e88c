"""Structural similarity with a Gaussian window.

Implemented directly from the classic definition; statistics are computed
over valid (fully inside) windows only, so no boundary padding is invented.
The masked variant aggregates only windows whose center pixel is foreground.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

DEFAULT_WINDOW = 11
DEFAULT_SIGMA = 1.5
K1, K2 = 0.01, 0.03


def _gaussian_kernel(window: int, sigma: float) -> np.ndarray:
    half = (window - 1) / 2.0
    coords = np.arange(window) - half
    g = np.exp(-(coords**2) / (2 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _to_channels(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return arr[None]
    if arr.ndim == 3:
        # accept [C, H, W] or [H, W, C] with small C
        if arr.shape[0] in (1, 3) and arr.shape[0] <= arr.shape[2]:
            return arr
        if arr.shape[2] in (1, 3):
            return arr.transpose(2, 0, 1)
        return arr
    raise ValueError(f"image must be 2-D or 3-D, got shape {arr.shape}")


def _ssim_map(a: np.ndarray, b: np.ndarray, window: int, sigma: float, data_range: float):
    kernel = _gaussian_kernel(window, sigma)

    def filt(x):
        return convolve2d(x, kernel, mode="valid")

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(
    img_a,
    img_b,
    window: int = DEFAULT_WINDOW,
    sigma: float = DEFAULT_SIGMA,
    data_range: float = 1.0,
) -> float:
    """Mean SSIM between two equal-shape images (channels averaged)."""
    a = _to_channels(img_a)
    b = _to_channels(img_b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if window > min(a.shape[1], a.shape[2]):
        raise ValueError(f"window {window} larger than image {a.shape[1:]}")
    values = [float(_ssim_map(a[c], b[c], window, sigma, data_range).mean()) for c in range(a.shape[0])]
    return float(np.mean(values))


def mask_ssim(
    img_a,
    img_b,
    mask,
    window: int = DEFAULT_WINDOW,
    sigma: float = DEFAULT_SIGMA,
    data_range: float = 1.0,
) -> float:
    """SSIM aggregated over windows centered on foreground pixels."""
    a = _to_channels(img_a)
    b = _to_channels(img_b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    m = np.asarray(mask)
    if m.ndim == 3:
        m = m[0]
    if m.shape != a.shape[1:]:
        raise ValueError(f"mask shape {m.shape} does not match image {a.shape[1:]}")
    if not (m > 0).any():
        raise ValueError("mask-SSIM needs a non-empty foreground mask")
    half = window // 2
    centers = (m > 0)[half : m.shape[0] - (window - 1 - half), half : m.shape[1] - (window - 1 - half)]
    if not centers.any():
        raise ValueError("no foreground window centers inside the valid region")
    values = []
    for c in range(a.shape[0]):
        smap = _ssim_map(a[c], b[c], window, sigma, data_range)
        values.append(float(smap[centers].mean()))
    return float(np.mean(values))
