"""Directory-level evaluation producing the standard metric report."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np
import torch
from PIL import Image

from .inception import inception_score
from .ssim import DEFAULT_SIGMA, DEFAULT_WINDOW, mask_ssim, ssim


@dataclass
class MetricReport:
    is_mean: float
    is_std: float
    ssim: float
    mask_is: float | None
    mask_ssim: float | None
    n_images: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def masked_metric(metric: str, *args, **kwargs):
    """Dispatch the background-excluded variant of a metric.

    "ssim": masked_metric("ssim", img_a, img_b, mask) restricts window
    aggregation to the foreground; "is": masked_metric("is", images, masks,
    classifier, splits) zeroes background pixels before classification.
    """
    if metric == "ssim":
        return mask_ssim(*args, **kwargs)
    if metric == "is":
        return _mask_inception(*args, **kwargs)
    raise ValueError(f"unknown masked metric '{metric}'")


def _mask_inception(images, masks, classifier, splits: int = 10):
    imgs = torch.as_tensor(np.asarray(images), dtype=torch.float32)
    m = torch.as_tensor(np.asarray(masks), dtype=torch.float32)
    if m.ndim == 3:
        m = m[:, None]
    if m.shape[0] != imgs.shape[0] or m.shape[2:] != imgs.shape[2:]:
        raise ValueError(f"masks {tuple(m.shape)} do not align with images {tuple(imgs.shape)}")
    if not torch.all(m.flatten(1).sum(dim=1) > 0):
        raise ValueError("every mask must have non-empty foreground")
    return inception_score(imgs * m, classifier, splits)


def _load_image_01(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float64) / 255.0
    return arr.transpose(2, 0, 1)


def _load_mask(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"), dtype=np.float64)
    return (arr > 127).astype(np.float64)


def evaluate_directories(
    generated_dir,
    reference_dir,
    masks_dir=None,
    classifier=None,
    splits: int = 10,
    window: int = DEFAULT_WINDOW,
    sigma: float = DEFAULT_SIGMA,
) -> MetricReport:
    """Score generated images against same-named references.

    IS is computed over the generated set; SSIM is averaged over pairs.
    With a masks directory, the background-excluded variants are added.
    """
    if classifier is None:
        from .inception import RandomConvClassifier

        classifier = RandomConvClassifier()
    names = sorted(
        n for n in os.listdir(generated_dir)
        if n.lower().endswith(".png") and os.path.isfile(os.path.join(reference_dir, n))
    )
    if not names:
        raise ValueError("no generated/reference filename overlap")
    gen = [_load_image_01(os.path.join(generated_dir, n)) for n in names]
    ref = [_load_image_01(os.path.join(reference_dir, n)) for n in names]
    masks = None
    if masks_dir is not None:
        masks = [_load_mask(os.path.join(masks_dir, n)) for n in names]

    gen_t = torch.as_tensor(np.stack(gen), dtype=torch.float32)
    is_mean, is_std = inception_score(gen_t, classifier, splits)
    ssim_vals = [ssim(g, r, window=window, sigma=sigma) for g, r in zip(gen, ref)]
    mask_is_val = None
    mask_ssim_val = None
    if masks is not None:
        mask_is_val = _mask_inception(np.stack(gen), np.stack(masks), classifier, splits)[0]
        mask_ssim_val = float(
            np.mean([
                mask_ssim(g, r, m, window=window, sigma=sigma)
                for g, r, m in zip(gen, ref, masks)
            ])
        )
    return MetricReport(
        is_mean=is_mean,
        is_std=is_std,
        ssim=float(np.mean(ssim_vals)),
        mask_is=mask_is_val,
        mask_ssim=mask_ssim_val,
        n_images=len(names),
    )
