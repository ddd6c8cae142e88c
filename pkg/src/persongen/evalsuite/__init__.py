"""Quantitative evaluation: IS, SSIM and their background-excluded variants."""

from .inception import (
    OneHotCycleClassifier,
    RandomConvClassifier,
    UniformClassifier,
    inception_score,
    make_classifier,
)
from .report import MetricReport, evaluate_directories, masked_metric
from .ssim import mask_ssim, ssim

__all__ = [
    "MetricReport",
    "OneHotCycleClassifier",
    "RandomConvClassifier",
    "UniformClassifier",
    "evaluate_directories",
    "inception_score",
    "make_classifier",
    "mask_ssim",
    "masked_metric",
    "ssim",
]
