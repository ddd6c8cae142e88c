"""Pluggable frozen feature extractors and the pose regressor.

The perceptual extractor and the pose detector are injection points: tests
use identity / seeded-conv stubs, production can plug a pretrained backbone.
"""

from __future__ import annotations

import torch
from torch import nn

from .. import constants


class IdentityExtractor(nn.Module):
    """Passes images through unchanged; the simplest test stub."""

    def forward(self, x):
        return x


class RandomConvExtractor(nn.Module):
    """Frozen random conv features at the input resolution.

    Deterministic for a given seed; stands in for an early pretrained conv
    block where downloading weights is not an option.
    """

    def __init__(self, out_channels: int = 8, seed: int = 0, in_channels: int = 3):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        conv = nn.Conv2d(in_channels, out_channels, 3, padding=1)
        with torch.no_grad():
            conv.weight.copy_(torch.randn(conv.weight.shape, generator=gen) * 0.2)
            conv.bias.zero_()
        self.conv = conv
        self.act = nn.ReLU()
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, x):
        return self.act(self.conv(x))


class Vgg16Conv21Extractor(nn.Module):
    """conv2_1 features of an ImageNet-pretrained VGG16 (needs torchvision
    weights on disk or a download path)."""

    def __init__(self):
        super().__init__()
        try:
            from torchvision.models import vgg16
        except ImportError as e:
            raise RuntimeError("torchvision is required for the vgg16 extractor") from e
        # conv2_1 = features[5] (first conv after the initial pool), ReLU at 6
        self.features = vgg16(weights="IMAGENET1K_V1").features[:7]
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, x):
        # generator range [-1, 1] -> rough ImageNet normalization
        x = (x + 1.0) / 2.0
        mean = torch.tensor([0.485, 0.456, 0.406], device=x.device).view(1, 3, 1, 1)
        std = torch.tensor([0.229, 0.224, 0.225], device=x.device).view(1, 3, 1, 1)
        return self.features((x - mean) / std)


def make_extractor(name: str, seed: int = 0) -> nn.Module:
    if name == "identity":
        return IdentityExtractor()
    if name == "conv":
        return RandomConvExtractor(seed=seed)
    if name == "vgg16":
        return Vgg16Conv21Extractor()
    raise ValueError(f"unknown extractor '{name}' (expected identity|conv|vgg16)")


class PoseRegressor(nn.Module):
    """Small image -> 18-channel heatmap regressor.

    Pretrained on the corpus then frozen; it anchors the pose loss, so it
    must stay differentiable with respect to its input.
    """

    def __init__(self, width: int = 32):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(3, width, 5, padding=2),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, width, 3, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, width, 3, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, constants.NUM_JOINTS, 3, padding=1),
        )

    def forward(self, x):
        return self.net(x)

    def freeze(self):
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()
        return self
