"""Shared conv building blocks for generators and discriminators."""

from __future__ import annotations

import torch
from torch import nn


def weights_init_normal(m):
    classname = m.__class__.__name__
    if "Conv" in classname and hasattr(m, "weight") and m.weight is not None:
        nn.init.normal_(m.weight.data, 0.0, 0.02)
        if m.bias is not None:
            nn.init.constant_(m.bias.data, 0.0)


def conv_block(in_ch, out_ch):
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, padding=1),
        nn.InstanceNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


def down_block(in_ch, out_ch):
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 4, stride=2, padding=1),
        nn.InstanceNorm2d(out_ch),
        nn.LeakyReLU(0.2, inplace=True),
    )


def up_block(in_ch, out_ch):
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1),
        nn.InstanceNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


class Encoder(nn.Module):
    """Conv stem plus `depth` stride-2 downsampling stages.

    forward returns the feature pyramid [full-res, ..., bottleneck].
    """

    def __init__(self, in_ch: int, base: int, depth: int):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(in_ch, base, 3, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        )
        downs = []
        ch = base
        for _ in range(depth):
            downs.append(down_block(ch, min(ch * 2, base * 8)))
            ch = min(ch * 2, base * 8)
        self.downs = nn.ModuleList(downs)
        self.out_channels = [base] + [min(base * 2 ** (i + 1), base * 8) for i in range(depth)]

    def forward(self, x) -> list[torch.Tensor]:
        feats = [self.stem(x)]
        for down in self.downs:
            feats.append(down(feats[-1]))
        return feats


class PatchDiscriminator(nn.Module):
    """Sigmoid-terminated patch discriminator with n_down stride-2 stages."""

    def __init__(self, in_ch: int, base: int = 32, n_down: int = 3):
        super().__init__()
        layers = [nn.Conv2d(in_ch, base, 4, stride=2, padding=1), nn.LeakyReLU(0.2, inplace=True)]
        ch = base
        for _ in range(n_down - 1):
            nxt = min(ch * 2, base * 8)
            layers += [
                nn.Conv2d(ch, nxt, 4, stride=2, padding=1),
                nn.InstanceNorm2d(nxt),
                nn.LeakyReLU(0.2, inplace=True),
            ]
            ch = nxt
        layers += [nn.Conv2d(ch, 1, 3, padding=1), nn.Sigmoid()]
        self.net = nn.Sequential(*layers)

    def forward(self, x):
        return self.net(x)
