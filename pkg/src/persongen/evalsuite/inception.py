"""Inception-score style class-diversity metric with pluggable classifiers."""

from __future__ import annotations

import numpy as np
import torch


def inception_score(images, classifier, splits: int = 10) -> tuple[float, float]:
    """exp(mean KL(p(y|x) || p(y))) per split; returns (mean, std) over splits.

    classifier maps a [N, 3, H, W] float tensor to class probabilities
    [N, C].  0 * log 0 terms are treated as zero, so one-hot stubs give the
    analytic values exactly.
    """
    if isinstance(images, (list, tuple)):
        images = torch.stack([torch.as_tensor(im) for im in images])
    n = images.shape[0]
    if splits < 1:
        raise ValueError("splits must be >= 1")
    if n < splits:
        raise ValueError(f"need at least {splits} images for {splits} splits, got {n}")
    with torch.no_grad():
        probs = classifier(images)
    probs = np.asarray(probs.detach().cpu().numpy() if isinstance(probs, torch.Tensor) else probs,
                       dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] != n:
        raise ValueError(f"classifier must return [N, C] probabilities, got {probs.shape}")
    scores = []
    bounds = np.linspace(0, n, splits + 1).astype(int)
    for s in range(splits):
        p = probs[bounds[s] : bounds[s + 1]]
        py = p.mean(axis=0, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, p * (np.log(p) - np.log(py)), 0.0)
        kl = terms.sum(axis=1).mean()
        scores.append(float(np.exp(kl)))
    return float(np.mean(scores)), float(np.std(scores))


class UniformClassifier(torch.nn.Module):
    """Stub: every image gets the uniform class distribution (IS = 1)."""

    def __init__(self, n_classes: int = 10):
        super().__init__()
        self.n_classes = n_classes

    def forward(self, x):
        n = x.shape[0]
        return torch.full((n, self.n_classes), 1.0 / self.n_classes)


class OneHotCycleClassifier(torch.nn.Module):
    """Stub: the i-th image gets one-hot class i mod C (IS = C when n = C)."""

    def __init__(self, n_classes: int):
        super().__init__()
        self.n_classes = n_classes

    def forward(self, x):
        n = x.shape[0]
        out = torch.zeros(n, self.n_classes)
        out[torch.arange(n), torch.arange(n) % self.n_classes] = 1.0
        return out


class RandomConvClassifier(torch.nn.Module):
    """Frozen random conv + softmax head: a deterministic offline classifier
    for smoke evaluations where pretrained weights are unavailable."""

    def __init__(self, n_classes: int = 16, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.conv = torch.nn.Conv2d(3, 16, 5, stride=2, padding=2)
        self.head = torch.nn.Linear(16, n_classes)
        with torch.no_grad():
            for t in (self.conv.weight, self.head.weight):
                t.copy_(torch.randn(t.shape, generator=gen) * 0.5)
            self.conv.bias.zero_()
            self.head.bias.zero_()
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, x):
        feats = torch.relu(self.conv(x)).mean(dim=(2, 3))
        return torch.softmax(self.head(feats), dim=1)


class TorchvisionInceptionClassifier(torch.nn.Module):
    """ImageNet Inception-v3 probabilities (needs torchvision weights);
    images are bilinearly resized to the network's native input."""

    def __init__(self):
        super().__init__()
        from torchvision.models import inception_v3

        self.net = inception_v3(weights="IMAGENET1K_V1")
        self.net.eval()
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, x):
        x = torch.nn.functional.interpolate(x, size=(299, 299), mode="bilinear", align_corners=False)
        return torch.softmax(self.net(x), dim=1)


def make_classifier(name: str, seed: int = 0) -> torch.nn.Module:
    if name == "conv-random":
        return RandomConvClassifier(seed=seed)
    if name == "uniform":
        return UniformClassifier()
    if name == "inception-v3":
        return TorchvisionInceptionClassifier()
    raise ValueError(f"unknown classifier '{name}' (conv-random|uniform|inception-v3)")
