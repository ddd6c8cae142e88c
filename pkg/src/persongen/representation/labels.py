"""Raw-parser label merging and parse PNG I/O."""

from __future__ import annotations

import numpy as np
from PIL import Image

from .. import constants
from .types import SemanticMap


class UnknownLabelError(ValueError):
    """A raw parse contains labels missing from the merge table."""

    def __init__(self, labels):
        self.labels = sorted(int(v) for v in labels)
        super().__init__(f"raw parse contains unmapped label ids: {self.labels}")


def merge_parser_labels(raw_parse: np.ndarray, merge_table: dict[int, int] | None = None) -> SemanticMap:
    """Collapse raw parser labels onto the 10 canonical classes.

    merge_table maps raw label id -> canonical label id; defaults to the
    shipped LIP table.  Unknown raw labels are rejected.
    """
    if merge_table is None:
        merge_table = constants.DEFAULT_MERGE_TABLE
    raw = np.asarray(raw_parse)
    if raw.ndim != 2:
        raise ValueError("raw parse must be a single-channel label image")
    present = np.unique(raw)
    unknown = [v for v in present if int(v) not in merge_table]
    if unknown:
        raise UnknownLabelError(unknown)
    lut = np.zeros(int(present.max()) + 1 if len(present) else 1, dtype=np.uint8)
    for k, v in merge_table.items():
        if not (0 <= v < constants.NUM_LABELS):
            raise ValueError(f"merge table target {v} outside canonical label range")
        if k < len(lut):
            lut[k] = v
    return SemanticMap.from_labels(lut[raw])


def _flat_palette() -> list[int]:
    pal = []
    for rgb in constants.LABEL_PALETTE:
        pal.extend(rgb)
    pal.extend([0] * (768 - len(pal)))
    return pal


def save_semantic_map_png(semantic_map: SemanticMap, path) -> None:
    """Write a hard map as an 8-bit paletted PNG with the canonical palette."""
    labels = semantic_map.harden().to_labels()
    img = Image.fromarray(labels, mode="P")
    img.putpalette(_flat_palette())
    img.save(path, format="PNG")


def load_semantic_map_png(path) -> SemanticMap:
    """Read a parse PNG back into a hard semantic map."""
    img = Image.open(path)
    if img.mode == "P":
        labels = np.asarray(img, dtype=np.uint8)
    elif img.mode in ("L", "I"):
        labels = np.asarray(img.convert("L"), dtype=np.uint8)
    else:
        raise ValueError(f"parse PNG must be paletted or grayscale, got mode {img.mode}")
    if labels.max() >= constants.NUM_LABELS:
        raise ValueError(f"parse PNG contains label {int(labels.max())} >= {constants.NUM_LABELS}")
    return SemanticMap.from_labels(labels)


def save_image_png(image: np.ndarray, path) -> None:
    """Write an [H, W, 3] uint8 array as PNG."""
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def load_image_png(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"), dtype=np.uint8)


def image_to_tensor(image: np.ndarray) -> "torch.Tensor":
    """uint8 [H, W, 3] -> float32 [3, H, W] in [-1, 1] (generator range)."""
    import torch

    t = torch.from_numpy(np.array(image, dtype=np.uint8)).float().permute(2, 0, 1)
    return t / 127.5 - 1.0


def tensor_to_image(t) -> np.ndarray:
    """float [3, H, W] in [-1, 1] -> uint8 [H, W, 3]."""
    arr = ((t.detach().clamp(-1, 1) + 1.0) * 127.5).round().to("cpu")
    return arr.permute(1, 2, 0).numpy().astype(np.uint8)
