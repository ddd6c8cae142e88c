"""Core data types for poses, semantic maps, masks and face crops."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .. import constants


@dataclass(frozen=True)
class Keypoint:
    name: str
    x: float
    y: float
    visible: bool


@dataclass(frozen=True)
class PoseSpec:
    """18 named keypoints in canonical order plus the image size.

    Visible keypoints must lie inside the image.  The joint order is part of
    the keypoint-file format contract.
    """

    keypoints: tuple[Keypoint, ...]
    image_size: tuple[int, int]  # (H, W)

    def __post_init__(self):
        if len(self.keypoints) != constants.NUM_JOINTS:
            raise ValueError(
                f"expected {constants.NUM_JOINTS} keypoints, got {len(self.keypoints)}"
            )
        h, w = self.image_size
        for i, (kp, name) in enumerate(zip(self.keypoints, constants.JOINT_NAMES)):
            if kp.name != name:
                raise ValueError(f"keypoint {i} is '{kp.name}', expected '{name}'")
            if kp.visible and not (0 <= kp.x < w and 0 <= kp.y < h):
                raise ValueError(
                    f"visible keypoint '{name}' at ({kp.x}, {kp.y}) outside {w}x{h} image"
                )

    @classmethod
    def from_array(cls, arr, image_size: tuple[int, int]) -> "PoseSpec":
        """Build from an [18, 3] array of (x, y, visible) rows."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != (constants.NUM_JOINTS, 3):
            raise ValueError(f"expected shape (18, 3), got {arr.shape}")
        kps = tuple(
            Keypoint(constants.JOINT_NAMES[i], float(arr[i, 0]), float(arr[i, 1]),
                     bool(arr[i, 2] > 0))
            for i in range(constants.NUM_JOINTS)
        )
        return cls(kps, image_size)

    def to_array(self) -> np.ndarray:
        return np.array(
            [[kp.x, kp.y, 1.0 if kp.visible else 0.0] for kp in self.keypoints],
            dtype=np.float64,
        )

    def visible_mask(self) -> np.ndarray:
        return np.array([kp.visible for kp in self.keypoints], dtype=bool)


@dataclass
class PoseHeatmap:
    """[18, H, W] per-joint Gaussian probability maps, peak value 1."""

    data: torch.Tensor

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != constants.NUM_JOINTS:
            raise ValueError(f"heatmap must be [18, H, W], got {tuple(self.data.shape)}")


@dataclass
class SemanticMap:
    """[L=10, H, W] semantic label map, one-hot (hard) or softmax (soft)."""

    data: torch.Tensor
    mode: str = "hard"  # "hard" | "soft"

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != constants.NUM_LABELS:
            raise ValueError(f"semantic map must be [10, H, W], got {tuple(self.data.shape)}")
        if self.mode not in ("hard", "soft"):
            raise ValueError(f"unknown mode '{self.mode}'")

    def validate(self, atol: float = 1e-5) -> None:
        col = self.data.sum(dim=0)
        if self.mode == "hard":
            ok = torch.all((self.data == 0) | (self.data == 1)) and torch.all(col == 1)
        else:
            ok = bool(
                torch.all(self.data >= 0)
                and torch.all(self.data <= 1)
                and torch.all((col - 1).abs() <= atol)
            )
        if not ok:
            raise ValueError(f"invalid {self.mode} semantic map")

    def to_labels(self) -> np.ndarray:
        """Per-pixel label image (argmax for soft maps)."""
        return self.data.argmax(dim=0).to(torch.uint8).numpy()

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "SemanticMap":
        labels = np.asarray(labels)
        if labels.ndim != 2:
            raise ValueError("label image must be 2-D")
        if labels.min() < 0 or labels.max() >= constants.NUM_LABELS:
            raise ValueError("label image contains out-of-range labels")
        t = torch.from_numpy(np.ascontiguousarray(labels.astype(np.int64)))
        onehot = torch.nn.functional.one_hot(t, constants.NUM_LABELS)
        return cls(onehot.permute(2, 0, 1).to(torch.float32), mode="hard")

    def harden(self) -> "SemanticMap":
        if self.mode == "hard":
            return self
        return SemanticMap.from_labels(self.to_labels())


@dataclass
class PoseMask:
    """[1, H, W] binary dilated-skeleton mask."""

    data: torch.Tensor

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != 1:
            raise ValueError(f"pose mask must be [1, H, W], got {tuple(self.data.shape)}")


@dataclass
class BodyPartMasks:
    """Ten rigid-part binary masks with their bounding boxes.

    parts: bool [10, H, W]; boxes: float [10, 4, 2] corner points in
    (x, y) order (tl, tr, br, bl); degenerate: bool [10], true when the part
    has too few visible joints or an empty mask.
    """

    parts: np.ndarray
    boxes: np.ndarray
    degenerate: np.ndarray

    def __post_init__(self):
        n = constants.NUM_BODY_PARTS
        if self.parts.shape[0] != n or self.boxes.shape != (n, 4, 2) or self.degenerate.shape != (n,):
            raise ValueError("malformed BodyPartMasks")


@dataclass
class FaceCrop:
    """[3, h_f, w_f] face crop; valid=False when the pose has no usable face."""

    data: torch.Tensor
    valid: bool


@dataclass
class CorpusRecord:
    """One indexed corpus entry: image + keypoints + parse on disk."""

    image_id: str
    image_path: str
    pose: PoseSpec
    parse_path: str
    split: str  # "train" | "test"


@dataclass
class TrainingSample:
    """A reference record paired with a target pose for one training step."""

    reference: CorpusRecord
    target_pose: PoseSpec
    pseudo_parse: SemanticMap | None = None
    provenance: str = "random-pose"  # "mined" | "random-pose"
    target_id: str | None = None

    def __post_init__(self):
        if (self.provenance == "mined") != (self.pseudo_parse is not None):
            raise ValueError("pseudo_parse must be present iff provenance == 'mined'")


@dataclass
class LossReport:
    """Named scalar loss terms of one step plus their weighted total."""

    terms: dict[str, float] = field(default_factory=dict)
    total: float = 0.0

    def as_row(self) -> dict[str, float]:
        row = dict(self.terms)
        row["total"] = self.total
        return row
