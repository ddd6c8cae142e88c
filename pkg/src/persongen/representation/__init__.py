"""Person representation: pose / parse data types and deterministic encoders."""

from .encoders import encode_heatmap, encode_pose_mask
from .face import extract_face, warp_image_affine
from .labels import (
    UnknownLabelError,
    image_to_tensor,
    load_image_png,
    load_semantic_map_png,
    merge_parser_labels,
    save_image_png,
    save_semantic_map_png,
    tensor_to_image,
)
from .parts import decompose_body_parts
from .types import (
    BodyPartMasks,
    CorpusRecord,
    FaceCrop,
    Keypoint,
    LossReport,
    PoseHeatmap,
    PoseMask,
    PoseSpec,
    SemanticMap,
    TrainingSample,
)

__all__ = [
    "BodyPartMasks",
    "CorpusRecord",
    "FaceCrop",
    "Keypoint",
    "LossReport",
    "PoseHeatmap",
    "PoseMask",
    "PoseSpec",
    "SemanticMap",
    "TrainingSample",
    "UnknownLabelError",
    "decompose_body_parts",
    "encode_heatmap",
    "encode_pose_mask",
    "extract_face",
    "image_to_tensor",
    "load_image_png",
    "load_semantic_map_png",
    "merge_parser_labels",
    "save_image_png",
    "save_semantic_map_png",
    "tensor_to_image",
    "warp_image_affine",
]
