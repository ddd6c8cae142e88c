"""Dataset ingestion, indexing and sampling."""

from .records import (
    ScanError,
    load_keypoints_json,
    load_record_image,
    load_record_parse,
    read_manifest,
    sample_training_batch,
    save_keypoints_json,
    scan_corpus,
)
from .synthetic import (
    DOLL_SIZE,
    OutfitSpec,
    PoseParams,
    doll_keypoints,
    load_doll_meta,
    make_synthetic_corpus,
    render_doll,
    sample_outfit,
    sample_pose_params,
)

__all__ = [
    "DOLL_SIZE",
    "OutfitSpec",
    "PoseParams",
    "ScanError",
    "doll_keypoints",
    "load_doll_meta",
    "load_keypoints_json",
    "load_record_image",
    "load_record_parse",
    "make_synthetic_corpus",
    "read_manifest",
    "render_doll",
    "sample_outfit",
    "sample_pose_params",
    "sample_training_batch",
    "save_keypoints_json",
    "scan_corpus",
]
