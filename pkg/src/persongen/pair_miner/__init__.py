"""Pseudo-pair mining: part affines, alignment cost and the corpus search."""

from .affine import (
    PartAffine,
    estimate_part_affine,
    invert_affine,
    rect_affine,
    scale_affine,
    warp_mask_values_nn,
)
from .mining import (
    MiningRecord,
    PairEntry,
    PairIndex,
    alignment_cost,
    exclude_similar_pose,
    mine_pairs,
    mining_records_from_corpus,
)

__all__ = [
    "MiningRecord",
    "PairEntry",
    "PairIndex",
    "PartAffine",
    "alignment_cost",
    "estimate_part_affine",
    "exclude_similar_pose",
    "invert_affine",
    "mine_pairs",
    "mining_records_from_corpus",
    "rect_affine",
    "scale_affine",
    "warp_mask_values_nn",
]
