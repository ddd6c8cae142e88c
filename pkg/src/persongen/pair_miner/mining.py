"""Pseudo ground-truth pair mining via part-aligned semantic-map matching.

For every source record, the miner searches the corpus for the semantic map
that minimizes the sum over the ten body parts of squared differences
between the candidate's masked map and the affine-warped source masked map,
skipping near-duplicate poses.  The winner's parse becomes the pseudo
target for semantic-network pretraining.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import constants
from ..corpus import load_record_parse
from ..representation import (
    BodyPartMasks,
    CorpusRecord,
    PoseSpec,
    SemanticMap,
    decompose_body_parts,
)
from .affine import PartAffine, rect_affine, warp_mask_values_nn


@dataclass
class PairEntry:
    matched_id: str
    cost: float
    excluded_candidates: int = 0


@dataclass
class PairIndex:
    entries: dict[str, PairEntry] = field(default_factory=dict)

    def save(self, path) -> None:
        with open(path, "w") as f:
            for src_id in sorted(self.entries):
                e = self.entries[src_id]
                f.write(f"{src_id} {e.matched_id} {e.cost:.9g}\n")

    @classmethod
    def load(cls, path) -> "PairIndex":
        index = cls()
        with open(path) as f:
            for ln, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                fields = line.split()
                if len(fields) != 3:
                    raise ValueError(f"{path} line {ln}: expected '<src> <matched> <cost>'")
                index.entries[fields[0]] = PairEntry(fields[1], float(fields[2]))
        return index


@dataclass
class MiningRecord:
    """In-memory mining unit: id + pose + hard parse."""

    image_id: str
    pose: PoseSpec
    parse: SemanticMap


def mining_records_from_corpus(records: list[CorpusRecord]) -> list[MiningRecord]:
    return [MiningRecord(r.image_id, r.pose, load_record_parse(r)) for r in records]


def exclude_similar_pose(src_pose: PoseSpec, cand_pose: PoseSpec, threshold: float) -> bool:
    """True (excluded) iff mean distance over jointly visible joints < threshold.

    Pairs with no jointly visible joints are uninformative and excluded.
    """
    if tuple(src_pose.image_size) != tuple(cand_pose.image_size):
        raise ValueError("poses have different image sizes")
    a, b = src_pose.to_array(), cand_pose.to_array()
    both = (a[:, 2] > 0) & (b[:, 2] > 0)
    if not both.any():
        return True
    d = np.hypot(a[both, 0] - b[both, 0], a[both, 1] - b[both, 1])
    return bool(d.mean() < threshold)


def _box_area(box: np.ndarray) -> float:
    return float((box[2, 0] - box[0, 0]) * (box[2, 1] - box[0, 1]))


def _part_penalty(penalty, box: np.ndarray) -> float:
    if penalty == "area":
        return _box_area(box)
    return float(penalty)


def _part_cost(
    src_labels, src_mask, src_box, cand_labels, cand_mask, cand_box, shape
) -> float:
    """Squared-difference cost of one part: warp the source masked one-hot
    map onto the candidate geometry and count channel mismatches.

    For one-hot columns the squared channel difference is 2 where both maps
    are present with different labels and 1 where exactly one is present,
    which this computes directly in label space.
    """
    affine = rect_affine(src_box, cand_box)
    if not affine.valid:
        return math.inf
    h, w = shape
    # the warped support is the candidate box plus a rounding fringe that
    # grows with the scale factor
    mx = int(abs(affine.matrix[0, 0]) * 0.5) + 1
    my = int(abs(affine.matrix[1, 1]) * 0.5) + 1
    x0 = max(0, int(cand_box[0, 0]) - mx)
    x1 = min(w, int(cand_box[2, 0]) + mx + 1)
    y0 = max(0, int(cand_box[0, 1]) - my)
    y1 = min(h, int(cand_box[2, 1]) + my + 1)
    sl = (slice(y0, y1), slice(x0, x1))
    warped_labels, warped_present = warp_mask_values_nn(src_labels, src_mask, affine, sl)
    cl = cand_labels[sl]
    cp = cand_mask[sl]
    both = warped_present & cp
    differ = both & (warped_labels != cl)
    only_one = warped_present ^ cp
    return float(2 * int(differ.sum()) + int(only_one.sum()))


@dataclass
class _Prepared:
    image_id: str
    pose: PoseSpec
    labels: np.ndarray
    parts: BodyPartMasks


def _prepare(rec) -> _Prepared:
    if isinstance(rec, MiningRecord):
        image_id, pose, parse = rec.image_id, rec.pose, rec.parse
    else:
        image_id, pose = rec.image_id, rec.pose
        parse = load_record_parse(rec)
    parts = decompose_body_parts(parse, pose)
    return _Prepared(image_id, pose, parse.to_labels(), parts)


def alignment_cost(
    src_map: SemanticMap,
    src_parts: BodyPartMasks,
    cand_map: SemanticMap,
    cand_parts: BodyPartMasks,
    penalty="area",
) -> float:
    """Ten-part alignment cost between two parsed records.

    Parts degenerate on exactly one side contribute a penalty (default: the
    non-degenerate side's box area); parts absent on both sides cost 0.
    """
    if src_map.mode != "hard" or cand_map.mode != "hard":
        raise ValueError("alignment cost requires hard semantic maps")
    if src_map.data.shape != cand_map.data.shape:
        raise ValueError(
            f"shape mismatch: {tuple(src_map.data.shape)} vs {tuple(cand_map.data.shape)}"
        )
    shape = src_map.data.shape[1:]
    src_labels = src_map.to_labels()
    cand_labels = cand_map.to_labels()
    total = 0.0
    for j in range(constants.NUM_BODY_PARTS):
        s_deg = bool(src_parts.degenerate[j])
        c_deg = bool(cand_parts.degenerate[j])
        if s_deg and c_deg:
            continue
        if s_deg or c_deg:
            box = cand_parts.boxes[j] if s_deg else src_parts.boxes[j]
            total += _part_penalty(penalty, box)
            continue
        total += _part_cost(
            src_labels,
            src_parts.parts[j],
            src_parts.boxes[j],
            cand_labels,
            cand_parts.parts[j],
            cand_parts.boxes[j],
            shape,
        )
    return total


def _best_match(i: int, prepared: list[_Prepared], threshold: float, penalty):
    src = prepared[i]
    best: tuple[float, str] | None = None
    excluded = 0
    shape = src.labels.shape
    for k, cand in enumerate(prepared):
        if k == i:
            continue
        if exclude_similar_pose(src.pose, cand.pose, threshold):
            excluded += 1
            continue
        partial = 0.0
        bound = best[0] if best is not None else math.inf
        for j in range(constants.NUM_BODY_PARTS):
            s_deg = bool(src.parts.degenerate[j])
            c_deg = bool(cand.parts.degenerate[j])
            if s_deg and c_deg:
                continue
            if s_deg or c_deg:
                box = cand.parts.boxes[j] if s_deg else src.parts.boxes[j]
                partial += _part_penalty(penalty, box)
            else:
                partial += _part_cost(
                    src.labels, src.parts.parts[j], src.parts.boxes[j],
                    cand.labels, cand.parts.parts[j], cand.parts.boxes[j], shape,
                )
            if partial > bound:
                break
        else:
            cand_key = (partial, cand.image_id)
            if best is None or cand_key < best:
                best = cand_key
    return src.image_id, best, excluded


def mine_pairs(
    records,
    threshold: float,
    penalty="area",
    workers: int = 1,
) -> PairIndex:
    """Exhaustively match every record to its minimum-cost candidate.

    Ties break toward the smaller image_id; records whose candidates are all
    pose-excluded are omitted.  Results are independent of record order and
    worker count.
    """
    if len(records) < 2:
        raise ValueError("mining needs at least 2 records")
    prepared = [_prepare(r) for r in records]
    index = PairIndex()

    def run(i):
        return _best_match(i, prepared, threshold, penalty)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(prepared))))
    else:
        results = [run(i) for i in range(len(prepared))]
    for src_id, best, excluded in results:
        if best is not None:
            index.entries[src_id] = PairEntry(best[1], best[0], excluded)
    return index
