"""Corpus scanning, record I/O and training-batch sampling."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .. import constants
from ..representation import (
    CorpusRecord,
    PoseSpec,
    SemanticMap,
    TrainingSample,
    load_image_png,
    load_semantic_map_png,
)

SPLITS = ("train", "test")


@dataclass
class ScanError:
    image_id: str
    message: str


def save_keypoints_json(pose: PoseSpec, path) -> None:
    h, w = pose.image_size
    rec = {
        "format_version": constants.FORMAT_VERSION,
        "image_size": [h, w],
        "keypoints": [[kp.x, kp.y, 1 if kp.visible else 0] for kp in pose.keypoints],
    }
    with open(path, "w") as f:
        json.dump(rec, f)


def load_keypoints_json(path) -> PoseSpec:
    with open(path) as f:
        rec = json.load(f)
    h, w = rec["image_size"]
    return PoseSpec.from_array(np.asarray(rec["keypoints"], dtype=np.float64), (int(h), int(w)))


def read_manifest(root) -> list[tuple[str, str]]:
    """Parse manifest.txt lines of "<id> <split>"."""
    path = os.path.join(root, "manifest.txt")
    entries = []
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 2 or fields[1] not in SPLITS:
                raise ValueError(f"manifest.txt line {ln}: expected '<id> <train|test>', got {line!r}")
            entries.append((fields[0], fields[1]))
    return entries


def scan_corpus(root, manifest: list[tuple[str, str]] | None = None):
    """Validate and index a corpus directory.

    Returns (records, errors): records sorted by image_id; per-record errors
    (missing files, dimension mismatches) reported without dropping the
    valid remainder.
    """
    if manifest is None:
        manifest = read_manifest(root)
    records: list[CorpusRecord] = []
    errors: list[ScanError] = []
    seen = set()
    for image_id, split in manifest:
        if image_id in seen:
            errors.append(ScanError(image_id, "duplicate image_id in manifest"))
            continue
        seen.add(image_id)
        image_path = os.path.join(root, "images", f"{image_id}.png")
        kp_path = os.path.join(root, "keypoints", f"{image_id}.json")
        parse_path = os.path.join(root, "parses", f"{image_id}.png")
        missing = [p for p in (image_path, kp_path, parse_path) if not os.path.isfile(p)]
        if missing:
            errors.append(ScanError(image_id, f"missing file(s): {', '.join(missing)}"))
            continue
        try:
            pose = load_keypoints_json(kp_path)
        except (ValueError, KeyError, json.JSONDecodeError) as e:
            errors.append(ScanError(image_id, f"bad keypoints: {e}"))
            continue
        with Image.open(image_path) as im:
            img_size = (im.height, im.width)
        with Image.open(parse_path) as im:
            parse_size = (im.height, im.width)
        if img_size != tuple(pose.image_size) or parse_size != tuple(pose.image_size):
            errors.append(
                ScanError(
                    image_id,
                    f"dimension mismatch: image {img_size}, parse {parse_size}, "
                    f"keypoints {tuple(pose.image_size)}",
                )
            )
            continue
        records.append(CorpusRecord(image_id, image_path, pose, parse_path, split))
    records.sort(key=lambda r: r.image_id)
    return records, errors


def load_record_image(record: CorpusRecord) -> np.ndarray:
    return load_image_png(record.image_path)


def load_record_parse(record: CorpusRecord) -> SemanticMap:
    return load_semantic_map_png(record.parse_path)


def sample_training_batch(
    records: list[CorpusRecord],
    pair_index,
    batch_size: int,
    seed,
) -> list[TrainingSample]:
    """Draw a deterministic batch of (reference, target-pose) samples.

    seed is any numpy seed material (int or sequence of ints).

    Target poses come from other records.  When pair_index (may be None)
    holds a mined match for the reference, the matched record's parse is
    attached as the pseudo target parse.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if batch_size > len(records):
        raise ValueError(f"batch_size {batch_size} exceeds corpus size {len(records)}")
    if len(records) < 2:
        raise ValueError("need at least 2 records to draw distinct target poses")
    by_id = {r.image_id: r for r in records}
    rng = np.random.default_rng(seed)
    ref_idx = rng.choice(len(records), size=batch_size, replace=False)
    samples = []
    for i in ref_idx:
        ref = records[int(i)]
        entry = pair_index.entries.get(ref.image_id) if pair_index is not None else None
        if entry is not None and entry.matched_id in by_id:
            target = by_id[entry.matched_id]
            samples.append(
                TrainingSample(
                    reference=ref,
                    target_pose=target.pose,
                    pseudo_parse=load_record_parse(target),
                    provenance="mined",
                    target_id=target.image_id,
                )
            )
        else:
            j = int(rng.integers(0, len(records) - 1))
            if j >= int(i):
                j += 1
            target = records[j]
            samples.append(
                TrainingSample(
                    reference=ref,
                    target_pose=target.pose,
                    provenance="random-pose",
                    target_id=target.image_id,
                )
            )
    return samples
