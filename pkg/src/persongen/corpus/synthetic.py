"""Procedural 64x48 paper-doll corpus with exact parses and keypoints.

Each record renders one outfit (colors + clothing layout) under one sampled
pose.  Because geometry, labels and keypoints come from the same generator,
ground-truth targets for any (outfit, pose) combination can be re-rendered,
which is what the desk-scale checks train and score against.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .. import constants
from ..representation import PoseSpec, SemanticMap, save_image_png, save_semantic_map_png
from ..representation.encoders import _segment_distance
from .records import save_keypoints_json

DOLL_SIZE = (64, 48)  # (H, W)
BACKGROUND_RGB = (240, 240, 240)

L_FACE, L_HAIR, L_UPPER = 1, 2, 3
L_PANTS, L_SKIRT = 4, 5
L_LARM, L_RARM, L_LLEG, L_RLEG = 6, 7, 8, 9


@dataclass
class OutfitSpec:
    sleeves: str  # "long" | "short"
    bottom: str  # "pants" | "skirt"
    skin_rgb: tuple[int, int, int]
    hair_rgb: tuple[int, int, int]
    upper_rgb: tuple[int, int, int]
    bottom_rgb: tuple[int, int, int]


@dataclass
class PoseParams:
    cx: float  # body center column
    l_arm: tuple[float, float]  # (shoulder, elbow) angles from straight down, radians
    r_arm: tuple[float, float]
    l_leg: tuple[float, float]  # (hip, knee) angles
    r_leg: tuple[float, float]


def sample_outfit(rng: np.random.Generator) -> OutfitSpec:
    def color(lo=40, hi=230):
        return tuple(int(v) for v in rng.integers(lo, hi, size=3))

    return OutfitSpec(
        sleeves=str(rng.choice(["long", "short"])),
        bottom=str(rng.choice(["pants", "skirt"])),
        skin_rgb=(int(rng.integers(190, 240)), int(rng.integers(150, 190)), int(rng.integers(120, 160))),
        hair_rgb=color(20, 120),
        upper_rgb=color(),
        bottom_rgb=color(),
    )


def sample_pose_params(rng: np.random.Generator) -> PoseParams:
    a = 0.85  # max shoulder swing (~49 deg) keeps wrists in frame
    return PoseParams(
        cx=float(rng.uniform(22.0, 26.0)),
        l_arm=(float(rng.uniform(-a, a)), float(rng.uniform(-0.6, 0.6))),
        r_arm=(float(rng.uniform(-a, a)), float(rng.uniform(-0.6, 0.6))),
        l_leg=(float(rng.uniform(-0.35, 0.35)), float(rng.uniform(-0.25, 0.25))),
        r_leg=(float(rng.uniform(-0.35, 0.35)), float(rng.uniform(-0.25, 0.25))),
    )


def _chain(origin, length, angle, outward):
    """Next joint going downward from origin, swung sideways by angle."""
    x = origin[0] + outward * length * np.sin(angle)
    y = origin[1] + length * np.cos(angle)
    return (float(x), float(y))


def doll_keypoints(p: PoseParams) -> np.ndarray:
    """[18, 3] keypoint array for the doll skeleton, all joints visible."""
    cx = p.cx
    neck = (cx, 14.0)
    nose = (cx, 8.5)
    r_sho, l_sho = (cx - 5.5, 15.5), (cx + 5.5, 15.5)
    r_hip, l_hip = (cx - 3.5, 34.0), (cx + 3.5, 34.0)
    r_elb = _chain(r_sho, 8.0, p.r_arm[0], -1)
    r_wri = _chain(r_elb, 8.0, p.r_arm[0] + p.r_arm[1], -1)
    l_elb = _chain(l_sho, 8.0, p.l_arm[0], +1)
    l_wri = _chain(l_elb, 8.0, p.l_arm[0] + p.l_arm[1], +1)
    r_kne = _chain(r_hip, 10.0, p.r_leg[0], -1)
    r_ank = _chain(r_kne, 10.0, p.r_leg[0] + p.r_leg[1], -1)
    l_kne = _chain(l_hip, 10.0, p.l_leg[0], +1)
    l_ank = _chain(l_kne, 10.0, p.l_leg[0] + p.l_leg[1], +1)
    r_eye, l_eye = (cx - 1.8, 7.2), (cx + 1.8, 7.2)
    r_ear, l_ear = (cx - 3.4, 8.2), (cx + 3.4, 8.2)
    pts = [
        nose, neck, r_sho, r_elb, r_wri, l_sho, l_elb, l_wri,
        r_hip, r_kne, r_ank, l_hip, l_kne, l_ank, r_eye, l_eye, r_ear, l_ear,
    ]
    return np.array([[x, y, 1.0] for x, y in pts], dtype=np.float64)


def _capsule(h, w, p0, p1, radius):
    return _segment_distance(h, w, p0, p1) <= radius


def _circle(h, w, center, radius):
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return np.hypot(xs - center[0], ys - center[1]) <= radius


def render_doll(outfit: OutfitSpec, pose_params: PoseParams, size=DOLL_SIZE):
    """Render one doll: (image uint8 [H,W,3], labels uint8 [H,W], PoseSpec)."""
    h, w = size
    kp = doll_keypoints(pose_params)
    pts = {name: kp[i, :2] for i, name in enumerate(constants.JOINT_NAMES)}

    image = np.empty((h, w, 3), dtype=np.uint8)
    image[:] = BACKGROUND_RGB
    labels = np.zeros((h, w), dtype=np.uint8)

    def paint(mask, label, rgb):
        image[mask] = rgb
        labels[mask] = label

    skin = outfit.skin_rgb
    long_sleeves = outfit.sleeves == "long"

    # legs (under everything else)
    leg_label = (L_PANTS, L_PANTS) if outfit.bottom == "pants" else (L_LLEG, L_RLEG)
    leg_rgb = outfit.bottom_rgb if outfit.bottom == "pants" else skin
    for side, lab in (("left", leg_label[0]), ("right", leg_label[1])):
        hip, knee, ankle = pts[f"{side}_hip"], pts[f"{side}_knee"], pts[f"{side}_ankle"]
        paint(_capsule(h, w, hip, knee, 3.0), lab, leg_rgb)
        paint(_capsule(h, w, knee, ankle, 2.5), lab, leg_rgb)

    if outfit.bottom == "skirt":
        hip_c = (pts["left_hip"] + pts["right_hip"]) / 2.0
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        top, bottom = hip_c[1] - 1.0, hip_c[1] + 9.0
        half = 5.0 + 3.5 * np.clip((ys - top) / (bottom - top), 0, 1)
        skirt = (ys >= top) & (ys <= bottom) & (np.abs(xs - hip_c[0]) <= half)
        paint(skirt, L_SKIRT, outfit.bottom_rgb)

    # torso
    torso = _capsule(h, w, (pts["neck"] + pts["right_shoulder"]) / 2, (pts["right_hip"]), 3.5)
    torso |= _capsule(h, w, (pts["neck"] + pts["left_shoulder"]) / 2, (pts["left_hip"]), 3.5)
    torso |= _capsule(h, w, pts["neck"], (pts["left_hip"] + pts["right_hip"]) / 2, 4.5)
    paint(torso, L_UPPER, outfit.upper_rgb)

    # arms over torso
    for side, lab in (("left", L_LARM), ("right", L_RARM)):
        sho, elb, wri = pts[f"{side}_shoulder"], pts[f"{side}_elbow"], pts[f"{side}_wrist"]
        paint(_capsule(h, w, sho, elb, 2.2), L_UPPER, outfit.upper_rgb)
        if long_sleeves:
            paint(_capsule(h, w, elb, wri, 2.0), L_UPPER, outfit.upper_rgb)
        else:
            paint(_capsule(h, w, elb, wri, 2.0), lab, skin)

    # head: hair disc behind a lower face disc
    head_c = pts["nose"]
    paint(_circle(h, w, (head_c[0], head_c[1] - 0.5), 5.2), L_HAIR, outfit.hair_rgb)
    paint(_circle(h, w, (head_c[0], head_c[1] + 1.0), 3.8), L_FACE, skin)

    pose = PoseSpec.from_array(kp, (h, w))
    return image, labels, pose


def make_synthetic_corpus(
    root,
    n_outfits: int = 25,
    poses_per_outfit: int = 8,
    seed: int = 0,
    size=DOLL_SIZE,
    test_fraction: float = 0.15,
):
    """Write a full corpus directory (images/keypoints/parses/manifest/meta).

    Returns the manifest entries.  The last ceil(test_fraction * poses) poses
    of each outfit go to the test split, so every outfit appears in both.
    """
    rng = np.random.default_rng(seed)
    for sub in ("images", "keypoints", "parses", "meta"):
        os.makedirs(os.path.join(root, sub), exist_ok=True)
    n_test = max(1, int(round(test_fraction * poses_per_outfit))) if poses_per_outfit > 1 else 0
    manifest = []
    for o in range(n_outfits):
        outfit = sample_outfit(rng)
        for p in range(poses_per_outfit):
            pose_params = sample_pose_params(rng)
            image_id = f"doll_{o:03d}_{p:02d}"
            image, labels, pose = render_doll(outfit, pose_params, size)
            save_image_png(image, os.path.join(root, "images", f"{image_id}.png"))
            save_semantic_map_png(
                SemanticMap.from_labels(labels), os.path.join(root, "parses", f"{image_id}.png")
            )
            save_keypoints_json(pose, os.path.join(root, "keypoints", f"{image_id}.json"))
            with open(os.path.join(root, "meta", f"{image_id}.json"), "w") as f:
                json.dump({"outfit": asdict(outfit), "pose": asdict(pose_params)}, f)
            split = "test" if p >= poses_per_outfit - n_test else "train"
            manifest.append((image_id, split))
    with open(os.path.join(root, "manifest.txt"), "w") as f:
        for image_id, split in manifest:
            f.write(f"{image_id} {split}\n")
    return manifest


def load_doll_meta(root, image_id: str) -> tuple[OutfitSpec, PoseParams]:
    with open(os.path.join(root, "meta", f"{image_id}.json")) as f:
        meta = json.load(f)
    outfit = OutfitSpec(**{k: tuple(v) if isinstance(v, list) else v for k, v in meta["outfit"].items()})
    pose = PoseParams(**{k: tuple(v) if isinstance(v, list) else v for k, v in meta["pose"].items()})
    return outfit, pose
