"""Frozen format contracts: joint order, skeleton, label palette, body parts.

These constants are a wire-format contract (keypoint files, parse PNGs,
checkpoints and the HTTP API all depend on them).  Changing any of them is
a breaking format change and must bump FORMAT_VERSION.
"""

FORMAT_VERSION = 1

# 18 keypoints, OpenPose BODY-18 order.  Index order is part of the
# keypoint-file contract.
JOINT_NAMES = (
    "nose",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_eye",
    "left_eye",
    "right_ear",
    "left_ear",
)
NUM_JOINTS = len(JOINT_NAMES)  # k = 18

# 17 limb edges over the joints above; used for pose masks and for the
# connected-skeleton prior.
SKELETON_EDGES = (
    (1, 2), (1, 5),          # neck - shoulders
    (2, 3), (3, 4),          # right arm
    (5, 6), (6, 7),          # left arm
    (1, 8), (8, 9), (9, 10),   # right leg chain
    (1, 11), (11, 12), (12, 13),  # left leg chain
    (1, 0),                  # neck - nose
    (0, 14), (14, 16),       # right eye / ear
    (0, 15), (15, 17),       # left eye / ear
)

# Joint index swap under a horizontal flip of the image.
FLIP_JOINT_PERM = (0, 1, 5, 6, 7, 2, 3, 4, 11, 12, 13, 8, 9, 10, 15, 14, 17, 16)

# 10 semantic labels.  Index is the value stored in parse PNGs.
LABEL_NAMES = (
    "background",
    "face",
    "hair",
    "upper_clothes",
    "pants",
    "skirt",
    "left_arm",
    "right_arm",
    "left_leg",
    "right_leg",
)
NUM_LABELS = len(LABEL_NAMES)  # L = 10

# RGB palette for paletted parse PNGs and UI overlays, one entry per label.
LABEL_PALETTE = (
    (0, 0, 0),        # background
    (255, 200, 150),  # face
    (90, 60, 30),     # hair
    (220, 40, 40),    # upper_clothes
    (40, 60, 200),    # pants
    (180, 40, 180),   # skirt
    (250, 150, 60),   # left_arm
    (250, 220, 60),   # right_arm
    (60, 180, 60),    # left_leg
    (60, 220, 220),   # right_leg
)

FLIP_LABEL_PERM = (0, 1, 2, 3, 4, 5, 7, 6, 9, 8)

# Default merge table from the LIP 20-label parser output to the 10 canonical
# labels.  The grouping (hats/scarves into hair vs upper clothes, socks and
# shoes into the leg/pants labels) is a shipped choice, not an upstream given.
LIP_LABEL_NAMES = (
    "background", "hat", "hair", "glove", "sunglasses", "upper_clothes",
    "dress", "coat", "socks", "pants", "jumpsuits", "scarf", "skirt", "face",
    "left_arm", "right_arm", "left_leg", "right_leg", "left_shoe", "right_shoe",
)
DEFAULT_MERGE_TABLE = {
    0: 0,   # background
    1: 2,   # hat -> hair
    2: 2,   # hair
    3: 3,   # glove -> upper clothes
    4: 1,   # sunglasses -> face
    5: 3,   # upper clothes
    6: 3,   # dress -> upper clothes
    7: 3,   # coat -> upper clothes
    8: 4,   # socks -> pants
    9: 4,   # pants
    10: 3,  # jumpsuits -> upper clothes
    11: 3,  # scarf -> upper clothes
    12: 5,  # skirt
    13: 1,  # face
    14: 6,  # left arm
    15: 7,  # right arm
    16: 8,  # left leg
    17: 9,  # right leg
    18: 8,  # left shoe -> left leg
    19: 9,  # right shoe -> right leg
}

# Ten rigid body parts, fixed canonical order.  Each part lists the joints
# whose (padded) spanning rectangle supports it and the semantic labels it
# may contain.  At least two of the defining joints must be visible,
# otherwise the part is degenerate.
BODY_PARTS = (
    ("head", (0, 1, 14, 15, 16, 17), (1, 2)),
    ("torso", (1, 2, 5, 8, 11), (3, 5)),
    ("left_upper_arm", (5, 6), (6, 3)),
    ("left_lower_arm", (6, 7), (6, 3)),
    ("right_upper_arm", (2, 3), (7, 3)),
    ("right_lower_arm", (3, 4), (7, 3)),
    ("left_upper_leg", (11, 12), (8, 4, 5)),
    ("left_lower_leg", (12, 13), (8, 4)),
    ("right_upper_leg", (8, 9), (9, 4, 5)),
    ("right_lower_leg", (9, 10), (9, 4)),
)
NUM_BODY_PARTS = len(BODY_PARTS)
PART_NAMES = tuple(p[0] for p in BODY_PARTS)

# Part index swap under a horizontal flip.
FLIP_PART_PERM = (0, 1, 4, 5, 2, 3, 8, 9, 6, 7)

# Spanning rectangles are padded by this fraction of their diagonal.
PART_BOX_PAD = 0.20

# Face joints (nose, eyes, ears) and their template positions inside a face
# crop, as (x, y) fractions of (crop_w, crop_h).
FACE_JOINTS = (0, 14, 15, 16, 17)
FACE_TEMPLATE = (
    (0.50, 0.50),  # nose
    (0.35, 0.35),  # right eye
    (0.65, 0.35),  # left eye
    (0.18, 0.42),  # right ear
    (0.82, 0.42),  # left ear
)
DEFAULT_FACE_CROP = (48, 48)  # (h_f, w_f)

# Geometry defaults are stated at 256-pixel image height and scaled
# proportionally (see scaled_px).
HEATMAP_SIGMA_AT_256 = 6.0
LIMB_RADIUS_AT_256 = 10.0
DILATION_RADIUS_AT_256 = 5.0
POSE_THRESHOLD_AT_256 = 15.0


def scaled_px(value_at_256: float, height: int, minimum: float = 1.0) -> float:
    """Scale a 256-height pixel constant to an image of the given height."""
    return max(minimum, value_at_256 * height / 256.0)
