import numpy as np
import pytest
import torch

from persongen.corpus import make_synthetic_corpus, scan_corpus
from persongen.representation import Keypoint, PoseSpec

torch.set_num_threads(2)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Tiny rendered corpus shared across unit tests (4 outfits x 4 poses)."""
    root = tmp_path_factory.mktemp("corpus")
    make_synthetic_corpus(root, n_outfits=4, poses_per_outfit=4, seed=7)
    records, errors = scan_corpus(root)
    assert not errors
    return root, records


def make_pose(points, image_size=(8, 8)):
    """PoseSpec from {joint_index: (x, y)}; unlisted joints are invisible."""
    from persongen import constants

    kps = []
    for i, name in enumerate(constants.JOINT_NAMES):
        if i in points:
            x, y = points[i]
            kps.append(Keypoint(name, float(x), float(y), True))
        else:
            kps.append(Keypoint(name, 0.0, 0.0, False))
    return PoseSpec(tuple(kps), image_size)


def all_visible_pose(image_size=(64, 48), seed=0):
    """A fully visible random-but-valid pose for property tests."""
    rng = np.random.default_rng(seed)
    h, w = image_size
    pts = {i: (rng.uniform(0, w - 1), rng.uniform(0, h - 1)) for i in range(18)}
    return make_pose(pts, image_size)
