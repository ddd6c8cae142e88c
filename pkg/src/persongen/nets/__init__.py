"""Generative networks, discriminators and loss terms."""

from .appearance import (
    AppearanceDiscriminator,
    AppearanceGenerator,
    AppearanceNetConfig,
    DeformSpec,
    FaceDiscriminator,
    compute_deform_spec,
    deformable_skip,
    ha_forward,
    pose_spec_from_heatmap,
)
from .blocks import Encoder, PatchDiscriminator, weights_init_normal
from .extractors import (
    IdentityExtractor,
    PoseRegressor,
    RandomConvExtractor,
    Vgg16Conv21Extractor,
    make_extractor,
)
from .losses import (
    adversarial_loss,
    appearance_adv_loss,
    ce_loss,
    content_loss,
    face_loss,
    ha_total_loss,
    hs_total_loss,
    mask_style_loss,
    pose_loss,
    semantic_adv_loss,
    semantic_style_loss,
)
from .semantic import (
    SemanticDiscriminator,
    SemanticGenerator,
    SemanticNetConfig,
    SemanticPrediction,
    hs_forward,
)

__all__ = [
    "AppearanceDiscriminator",
    "AppearanceGenerator",
    "AppearanceNetConfig",
    "DeformSpec",
    "Encoder",
    "FaceDiscriminator",
    "IdentityExtractor",
    "PatchDiscriminator",
    "PoseRegressor",
    "RandomConvExtractor",
    "SemanticDiscriminator",
    "SemanticGenerator",
    "SemanticNetConfig",
    "SemanticPrediction",
    "Vgg16Conv21Extractor",
    "adversarial_loss",
    "appearance_adv_loss",
    "ce_loss",
    "compute_deform_spec",
    "content_loss",
    "deformable_skip",
    "face_loss",
    "ha_forward",
    "ha_total_loss",
    "hs_forward",
    "hs_total_loss",
    "make_extractor",
    "mask_style_loss",
    "pose_loss",
    "pose_spec_from_heatmap",
    "semantic_adv_loss",
    "semantic_style_loss",
    "weights_init_normal",
]
