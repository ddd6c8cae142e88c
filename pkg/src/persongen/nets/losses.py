"""All training loss terms for the semantic and appearance networks.

Every function returns differentiable scalars; per-pixel sums are
normalized to means so the loss weights transfer across resolutions.
"""

from __future__ import annotations

import torch

from .. import constants
from ..representation import LossReport, PoseSpec, extract_face

LOG_EPS = 1e-8
PROB_EPS = 1e-12


def _tensor(x) -> torch.Tensor:
    return x.data if hasattr(x, "data") and not isinstance(x, torch.Tensor) else x


def _batched(t: torch.Tensor) -> torch.Tensor:
    return t[None] if t.ndim == 3 else t


def ce_loss(pred, pseudo_gt, tgt_mask) -> torch.Tensor:
    """Pose-mask-weighted cross entropy between predicted and pseudo maps.

    Per-pixel value is -log(prediction at the true label) * (1 + mask), so
    body pixels weigh twice the background; averaged over pixels.
    """
    pred = _batched(_tensor(pred))
    gt = _batched(_tensor(pseudo_gt))
    mask = _batched(_tensor(tgt_mask))
    if pred.shape != gt.shape or mask.shape[2:] != pred.shape[2:]:
        raise ValueError("ce_loss shape mismatch")
    logp = torch.log(pred.clamp_min(LOG_EPS))
    picked = (gt * logp).sum(dim=1)
    return -(picked * (1.0 + mask[:, 0])).mean()


def _check_probs(*tensors):
    for t in tensors:
        if not torch.isfinite(t).all():
            raise ValueError("adversarial loss received non-finite discriminator outputs")


def adversarial_loss(d_real: torch.Tensor, d_fake: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Non-saturating GAN split on sigmoid discriminator outputs.

    loss_D = -E[log D(real)] - E[log(1 - D(fake))];  loss_G = -E[log D(fake)].
    """
    _check_probs(d_real, d_fake)
    loss_d = -torch.log(d_real.clamp_min(PROB_EPS)).mean() \
        - torch.log((1.0 - d_fake).clamp_min(PROB_EPS)).mean()
    loss_g = -torch.log(d_fake.clamp_min(PROB_EPS)).mean()
    return loss_d, loss_g


def semantic_adv_loss(d_real, d_fake):
    return adversarial_loss(d_real, d_fake)


def appearance_adv_loss(d_real, d_fake_forward, d_fake_back):
    """Both generated images are judged against the real reference; the two
    adversarial terms are summed."""
    ld1, lg1 = adversarial_loss(d_real, d_fake_forward)
    ld2, lg2 = adversarial_loss(d_real, d_fake_back)
    return ld1 + ld2, lg1 + lg2


def pose_loss(gen_forward, gen_back, tgt_pose, src_pose, detector) -> torch.Tensor:
    """Mean-squared heatmap error of a frozen pose detector on both
    generated images."""
    p_fwd = detector(_batched(gen_forward))
    p_back = detector(_batched(gen_back))
    tgt = _batched(_tensor(tgt_pose))
    src = _batched(_tensor(src_pose))
    if p_fwd.shape != tgt.shape or p_back.shape != src.shape:
        raise ValueError(
            f"detector output {tuple(p_fwd.shape)} does not match pose tensors {tuple(tgt.shape)}"
        )
    return ((p_fwd - tgt) ** 2).mean() + ((p_back - src) ** 2).mean()


def content_loss(back_image, ref_image, extractor) -> torch.Tensor:
    """Mean-squared perceptual feature distance (cycle consistency)."""
    fa = extractor(_batched(back_image))
    fb = extractor(_batched(ref_image))
    return ((fa - fb) ** 2).mean()


def _gram(features: torch.Tensor) -> torch.Tensor:
    c = features.shape[0]
    flat = features.reshape(c, -1)
    return flat @ flat.T / float(c * flat.shape[1])


def _label_masks(parse: torch.Tensor, size: tuple[int, int]) -> torch.Tensor:
    """Binary per-label maps downsampled to the feature resolution.

    Soft maps are argmax-binarized; any coverage within a cell marks it 1.
    """
    labels = parse.detach().argmax(dim=0)
    onehot = torch.nn.functional.one_hot(labels, parse.shape[0]).permute(2, 0, 1).float()
    pooled = torch.nn.functional.adaptive_avg_pool2d(onehot, size)
    return (pooled > 0).float()


def masked_gram_distance(img_a, img_b, masks_a, masks_b, extractor) -> torch.Tensor:
    """Sum over mask channels of squared Gram-matrix differences of the
    masked feature maps."""
    fa = extractor(_batched(img_a))[0]
    fb = extractor(_batched(img_b))[0]
    size = tuple(fa.shape[1:])
    total = fa.new_zeros(())
    for l in range(masks_a.shape[0]):
        ga = _gram(fa * masks_a[l][None])
        gb = _gram(fb * masks_b[l][None])
        total = total + ((ga - gb) ** 2).sum()
    return total


def semantic_style_loss(img_a, img_b, parse_a, parse_b, extractor) -> torch.Tensor:
    """Per-label Gram matching between two images under their parses."""
    img_a, img_b = _tensor(img_a), _tensor(img_b)
    pa, pb = _tensor(parse_a), _tensor(parse_b)
    if pa.ndim != 3 or pb.ndim != 3:
        raise ValueError("semantic_style_loss expects single-sample [L,H,W] parses")
    fa_size = tuple(extractor(_batched(img_a))[0].shape[1:])
    masks_a = _label_masks(pa, fa_size)
    masks_b = _label_masks(pb, fa_size)
    return masked_gram_distance(img_a, img_b, masks_a, masks_b, extractor)


def mask_style_loss(img_a, img_b, parts_a, parts_b, extractor) -> torch.Tensor:
    """Style loss with body-part masks standing in for semantic labels (the
    no-parsing baseline's substitute)."""
    fa_size = tuple(extractor(_batched(_tensor(img_a)))[0].shape[1:])
    ma = torch.nn.functional.adaptive_avg_pool2d(
        torch.as_tensor(parts_a, dtype=torch.float32), fa_size
    )
    mb = torch.nn.functional.adaptive_avg_pool2d(
        torch.as_tensor(parts_b, dtype=torch.float32), fa_size
    )
    return masked_gram_distance(img_a, img_b, (ma > 0).float(), (mb > 0).float(), extractor)


def face_loss(
    ref_image: torch.Tensor,
    gen_forward: torch.Tensor,
    gen_back: torch.Tensor,
    ref_pose: PoseSpec,
    tgt_pose: PoseSpec,
    face_discriminator,
    crop_size=constants.DEFAULT_FACE_CROP,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Adversarial loss over face crops of the real and generated images.

    Each of the two adversarial terms contributes only the halves whose
    crops are valid; with no valid crops at all both losses are zero.
    """
    real = extract_face(ref_image, ref_pose, crop_size)
    fakes = [
        extract_face(gen_forward, tgt_pose, crop_size),
        extract_face(gen_back, ref_pose, crop_size),
    ]
    zero = ref_image.new_zeros(())
    loss_d, loss_g = zero.clone(), zero.clone()
    if not real.valid and not any(f.valid for f in fakes):
        return loss_d, loss_g
    d_real = face_discriminator(real.data[None]) if real.valid else None
    for f in fakes:
        if real.valid:
            loss_d = loss_d - torch.log(d_real.clamp_min(PROB_EPS)).mean()
        if f.valid:
            d_fake = face_discriminator(f.data[None])
            loss_d = loss_d - torch.log((1.0 - d_fake).clamp_min(PROB_EPS)).mean()
            loss_g = loss_g - torch.log(d_fake.clamp_min(PROB_EPS)).mean()
    return loss_d, loss_g


def hs_total_loss(adv, ce, lambda_ce: float):
    """Weighted semantic-network total; returns (tensor, LossReport)."""
    for v in (adv, ce):
        if not torch.isfinite(torch.as_tensor(v)).all():
            raise ValueError("non-finite loss component")
    total = adv + lambda_ce * ce
    report = LossReport(
        terms={"adv": float(torch.as_tensor(adv).detach()), "ce": float(torch.as_tensor(ce).detach())},
        total=float(total.detach() if isinstance(total, torch.Tensor) else total),
    )
    return total, report


def ha_total_loss(adv, pose, cont, sty, face, config):
    """Weighted appearance-network total per the configured lambdas."""
    comps = {"adv": adv, "pose": pose, "cont": cont, "sty": sty, "face": face}
    for name, v in comps.items():
        if not torch.isfinite(torch.as_tensor(v)).all():
            raise ValueError(f"non-finite loss component '{name}'")
    total = (
        adv
        + config.lambda_pose * pose
        + config.lambda_cont * cont
        + config.lambda_sty * sty
        + face
    )
    report = LossReport(
        terms={name: float(torch.as_tensor(v).detach()) for name, v in comps.items()},
        total=float(total.detach() if isinstance(total, torch.Tensor) else total),
    )
    return total, report
