"""Inference engine: pose transfer, texture transfer and map manipulation.

All three workflows route through the same appearance forward pass; parses
are hardened by argmax at inference (training keeps them soft for gradient
flow).  Model weights are frozen and shared read-only across callers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import torch

from .. import constants
from ..corpus import load_record_image, load_record_parse
from ..nets import ha_forward, hs_forward
from ..representation import (
    CorpusRecord,
    PoseSpec,
    SemanticMap,
    encode_heatmap,
    encode_pose_mask,
    image_to_tensor,
    tensor_to_image,
)
from ..trainer import TrainState, load_checkpoint


class ServiceError(ValueError):
    def __init__(self, code: str, message: str, status: int = 400):
        self.code = code
        self.status = status
        super().__init__(message)


@dataclass
class GenerationRequest:
    """Validated generation request; exactly the fields its mode demands."""

    mode: str  # pose_transfer | texture_transfer | manipulation
    reference_id: str | None = None
    target_pose: PoseSpec | None = None
    donor_id: str | None = None
    edited_parse: SemanticMap | None = None
    # uploaded reference (stands in for reference_id)
    image: np.ndarray | None = None
    keypoints: PoseSpec | None = None
    parse: SemanticMap | None = None

    def validate(self) -> None:
        uploaded = self.image is not None
        if uploaded and (self.keypoints is None or self.parse is None):
            raise ServiceError(
                "bad_upload", "uploaded images must carry keypoints and a parse"
            )
        if (self.reference_id is None) == (not uploaded):
            raise ServiceError(
                "bad_reference", "exactly one of reference_id or an uploaded image is required"
            )
        demanded = {
            "pose_transfer": "target_pose",
            "texture_transfer": "donor_id",
            "manipulation": "edited_parse",
        }
        if self.mode not in demanded:
            raise ServiceError("bad_mode", f"unknown mode '{self.mode}'")
        field = demanded[self.mode]
        if getattr(self, field) is None:
            raise ServiceError("missing_field", f"mode {self.mode} requires {field}")
        for mode, other in demanded.items():
            if mode != self.mode and getattr(self, other) is not None:
                raise ServiceError(
                    "foreign_field", f"mode {self.mode} does not take {other}"
                )


@dataclass
class _Prepared:
    image: torch.Tensor
    parse: torch.Tensor
    heatmap: torch.Tensor
    mask: torch.Tensor
    pose: PoseSpec


class InferenceEngine:
    def __init__(self, state: TrainState, records: list[CorpusRecord], checkpoint_id: str = "in-memory"):
        self.state = state
        self.config = state.config
        self.checkpoint_id = checkpoint_id
        self.records = {r.image_id: r for r in records}
        self._cache: dict[str, _Prepared] = {}
        for net in state.nets.values():
            net.eval()
            for p in net.parameters():
                p.requires_grad_(False)

    @classmethod
    def from_checkpoint(cls, path, records) -> "InferenceEngine":
        state = load_checkpoint(path)
        digest = hashlib.sha256(open(path, "rb").read()).hexdigest()[:16]
        return cls(state, records, checkpoint_id=digest)

    # ---- record plumbing -------------------------------------------------

    def record(self, image_id: str) -> CorpusRecord:
        rec = self.records.get(image_id)
        if rec is None:
            raise ServiceError("unknown_record", f"no record '{image_id}' in corpus", status=404)
        return rec

    def _prep_record(self, record: CorpusRecord) -> _Prepared:
        got = self._cache.get(record.image_id)
        if got is None:
            got = self._prep(
                load_record_image(record), load_record_parse(record), record.pose
            )
            self._cache[record.image_id] = got
        return got

    def _prep(self, image: np.ndarray, parse: SemanticMap | None, pose: PoseSpec) -> _Prepared:
        cfg = self.config
        if tuple(pose.image_size) != cfg.input_resolution:
            raise ServiceError(
                "bad_resolution",
                f"expected {cfg.input_resolution}, got {tuple(pose.image_size)}",
            )
        hm = encode_heatmap(pose, cfg.heatmap_sigma).data
        mask = encode_pose_mask(pose, cfg.limb_radius, cfg.dilation_radius).data
        parse_t = parse.data if parse is not None else None
        return _Prepared(image_to_tensor(image), parse_t, hm, mask, pose)

    def _pose_tensors(self, pose: PoseSpec):
        cfg = self.config
        if tuple(pose.image_size) != cfg.input_resolution:
            raise ServiceError(
                "bad_resolution",
                f"target pose size {tuple(pose.image_size)} != {cfg.input_resolution}",
            )
        hm = encode_heatmap(pose, cfg.heatmap_sigma).data
        mask = encode_pose_mask(pose, cfg.limb_radius, cfg.dilation_radius).data
        return hm, mask

    # ---- workflows -------------------------------------------------------

    def predict_parse(self, ref: _Prepared, tgt_hm, tgt_mask) -> torch.Tensor:
        """Hard [10, H, W] semantic map under the target pose."""
        pred = hs_forward(
            self.state.nets["hs"],
            ref.parse[None], ref.heatmap[None], ref.mask[None], tgt_hm[None], tgt_mask[None],
        ).data[0]
        hard = torch.nn.functional.one_hot(pred.argmax(dim=0), pred.shape[0])
        return hard.permute(2, 0, 1).float()

    def pose_transfer_prepared(self, ref: _Prepared, tgt_pose: PoseSpec) -> tuple[np.ndarray, SemanticMap]:
        tgt_hm, tgt_mask = self._pose_tensors(tgt_pose)
        with torch.no_grad():
            if self.config.use_parsing:
                hard = self.predict_parse(ref, tgt_hm, tgt_mask)
                out = ha_forward(
                    self.state.nets["ha"],
                    ref.image[None], ref.parse[None], ref.heatmap[None],
                    hard[None], tgt_hm[None],
                )[0]
                parse = SemanticMap(hard, mode="hard")
            else:
                out = ha_forward(
                    self.state.nets["ha"], ref.image[None], None, ref.heatmap[None],
                    None, tgt_hm[None],
                )[0]
                parse = None
        return tensor_to_image(out), parse

    def pose_transfer(self, reference: CorpusRecord | str, tgt_pose: PoseSpec) -> np.ndarray:
        rec = self.record(reference) if isinstance(reference, str) else reference
        image, _ = self.pose_transfer_prepared(self._prep_record(rec), tgt_pose)
        return image

    def texture_transfer(self, a: CorpusRecord | str, b: CorpusRecord | str):
        """(a's appearance in b's layout, b's appearance in a's layout)."""
        ra = self.record(a) if isinstance(a, str) else a
        rb = self.record(b) if isinstance(b, str) else b
        pa, pb = self._prep_record(ra), self._prep_record(rb)
        if pa.parse is None or pb.parse is None:
            raise ServiceError("missing_parse", "texture transfer needs parses on both records")
        with torch.no_grad():
            ab = ha_forward(
                self.state.nets["ha"], pa.image[None], pa.parse[None], pa.heatmap[None],
                pb.parse[None], pb.heatmap[None],
            )[0]
            ba = ha_forward(
                self.state.nets["ha"], pb.image[None], pb.parse[None], pb.heatmap[None],
                pa.parse[None], pa.heatmap[None],
            )[0]
        return tensor_to_image(ab), tensor_to_image(ba)

    def manipulate(self, reference: CorpusRecord | str, edited_parse: SemanticMap) -> np.ndarray:
        rec = self.record(reference) if isinstance(reference, str) else reference
        prep = self._prep_record(rec)
        if edited_parse.mode != "hard":
            raise ServiceError("bad_parse", "edited parse must be a hard label map")
        if edited_parse.data.shape != prep.parse.shape:
            raise ServiceError(
                "bad_resolution",
                f"edited parse shape {tuple(edited_parse.data.shape)} != {tuple(prep.parse.shape)}",
            )
        try:
            edited_parse.validate()
        except ValueError as e:
            raise ServiceError("bad_parse", str(e)) from e
        with torch.no_grad():
            out = ha_forward(
                self.state.nets["ha"], prep.image[None], prep.parse[None], prep.heatmap[None],
                edited_parse.data[None], prep.heatmap[None],
            )[0]
        return tensor_to_image(out)

    def generate(self, request: GenerationRequest) -> np.ndarray:
        request.validate()
        if request.image is not None:
            if request.image.shape[:2] != tuple(self.config.input_resolution):
                raise ServiceError(
                    "bad_resolution",
                    f"uploaded image must be {self.config.input_resolution}",
                )
            prep = self._prep(request.image, request.parse, request.keypoints)
            if request.mode == "pose_transfer":
                return self.pose_transfer_prepared(prep, request.target_pose)[0]
            if request.mode == "manipulation":
                if request.edited_parse.data.shape != prep.parse.shape:
                    raise ServiceError(
                        "bad_resolution",
                        f"edited parse shape {tuple(request.edited_parse.data.shape)} "
                        f"!= uploaded parse {tuple(prep.parse.shape)}",
                    )
                with torch.no_grad():
                    out = ha_forward(
                        self.state.nets["ha"], prep.image[None], prep.parse[None],
                        prep.heatmap[None], request.edited_parse.data[None], prep.heatmap[None],
                    )[0]
                return tensor_to_image(out)
            raise ServiceError("bad_mode", "uploaded texture transfer is not supported")
        if request.mode == "pose_transfer":
            return self.pose_transfer(request.reference_id, request.target_pose)
        if request.mode == "texture_transfer":
            return self.texture_transfer(request.reference_id, request.donor_id)[0]
        return self.manipulate(request.reference_id, request.edited_parse)

    def parameter_digest(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.state.nets):
            h.update(self.state.net_parameter_hash(name).encode())
        return h.hexdigest()
