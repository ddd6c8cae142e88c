"""Training configuration with flat key=value file I/O."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..nets import AppearanceNetConfig, SemanticNetConfig


@dataclass
class TrainConfig:
    # phase step counts
    phase1_steps: int = 1500
    phase2_steps: int = 600
    phase3_steps: int = 200
    # optimizer
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    batch_size: int = 4
    seed: int = 0
    checkpoint_every: int = 500
    sample_every: int = 0  # 0 = no sample grids
    # losses / nets
    base_channels: int = 24
    depth: int = 2
    lambda_ce: float = 10.0
    lambda_pose: float = 1.0
    lambda_cont: float = 0.03
    lambda_sty: float = 1.0
    use_face_loss: str = "auto"  # auto | on | off
    min_face_image_side: int = 64  # "auto" disables face loss below this
    use_parsing: bool = True  # False = no-parsing ablation baseline
    extractor: str = "conv"  # identity | conv | vgg16
    pose_detector_steps: int = 300
    height: int = 64
    width: int = 48
    # geometry (pixels at the configured height; see representation defaults)
    heatmap_sigma: float = 1.5
    limb_radius: float = 2.5
    dilation_radius: float = 1.25

    def __post_init__(self):
        if min(self.phase1_steps, self.phase2_steps, self.phase3_steps) < 0:
            raise ValueError("phase step counts must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.use_face_loss not in ("auto", "on", "off"):
            raise ValueError("use_face_loss must be auto|on|off")

    @property
    def input_resolution(self) -> tuple[int, int]:
        return (self.height, self.width)

    def face_loss_enabled(self) -> bool:
        if self.use_face_loss == "on":
            return True
        if self.use_face_loss == "off":
            return False
        return min(self.height, self.width) >= self.min_face_image_side

    def semantic_config(self) -> SemanticNetConfig:
        return SemanticNetConfig(
            base_channels=self.base_channels,
            depth=self.depth,
            lambda_ce=self.lambda_ce,
            input_resolution=self.input_resolution,
        )

    def appearance_config(self) -> AppearanceNetConfig:
        return AppearanceNetConfig(
            base_channels=self.base_channels,
            depth=self.depth,
            lambda_pose=self.lambda_pose,
            lambda_cont=self.lambda_cont,
            lambda_sty=self.lambda_sty,
            use_face_loss=self.face_loss_enabled(),
            input_resolution=self.input_resolution,
            use_parsing=self.use_parsing,
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        values = {}
        types = {f.name: f.type for f in fields(cls)}
        defaults = cls()
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line {ln}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in types:
                raise ValueError(f"config line {ln}: unknown key '{key}'")
            current = getattr(defaults, key)
            if isinstance(current, bool):
                values[key] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                values[key] = int(raw)
            elif isinstance(current, float):
                values[key] = float(raw)
            else:
                values[key] = raw
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        with open(path) as f:
            return cls.from_text(f.read())

    def as_dict(self) -> dict:
        return asdict(self)
