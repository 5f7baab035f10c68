"""Model and training hyperparameters."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

VARIANTS = ("full", "no-diagnostic", "ce-only", "fe-only")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 4000
    encoder_layers: int = 2
    decoder_layers: int = 2
    d_model: int = 64
    num_heads: int = 4
    ffn_dim: int = 256
    max_input_tokens: int = 768
    max_output_tokens: int = 128
    dropout: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.num_heads:
            raise ValueError("d_model must be divisible by num_heads")
        if self.max_input_tokens < 4 or self.max_output_tokens < 2:
            raise ValueError("token limits too small")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 15
    batch_size: int = 16
    learning_rate: float = 2e-3
    warmup_steps: int = 100
    clip_norm: float = 1.0
    patience: int = 0  # with validation data: stop after this many epochs without improvement (0 = never)
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.patience < 0:
            raise ValueError("epochs and patience must be >= 0, batch_size >= 1")

    def to_json(self) -> dict:
        return asdict(self)
