"""Encoder-decoder repair model: layers, training, decoding, evaluation."""
from .config import VARIANTS, ModelConfig, TrainConfig
from .transformer import Seq2Seq, ShapeMismatch

__all__ = ["VARIANTS", "ModelConfig", "TrainConfig", "Seq2Seq", "ShapeMismatch"]
