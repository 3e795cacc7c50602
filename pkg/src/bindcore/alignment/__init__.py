"""Contrastive alignment of modality embeddings."""
from .losses import NORM_TOL, info_nce, symmetric_loss
from .model import FORMAT_VERSION, JointModel, ModelConfig
from .training import AlignmentConfig, step_on_entries, train, train_step, validation_recall

__all__ = [
    "FORMAT_VERSION",
    "NORM_TOL",
    "AlignmentConfig",
    "JointModel",
    "ModelConfig",
    "info_nce",
    "step_on_entries",
    "symmetric_loss",
    "train",
    "train_step",
    "validation_recall",
]
