from .model import (
    MODEL_FORMAT_VERSION,
    DrivingConfig,
    DrivingModel,
    load_model,
    mask_from_roles,
    save_model,
    vocabulary_hash,
)
from .sampling import (
    GenerationResult,
    SamplerConfig,
    generate,
    motion_token_accuracy,
    pose_logit_invariance_check,
)
from .text import UNK, TextTokenizer, words
from .training import (
    TrainerConfig,
    TrainingLog,
    TrainingPair,
    read_pairs,
    train,
    write_pairs,
)

__all__ = [
    "MODEL_FORMAT_VERSION",
    "UNK",
    "DrivingConfig",
    "DrivingModel",
    "GenerationResult",
    "SamplerConfig",
    "TextTokenizer",
    "TrainerConfig",
    "TrainingLog",
    "TrainingPair",
    "generate",
    "load_model",
    "mask_from_roles",
    "motion_token_accuracy",
    "pose_logit_invariance_check",
    "read_pairs",
    "save_model",
    "train",
    "vocabulary_hash",
    "words",
    "write_pairs",
]
