from spglab.toymodel.data import SyntheticMotionSpec, sample_arrays, sample_dataset, templates
from spglab.toymodel.denoiser import TinyDenoiser
from spglab.toymodel.train import TrainConfig, TrainResult, TrainingDiverged, train

__all__ = [
    "SyntheticMotionSpec",
    "TinyDenoiser",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "sample_arrays",
    "sample_dataset",
    "templates",
    "train",
]
