"""Landmark image selection: Gabor features scored by a small SCG-trained net."""

from .classify import ClassificationDecision, classify_image, decide
from .errors import GaborsetError
from .features import extract_features, fft_convolve
from .gabor import GaborBank, GaborKernel, GaborParams, default_bank, make_bank, make_kernel
from .metrics import ConfusionCounts, MetricsReport, compute, confusion_from_run
from .network import (
    MlpModel,
    TrainConfig,
    TrainingSet,
    TrainReport,
    forward,
    gradient,
    load_model,
    perf,
    save_model,
    scg_train,
)
from .pipeline import (
    DatasetManifest,
    LandmarkConfig,
    RoiSpec,
    ingest,
    load_config,
    parse_config,
    run_pipeline,
    serialize_config,
)
from .preprocess import AheParams, RawImage, equalize_adaptive, normalize, preprocess_image, resize, to_grayscale

__version__ = "0.1.0"

__all__ = [
    "AheParams",
    "ClassificationDecision",
    "ConfusionCounts",
    "DatasetManifest",
    "GaborBank",
    "GaborKernel",
    "GaborParams",
    "GaborsetError",
    "LandmarkConfig",
    "MetricsReport",
    "MlpModel",
    "RawImage",
    "RoiSpec",
    "TrainConfig",
    "TrainReport",
    "TrainingSet",
    "classify_image",
    "compute",
    "confusion_from_run",
    "decide",
    "default_bank",
    "equalize_adaptive",
    "extract_features",
    "fft_convolve",
    "forward",
    "gradient",
    "ingest",
    "load_config",
    "load_model",
    "make_bank",
    "make_kernel",
    "normalize",
    "parse_config",
    "perf",
    "preprocess_image",
    "resize",
    "run_pipeline",
    "save_model",
    "scg_train",
    "serialize_config",
    "to_grayscale",
]
