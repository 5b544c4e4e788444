"""Second-FFT spectral features and a compressive-sampling sparse representation
classifier for music genre recognition."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .audio_io import AudioClip, DatasetIndex, add_awgn, load_clip, scan_dataset, synth_clip
from .classifier import ClassifierConfig, Dictionary, build_dictionary, classify
from .features import FeatureConfig, FeatureVector, extract_features
from .solvers import gaussian_matrix, ista_l1, omp

__all__ = [
    "BACKEND",
    "AudioClip",
    "DatasetIndex",
    "add_awgn",
    "load_clip",
    "scan_dataset",
    "synth_clip",
    "ClassifierConfig",
    "Dictionary",
    "build_dictionary",
    "classify",
    "FeatureConfig",
    "FeatureVector",
    "extract_features",
    "gaussian_matrix",
    "ista_l1",
    "omp",
]
