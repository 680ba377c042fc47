"""Per-sensor life-probability estimators."""

from ..streams import ProbabilityStream, load_probability_stream
from .acoustic import (
    acoustic_cnn_detect,
    acoustic_correlation_detect,
    acoustic_correlation_probability,
    make_acoustic_dataset,
    peak_similarity,
    subbands,
    train_acoustic_detector,
)
from .classifier import ClassifierConfig, SequenceClassifier
from .uwb import (
    default_pulse,
    make_uwb_dataset,
    select_range_bin,
    simulate_uwb_scene,
    train_uwb_detector,
    uwb_channels,
    uwb_detect,
    uwb_windows,
)
