"""Decision-level fusion: network, training, metrics and Dempster-Shafer baseline."""

from .config import PRESETS, FusionConfig, preset
from .dempster import (
    VACUOUS,
    MassFunction,
    combine_pair,
    ds_combine,
    ds_fuse_probabilities,
    probability_to_mass,
)
from .metrics import roc_auc, roc_curve, threshold_metrics
from .network import (
    FusionNetwork,
    build_fusion_network,
    fusion_forward,
    load_fusion_checkpoint,
    rng_streams,
    save_fusion_checkpoint,
)
from .training import (
    Metrics,
    TrainingHistory,
    chronological_split,
    evaluate,
    train,
    write_predictions_csv,
)
