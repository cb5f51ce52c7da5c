"""Operator learning for solutions with moving discontinuities.

The pipeline extracts discontinuity locations from training fields, lifts
every output point into a label-augmented coordinate space where the target
is smooth, trains a small network to predict the discontinuity locations and
a DeepONet on the lifted points, and composes the two at prediction time.
"""

from .config import ExperimentConfig, default_config
from .errors import (
    ConfigError,
    CorruptionError,
    CutopError,
    ExtractionError,
    FormatVersionError,
    NoTransitionError,
    NumericError,
    ShapeError,
    StabilityError,
    UnsupportedError,
    UsageError,
)
from .extraction import (
    DiscontinuitySet,
    SmearMask,
    extract_jumps,
    extract_sharp_transition,
    filter_smeared,
)
from .lifting import (
    ENCODE_SCALE,
    DiscDataset,
    LiftedDataset,
    build_disc_dataset,
    build_lifted_dataset,
    region_label,
    region_labels,
)
from .metrics import MetricReport, dis_error, l1_error
from .operators import (
    CuttingNet,
    DeepONetModel,
    PiecewiseSolution,
    baseline_predict,
    compose_piecewise,
    cut_predict,
    cutnet_eval,
    deeponet_eval,
)
from .problems import (
    AdvectionIC,
    Dataset,
    RiemannIC,
    SolutionField,
    StimulusParams,
    advection_exact,
    burgers_exact,
    burgers_godunov,
    generate_dataset,
    parsimonious_simulate,
)
from .store import (
    load_dataset,
    load_disc,
    load_lifted,
    load_model,
    save_dataset,
    save_disc,
    save_lifted,
    save_model,
)
from .training import (
    TrainConfig,
    TrainReport,
    train_baseline,
    train_cutnet,
    train_operator,
)

__version__ = "0.1.0"

__all__ = [
    "AdvectionIC",
    "ConfigError",
    "CorruptionError",
    "CutopError",
    "CuttingNet",
    "Dataset",
    "DeepONetModel",
    "DiscDataset",
    "DiscontinuitySet",
    "ENCODE_SCALE",
    "ExperimentConfig",
    "ExtractionError",
    "FormatVersionError",
    "LiftedDataset",
    "MetricReport",
    "NoTransitionError",
    "NumericError",
    "PiecewiseSolution",
    "RiemannIC",
    "ShapeError",
    "SmearMask",
    "SolutionField",
    "StabilityError",
    "StimulusParams",
    "TrainConfig",
    "TrainReport",
    "UnsupportedError",
    "UsageError",
    "advection_exact",
    "baseline_predict",
    "build_disc_dataset",
    "build_lifted_dataset",
    "burgers_exact",
    "burgers_godunov",
    "compose_piecewise",
    "cut_predict",
    "cutnet_eval",
    "deeponet_eval",
    "default_config",
    "dis_error",
    "extract_jumps",
    "extract_sharp_transition",
    "filter_smeared",
    "generate_dataset",
    "l1_error",
    "load_dataset",
    "load_disc",
    "load_lifted",
    "load_model",
    "parsimonious_simulate",
    "region_label",
    "region_labels",
    "save_dataset",
    "save_disc",
    "save_lifted",
    "save_model",
    "train_baseline",
    "train_cutnet",
    "train_operator",
]
