"""Human-in-the-loop workbench for representation-bias auditing and debiasing.

The package audits per-subgroup representation of a tabular dataset, trains
a small deterministic classifier for subgroup-level performance awareness,
generates constraint-satisfying synthetic samples by neighbor interpolation,
and walks an expert through curating those samples into an augmented
dataset, with a replayable audit log of every step.
"""

from .augment import (
    AllowedSet,
    AugmentationPlan,
    Constraint,
    GeneratedBatch,
    GeneratedSample,
    Interval,
    eligible_pool,
    generate,
    nearest_neighbors,
    validate_against,
)
from .curation import (
    AugmentedDataset,
    FilterPredicate,
    accept_batch,
    annotate_batch,
    commit_edit,
    export_csv,
    filter_batch,
    remove_samples,
    what_if,
)
from .errors import WorkbenchError
from .metrics import (
    BiasReport,
    SubgroupStats,
    bias_report,
    coverage_check,
    representation_rates,
)
from .model import (
    Model,
    ModelConfig,
    Prediction,
    evaluate_by_subgroup,
    gradient,
    predict,
    train,
)
from .session import Session, SessionLog, replay_log
from .store import Store
from .tabular import (
    BinSpec,
    Dataset,
    SubgroupKey,
    VariableSchema,
    bin_label,
    load_dataset,
    schema_from_json,
    schema_to_json,
    subgroups,
)

__version__ = "0.1.0"

__all__ = [
    "AllowedSet",
    "AugmentationPlan",
    "AugmentedDataset",
    "BiasReport",
    "BinSpec",
    "Constraint",
    "Dataset",
    "FilterPredicate",
    "GeneratedBatch",
    "GeneratedSample",
    "Interval",
    "Model",
    "ModelConfig",
    "Prediction",
    "Session",
    "SessionLog",
    "Store",
    "SubgroupKey",
    "SubgroupStats",
    "VariableSchema",
    "WorkbenchError",
    "accept_batch",
    "annotate_batch",
    "bias_report",
    "bin_label",
    "commit_edit",
    "coverage_check",
    "eligible_pool",
    "evaluate_by_subgroup",
    "export_csv",
    "filter_batch",
    "generate",
    "gradient",
    "load_dataset",
    "nearest_neighbors",
    "predict",
    "remove_samples",
    "replay_log",
    "representation_rates",
    "schema_from_json",
    "schema_to_json",
    "subgroups",
    "train",
    "validate_against",
    "what_if",
]
