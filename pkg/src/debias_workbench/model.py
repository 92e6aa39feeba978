"""Multinomial logistic regression trained by full-batch gradient descent.

The model is deliberately simple and fully deterministic: zero-initialized
weights, softmax cross-entropy with an L2 penalty, one-hot encoding for
categorical predictors and z-score standardization for numeric ones.
Training rows are put into a canonical order first so that row permutations
of the input cannot change even the floating-point accumulation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    DegenerateTarget,
    InvalidValue,
    MissingBinSpec,
    SchemaMismatch,
    TooFewRows,
    TooFewRowsPerClass,
    UnknownCategory,
)
from .tabular import (
    CATEGORICAL,
    Dataset,
    SubgroupKey,
    Value,
    VariableSchema,
    assign_bin,
    format_bin_label,
    resolve_bin_edges,
    schema_from_json,
    schema_to_json,
    subgroups,
)

DEFAULT_LEARNING_RATE = 0.1
DEFAULT_ITERATIONS = 500
DEFAULT_L2_PENALTY = 1e-3
DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class ModelConfig:
    learning_rate: float = DEFAULT_LEARNING_RATE
    iterations: int = DEFAULT_ITERATIONS
    l2_penalty: float = DEFAULT_L2_PENALTY
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise InvalidValue("learning_rate must be positive")
        if self.iterations < 1:
            raise InvalidValue("iterations must be at least 1")
        if self.l2_penalty < 0:
            raise InvalidValue("l2_penalty cannot be negative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidValue("seed must fit in an unsigned 64-bit integer")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "iterations": self.iterations,
            "l2_penalty": self.l2_penalty,
            "seed": self.seed,
        }

    @staticmethod
    def from_json_dict(doc: dict[str, Any]) -> "ModelConfig":
        if not isinstance(doc, dict):
            raise InvalidValue("model config must be a JSON object")
        unknown = set(doc) - {"learning_rate", "iterations", "l2_penalty", "seed"}
        if unknown:
            raise InvalidValue(f"unknown model config fields: {sorted(unknown)}")
        try:
            return ModelConfig(
                learning_rate=float(doc.get("learning_rate", DEFAULT_LEARNING_RATE)),
                iterations=int(doc.get("iterations", DEFAULT_ITERATIONS)),
                l2_penalty=float(doc.get("l2_penalty", DEFAULT_L2_PENALTY)),
                seed=int(doc.get("seed", 0)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidValue):
                raise
            raise InvalidValue(f"malformed model config: {exc}") from None


@dataclass(frozen=True)
class Feature:
    """One encoded design-matrix column."""

    variable: str
    kind: str  # "onehot" or "numeric"
    category: str | None = None
    mean: float = 0.0
    std: float = 1.0


@dataclass(frozen=True)
class FeatureEncoding:
    features: tuple[Feature, ...]
    dropped: tuple[str, ...]  # constant numeric predictors removed from the design

    def to_json_dict(self) -> dict[str, Any]:
        out = []
        for f in self.features:
            if f.kind == "onehot":
                out.append({"variable": f.variable, "kind": "onehot", "category": f.category})
            else:
                out.append(
                    {"variable": f.variable, "kind": "numeric", "mean": f.mean, "std": f.std}
                )
        return {"features": out, "dropped": list(self.dropped)}

    @staticmethod
    def from_json_dict(doc: dict[str, Any]) -> "FeatureEncoding":
        features = tuple(
            Feature(
                variable=f["variable"],
                kind=f["kind"],
                category=f.get("category"),
                mean=float(f.get("mean", 0.0)),
                std=float(f.get("std", 1.0)),
            )
            for f in doc["features"]
        )
        return FeatureEncoding(features=features, dropped=tuple(doc.get("dropped", ())))


@dataclass(frozen=True)
class Prediction:
    label: str
    probabilities: tuple[float, ...]
    confidence: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "probabilities": list(self.probabilities),
            "confidence": self.confidence,
        }

    @staticmethod
    def from_json_dict(doc: dict[str, Any]) -> "Prediction":
        return Prediction(
            label=doc["label"],
            probabilities=tuple(float(p) for p in doc["probabilities"]),
            confidence=float(doc["confidence"]),
        )


@dataclass(frozen=True)
class Model:
    class_labels: tuple[str, ...]
    target_variable: str
    schema: tuple[VariableSchema, ...]
    encoding: FeatureEncoding
    weights: np.ndarray = field(repr=False)  # shape (classes, features + 1), bias last
    config: ModelConfig = field(default_factory=ModelConfig)
    loss_trace: tuple[float, ...] = ()

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "class_labels": list(self.class_labels),
            "target_variable": self.target_variable,
            "schema": schema_to_json(self.schema),
            "encoding": self.encoding.to_json_dict(),
            "weights": [[float(w) for w in row] for row in self.weights],
            "config": self.config.to_json_dict(),
            "loss_trace": [float(v) for v in self.loss_trace],
        }

    @staticmethod
    def from_json_dict(doc: dict[str, Any]) -> "Model":
        return Model(
            class_labels=tuple(doc["class_labels"]),
            target_variable=doc["target_variable"],
            schema=schema_from_json(doc["schema"]),
            encoding=FeatureEncoding.from_json_dict(doc["encoding"]),
            weights=np.asarray(doc["weights"], dtype=float),
            config=ModelConfig.from_json_dict(doc["config"]),
            loss_trace=tuple(float(v) for v in doc["loss_trace"]),
        )


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_gradient(
    weights: np.ndarray,
    design: np.ndarray,
    class_index: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray]:
    """Cross-entropy plus (l2/2)*||W||^2 and its gradient.

    ``design`` already carries the bias column.  With zero rows the data term
    vanishes and the gradient is exactly ``l2_penalty * weights``.
    """
    n = design.shape[0]
    if n == 0:
        return 0.5 * l2_penalty * float(np.sum(weights**2)), l2_penalty * weights
    probs = softmax(design @ weights.T)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), class_index] = 1.0
    data_loss = -float(np.mean(np.log(probs[np.arange(n), class_index])))
    loss = data_loss + 0.5 * l2_penalty * float(np.sum(weights**2))
    grad = (probs - onehot).T @ design / n + l2_penalty * weights
    return loss, grad


def _encode_categorical(var: VariableSchema, value: Value) -> None:
    if value not in (var.categories or ()):
        raise UnknownCategory(f"{value!r} is not a declared category of {var.name!r}")


def build_encoding(dataset: Dataset, rows: Sequence[tuple[Value, ...]]) -> FeatureEncoding:
    """Fit the design-matrix encoding on the given training rows."""
    features: list[Feature] = []
    dropped: list[str] = []
    for var in dataset.predictors:
        col = dataset.index_of(var.name)
        if var.kind == CATEGORICAL:
            for category in var.categories or ():
                features.append(Feature(variable=var.name, kind="onehot", category=category))
        else:
            values = np.asarray([float(r[col]) for r in rows])
            mean = float(values.mean())
            std = float(values.std())
            if std == 0.0:
                dropped.append(var.name)
            else:
                features.append(Feature(variable=var.name, kind="numeric", mean=mean, std=std))
    return FeatureEncoding(features=tuple(features), dropped=tuple(dropped))


def encode_rows(
    encoding: FeatureEncoding,
    schema: Sequence[VariableSchema],
    rows: Sequence[tuple[Value, ...]],
) -> np.ndarray:
    index = {v.name: i for i, v in enumerate(schema)}
    by_name = {v.name: v for v in schema}
    n = len(rows)
    out = np.empty((n, len(encoding.features)), dtype=float)
    for j, feat in enumerate(encoding.features):
        col = index[feat.variable]
        var = by_name[feat.variable]
        if feat.kind == "onehot":
            for i, row in enumerate(rows):
                _encode_categorical(var, row[col])
                out[i, j] = 1.0 if row[col] == feat.category else 0.0
        else:
            out[:, j] = [(float(row[col]) - feat.mean) / feat.std for row in rows]
    return out


def _with_bias(design: np.ndarray) -> np.ndarray:
    return np.hstack([design, np.ones((design.shape[0], 1))])


def _canonical_order(raw: np.ndarray, class_index: np.ndarray) -> np.ndarray:
    """Sort rows lexicographically by raw feature values, then class.

    The returned permutation makes the training pipeline independent of the
    input row order, down to floating-point accumulation.
    """
    keys = [class_index] + [raw[:, j] for j in range(raw.shape[1] - 1, -1, -1)]
    return np.lexsort(tuple(keys))


def train(dataset: Dataset, config: ModelConfig | None = None) -> Model:
    """Fit the classifier on every row of the dataset.

    Weights start at zero and follow ``iterations`` full-batch steps of
    gradient descent; the recorded loss trace is evaluated before each step.
    """
    config = config or ModelConfig()
    rows = dataset.rows
    if len(rows) < 2:
        raise TooFewRows(f"training needs at least 2 rows, got {len(rows)}")
    target = dataset.target
    target_col = dataset.index_of(target.name)
    present = [c for c in (target.categories or ()) if any(r[target_col] == c for r in rows)]
    if len(present) < 2:
        raise DegenerateTarget(
            f"target {target.name!r} has {len(present)} distinct value(s) in the data"
        )
    label_of = {c: i for i, c in enumerate(present)}
    y = np.asarray([label_of[r[target_col]] for r in rows])

    # Encode with raw numeric values first, put rows into canonical order,
    # then fit standardization so accumulation order is input-independent.
    raw_encoding = build_encoding(dataset, rows)
    raw = encode_rows(
        FeatureEncoding(
            features=tuple(
                Feature(f.variable, f.kind, f.category, 0.0, 1.0)
                for f in raw_encoding.features
            ),
            dropped=raw_encoding.dropped,
        ),
        dataset.schema,
        rows,
    )
    order = _canonical_order(raw, y)
    raw = raw[order]
    y = y[order]

    numeric = [j for j, f in enumerate(raw_encoding.features) if f.kind == "numeric"]
    features = list(raw_encoding.features)
    for j in numeric:
        mean = float(raw[:, j].mean())
        std = float(raw[:, j].std())
        features[j] = Feature(features[j].variable, "numeric", None, mean, std)
        raw[:, j] = (raw[:, j] - mean) / std
    encoding = FeatureEncoding(features=tuple(features), dropped=raw_encoding.dropped)

    design = _with_bias(raw)
    weights = np.zeros((len(present), design.shape[1]))
    trace: list[float] = []
    for _ in range(config.iterations):
        loss, grad = loss_and_gradient(weights, design, y, config.l2_penalty)
        trace.append(loss)
        weights = weights - config.learning_rate * grad

    return Model(
        class_labels=tuple(present),
        target_variable=target.name,
        schema=dataset.schema,
        encoding=encoding,
        weights=weights,
        config=config,
        loss_trace=tuple(trace),
    )


def predict(model: Model, instance: Sequence[Value]) -> Prediction:
    """Classify one full-schema row; the target slot is ignored.

    Ties on the maximum probability resolve to the lowest class index.
    """
    if len(instance) != len(model.schema):
        raise SchemaMismatch(
            f"instance has {len(instance)} values, schema has {len(model.schema)}"
        )
    design = _with_bias(encode_rows(model.encoding, model.schema, [tuple(instance)]))
    probs = softmax(design @ model.weights.T)[0]
    best = int(np.argmax(probs))
    return Prediction(
        label=model.class_labels[best],
        probabilities=tuple(float(p) for p in probs),
        confidence=float(probs[best]),
    )


def gradient(model: Model, dataset: Dataset) -> np.ndarray:
    """Loss gradient at the model's weights over the dataset's rows."""
    target_col = dataset.index_of(model.target_variable)
    label_of = {c: i for i, c in enumerate(model.class_labels)}
    for row in dataset.rows:
        if row[target_col] not in label_of:
            raise UnknownCategory(f"target value {row[target_col]!r} unknown to the model")
    y = np.asarray([label_of[r[target_col]] for r in dataset.rows])
    design = _with_bias(encode_rows(model.encoding, dataset.schema, dataset.rows))
    _, grad = loss_and_gradient(model.weights, design, y, model.config.l2_penalty)
    return grad


# ---------------------------------------------------------------------------
# Stratified cross-validation


def _fold_assignment(y: np.ndarray, n_classes: int, folds: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=int)
    for c in range(n_classes):
        members = np.flatnonzero(y == c)
        perm = rng.permutation(members)
        fold_of[perm] = np.arange(len(perm)) % folds
    return fold_of


def cross_validate(
    dataset: Dataset, config: ModelConfig | None = None, folds: int = DEFAULT_FOLDS
) -> np.ndarray:
    """Per-row held-out correctness flags from seeded stratified k-fold CV.

    Every row is scored exactly once, by the model of the fold that held it
    out.  Fold assignment is a pure function of the config seed.
    """
    config = config or ModelConfig()
    if folds < 2:
        raise InvalidValue("cross-validation needs at least 2 folds")
    target = dataset.target
    target_col = dataset.index_of(target.name)
    present = [
        c for c in (target.categories or ()) if any(r[target_col] == c for r in dataset.rows)
    ]
    if len(present) < 2:
        raise DegenerateTarget(f"target {target.name!r} is constant in the data")
    label_of = {c: i for i, c in enumerate(present)}
    y = np.asarray([label_of[r[target_col]] for r in dataset.rows])
    for c, i in label_of.items():
        if int(np.sum(y == i)) < folds:
            raise TooFewRowsPerClass(
                f"class {c!r} has fewer rows than the {folds} folds require"
            )

    fold_of = _fold_assignment(y, len(present), folds, config.seed)
    correct = np.zeros(len(dataset.rows), dtype=bool)
    for f in range(folds):
        held = np.flatnonzero(fold_of == f)
        kept = np.flatnonzero(fold_of != f)
        train_rows = tuple(dataset.rows[i] for i in kept)
        sub = Dataset(
            id=f"{dataset.id}-fold{f}",
            schema=dataset.schema,
            rows=train_rows,
            origin=tuple(dataset.origin[i] for i in kept),
        )
        fold_model = train(sub, config)
        for i in held:
            correct[i] = predict(fold_model, dataset.rows[i]).label == dataset.rows[i][target_col]
    return correct


def row_subgroup_keys(dataset: Dataset, variable: str) -> list[SubgroupKey]:
    """Subgroup key of each row for one variable, with bins resolved once."""
    var = dataset.variable(variable)
    values = dataset.column(variable)
    if var.kind == CATEGORICAL:
        return [SubgroupKey(variable, str(v)) for v in values]
    spec = var.binning
    if spec is None:
        raise MissingBinSpec(f"numeric variable {variable!r} has no bin spec")
    edges = resolve_bin_edges(spec, [float(v) for v in values])
    return [
        SubgroupKey(variable, format_bin_label(edges, assign_bin(edges, float(v))))
        for v in values
    ]


def accuracy_by_subgroup(
    dataset: Dataset, variable: str, correct: np.ndarray
) -> dict[SubgroupKey, float | None]:
    """Aggregate held-out correctness per subgroup; empty subgroups map to None."""
    keys = row_subgroup_keys(dataset, variable)
    totals: dict[SubgroupKey, int] = {}
    hits: dict[SubgroupKey, int] = {}
    for key, ok in zip(keys, correct):
        totals[key] = totals.get(key, 0) + 1
        hits[key] = hits.get(key, 0) + (1 if ok else 0)
    out: dict[SubgroupKey, float | None] = {}
    for key, _count in subgroups(dataset, variable):
        out[key] = hits[key] / totals[key] if totals.get(key) else None
    return out


def evaluate_by_subgroup(
    dataset: Dataset,
    variable: str,
    config: ModelConfig | None = None,
    folds: int = DEFAULT_FOLDS,
) -> dict[SubgroupKey, float | None]:
    """Held-out accuracy per subgroup of one variable.

    A subgroup has an accuracy if and only if it has at least one row,
    because stratified CV holds out every row exactly once.
    """
    correct = cross_validate(dataset, config, folds)
    return accuracy_by_subgroup(dataset, variable, correct)
