"""Representation-bias metrics over dataset subgroups.

Representation rate of a subgroup is its count divided by the largest
subgroup count of the same variable, so each variable's best-represented
subgroup scores 1.0.  Coverage checks each subgroup count against a
threshold of minimally sufficient data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence, TypeVar

from .errors import AllZeroCounts, EmptyInput, InvalidValue
from .tabular import Dataset, SubgroupKey, subgroups

DEFAULT_THRESHOLD_FRACTION = 0.1

K = TypeVar("K")


@dataclass(frozen=True)
class SubgroupStats:
    key: SubgroupKey
    count: int
    representation_rate: float
    coverage_met: bool
    coverage_deficit: int
    subgroup_accuracy: float | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "variable": self.key.variable,
            "label": self.key.label,
            "count": self.count,
            "representation_rate": self.representation_rate,
            "coverage_met": self.coverage_met,
            "coverage_deficit": self.coverage_deficit,
            "subgroup_accuracy": self.subgroup_accuracy,
        }


@dataclass(frozen=True)
class BiasReport:
    dataset_id: str
    coverage_threshold: int
    per_variable: dict[str, tuple[SubgroupStats, ...]]
    min_rate_per_variable: dict[str, float]
    uncovered_subgroup_count: int
    most_impacted: tuple[SubgroupKey, ...]
    target_variable: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dataset_id": self.dataset_id,
            "coverage_threshold": self.coverage_threshold,
            "target_variable": self.target_variable,
            "per_variable": {
                name: [s.to_json_dict() for s in stats]
                for name, stats in self.per_variable.items()
            },
            "min_rate_per_variable": dict(self.min_rate_per_variable),
            "uncovered_subgroup_count": self.uncovered_subgroup_count,
            "most_impacted": [
                {"variable": k.variable, "label": k.label} for k in self.most_impacted
            ],
        }


def representation_rates(counts: Sequence[tuple[K, int]]) -> list[tuple[K, float]]:
    """Each count divided by the maximum count, keyed like the input.

    Empty subgroups score 0.0; the largest subgroup scores exactly 1.0.
    Output order equals input order.
    """
    if len(counts) == 0:
        raise EmptyInput("no subgroup counts given")
    if any(c < 0 for _, c in counts):
        raise InvalidValue("subgroup counts cannot be negative")
    peak = max(c for _, c in counts)
    if peak == 0:
        raise AllZeroCounts("every subgroup count is zero")
    return [(key, c / peak) for key, c in counts]


def coverage_check(
    counts: Sequence[tuple[K, int]], threshold: int
) -> list[tuple[K, bool, int]]:
    """Per subgroup: (key, count >= threshold, deficit when uncovered else 0)."""
    if len(counts) == 0:
        raise EmptyInput("no subgroup counts given")
    if threshold < 0:
        raise InvalidValue("coverage threshold cannot be negative")
    return [
        (key, c >= threshold, 0 if c >= threshold else threshold - c)
        for key, c in counts
    ]


def default_coverage_threshold(dataset: Dataset) -> int:
    """Ceiling of 10% of the mean subgroup count across audited variables."""
    all_counts: list[int] = []
    for var in dataset.schema:
        all_counts.extend(n for _, n in subgroups(dataset, var.name))
    mean = sum(all_counts) / len(all_counts)
    return math.ceil(DEFAULT_THRESHOLD_FRACTION * mean)


def bias_report(
    dataset: Dataset,
    coverage_threshold: int | None = None,
    subgroup_accuracy: Mapping[SubgroupKey, float] | None = None,
) -> BiasReport:
    """Audit every variable (predictors and target) of a dataset.

    ``most_impacted`` ranks all subgroups ascending by accuracy when known,
    otherwise representation rate, breaking ties by count and then by
    (variable, label).
    """
    if coverage_threshold is None:
        coverage_threshold = default_coverage_threshold(dataset)
    accuracy = dict(subgroup_accuracy or {})

    per_variable: dict[str, tuple[SubgroupStats, ...]] = {}
    min_rate: dict[str, float] = {}
    uncovered = 0
    for var in dataset.schema:
        groups = subgroups(dataset, var.name)
        rates = representation_rates(groups)
        covered = coverage_check(groups, coverage_threshold)
        stats = tuple(
            SubgroupStats(
                key=key,
                count=count,
                representation_rate=rate,
                coverage_met=met,
                coverage_deficit=deficit,
                subgroup_accuracy=accuracy.get(key),
            )
            for (key, count), (_, rate), (_, met, deficit) in zip(groups, rates, covered)
        )
        per_variable[var.name] = stats
        min_rate[var.name] = min(rate for _, rate in rates)
        uncovered += sum(1 for _, met, _deficit in covered if not met)

    everything = [s for stats in per_variable.values() for s in stats]
    everything.sort(
        key=lambda s: (
            s.subgroup_accuracy if s.subgroup_accuracy is not None else s.representation_rate,
            s.count,
            s.key.variable,
            s.key.label,
        )
    )
    return BiasReport(
        dataset_id=dataset.id,
        coverage_threshold=coverage_threshold,
        per_variable=per_variable,
        min_rate_per_variable=min_rate,
        uncovered_subgroup_count=uncovered,
        most_impacted=tuple(s.key for s in everything),
        target_variable=dataset.target.name,
    )
