"""Representation rates, coverage, and the aggregated bias report."""

from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import education_dataset
from debias_workbench.errors import AllZeroCounts, EmptyInput, InvalidValue
from debias_workbench.metrics import (
    bias_report,
    coverage_check,
    default_coverage_threshold,
    representation_rates,
)
from debias_workbench.tabular import (
    Dataset,
    SubgroupKey,
    VariableSchema,
    subgroups,
)

counts_lists = st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=12).filter(
    lambda cs: any(c > 0 for c in cs)
)


def _keyed(counts):
    return [(f"g{i}", c) for i, c in enumerate(counts)]


# ---------------------------------------------------------------------------
# Representation rates


def test_rates_education_example():
    rates = representation_rates(
        [("high-school", 100), ("bachelor", 300), ("master", 200)]
    )
    assert [k for k, _ in rates] == ["high-school", "bachelor", "master"]
    expected = [Fraction(1, 3), Fraction(1, 1), Fraction(2, 3)]
    for (_, got), want in zip(rates, expected):
        assert abs(got - float(want)) <= 1e-9
    assert [round(r, 2) for _, r in rates] == [0.33, 1.0, 0.67]


def test_rates_single_subgroup_is_one():
    assert representation_rates([("x", 42)]) == [("x", 1.0)]


def test_rates_two_maxima():
    rates = [r for _, r in representation_rates([("a", 7), ("b", 7), ("c", 1)])]
    assert rates[0] == rates[1] == 1.0
    assert abs(rates[2] - 1 / 7) <= 1e-12


def test_rates_errors():
    with pytest.raises(EmptyInput):
        representation_rates([])
    with pytest.raises(AllZeroCounts):
        representation_rates([("a", 0), ("b", 0)])
    with pytest.raises(InvalidValue):
        representation_rates([("a", -1), ("b", 2)])


@settings(max_examples=80)
@given(counts=counts_lists, factor=st.integers(min_value=1, max_value=1000))
def test_rates_scale_invariance(counts, factor):
    base = [r for _, r in representation_rates(_keyed(counts))]
    scaled = [r for _, r in representation_rates(_keyed([c * factor for c in counts]))]
    for a, b in zip(base, scaled):
        assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=80)
@given(counts=counts_lists, data=st.data())
def test_rates_monotonicity(counts, data):
    # Raising one count weakly raises its rate and weakly lowers the others.
    i = data.draw(st.integers(min_value=0, max_value=len(counts) - 1))
    bump = data.draw(st.integers(min_value=1, max_value=1000))
    before = [r for _, r in representation_rates(_keyed(counts))]
    bumped = list(counts)
    bumped[i] += bump
    after = [r for _, r in representation_rates(_keyed(bumped))]
    assert after[i] >= before[i] - 1e-12
    for j in range(len(counts)):
        if j != i:
            assert after[j] <= before[j] + 1e-12


@settings(max_examples=60)
@given(counts=counts_lists)
def test_rates_max_is_exactly_one(counts):
    rates = [r for _, r in representation_rates(_keyed(counts))]
    assert max(rates) == 1.0
    assert all(0.0 <= r <= 1.0 for r in rates)


# ---------------------------------------------------------------------------
# Coverage


def test_coverage_education_threshold_150():
    got = coverage_check(
        [("high-school", 100), ("bachelor", 300), ("master", 200)], 150
    )
    assert got == [
        ("high-school", False, 50),
        ("bachelor", True, 0),
        ("master", True, 0),
    ]


def test_coverage_threshold_zero_passes_everything():
    got = coverage_check(_keyed([0, 5, 10]), 0)
    assert all(met and deficit == 0 for _, met, deficit in got)


def test_coverage_boundary_enumeration():
    got = coverage_check(_keyed([149, 150, 151]), 150)
    assert [(met, d) for _, met, d in got] == [(False, 1), (True, 0), (True, 0)]


def test_coverage_errors():
    with pytest.raises(EmptyInput):
        coverage_check([], 5)
    with pytest.raises(InvalidValue):
        coverage_check(_keyed([1]), -1)


@settings(max_examples=60)
@given(
    counts=counts_lists,
    t1=st.integers(min_value=0, max_value=2000),
    t2=st.integers(min_value=0, max_value=2000),
)
def test_coverage_monotonic_in_threshold(counts, t1, t2):
    lo, hi = sorted((t1, t2))
    at_lo = coverage_check(_keyed(counts), lo)
    at_hi = coverage_check(_keyed(counts), hi)
    for (_, met_lo, _), (_, met_hi, _) in zip(at_lo, at_hi):
        if not met_lo:
            assert not met_hi  # raising the bar never fixes a failure


# ---------------------------------------------------------------------------
# Bias report


def test_bias_report_education():
    report = bias_report(education_dataset(), coverage_threshold=150)
    assert report.coverage_threshold == 150
    assert abs(report.min_rate_per_variable["education"] - 1 / 3) <= 1e-9
    assert report.uncovered_subgroup_count == 1
    assert report.most_impacted[0] == SubgroupKey("education", "high-school")
    stats = {s.key.label: s for s in report.per_variable["education"]}
    assert stats["high-school"].coverage_deficit == 50
    assert stats["bachelor"].coverage_met and stats["master"].coverage_met


def test_bias_report_balanced_dataset():
    schema = (
        VariableSchema("c", "categorical", "predictor", ("p", "q")),
        VariableSchema("label", "categorical", "target", ("a", "b")),
    )
    rows = tuple(("p" if i % 2 else "q", "a" if i < 10 else "b") for i in range(20))
    report = bias_report(Dataset(id="d", schema=schema, rows=rows), coverage_threshold=5)
    for stats in report.per_variable.values():
        for s in stats:
            assert s.representation_rate == 1.0
    assert report.uncovered_subgroup_count == 0


def test_bias_report_matches_brute_force_recount():
    # Independent recount straight off the raw rows.
    ds = education_dataset()
    report = bias_report(ds, coverage_threshold=150)
    for var in ds.schema:
        idx = ds.index_of(var.name)
        tally: dict[str, int] = {}
        for row in ds.rows:
            tally[str(row[idx])] = tally.get(str(row[idx]), 0) + 1
        peak = max(tally.values())
        for s in report.per_variable[var.name]:
            want = tally.get(s.key.label, 0)
            assert s.count == want
            assert abs(s.representation_rate - want / peak) <= 1e-12
            assert s.coverage_met == (want >= 150)
            assert s.coverage_deficit == max(0, 150 - want)


def test_bias_report_audits_target_separately():
    ds = education_dataset()
    report = bias_report(ds, coverage_threshold=150)
    assert report.target_variable == "outcome"
    assert "outcome" in report.per_variable
    assert {s.key.label for s in report.per_variable["outcome"]} == {"yes", "no"}


def test_bias_report_empty_subgroup_scores_zero():
    schema = (
        VariableSchema("c", "categorical", "predictor", ("p", "q", "ghost")),
        VariableSchema("label", "categorical", "target", ("a", "b")),
    )
    rows = (("p", "a"), ("q", "b"), ("p", "a"))
    report = bias_report(Dataset(id="d", schema=schema, rows=rows), coverage_threshold=1)
    ghost = [s for s in report.per_variable["c"] if s.key.label == "ghost"][0]
    assert ghost.representation_rate == 0.0
    assert not ghost.coverage_met


def test_most_impacted_is_a_permutation_of_all_subgroups():
    ds = education_dataset()
    report = bias_report(ds, coverage_threshold=150)
    everything = {s.key for stats in report.per_variable.values() for s in stats}
    assert set(report.most_impacted) == everything
    assert len(report.most_impacted) == len(everything)


def test_most_impacted_prefers_accuracy_when_available():
    ds = education_dataset()
    accuracy = {
        SubgroupKey("education", "bachelor"): 0.2,  # worst accuracy despite best rate
        SubgroupKey("education", "high-school"): 0.9,
        SubgroupKey("education", "master"): 0.8,
    }
    report = bias_report(ds, coverage_threshold=150, subgroup_accuracy=accuracy)
    assert report.most_impacted[0] == SubgroupKey("education", "bachelor")


def test_default_threshold_is_ceil_of_ten_percent_mean():
    ds = education_dataset()
    counts = []
    for var in ds.schema:
        counts.extend(n for _, n in subgroups(ds, var.name))
    want = math.ceil(0.1 * (sum(counts) / len(counts)))
    assert default_coverage_threshold(ds) == want
    report = bias_report(ds)  # surfaced in the report
    assert report.coverage_threshold == want


def test_report_json_is_stable_and_ordered():
    ds = education_dataset()
    doc = bias_report(ds, coverage_threshold=150).to_json_dict()
    assert list(doc["per_variable"]) == ["education", "outcome"]  # schema order
    labels = [s["label"] for s in doc["per_variable"]["education"]]
    assert labels == ["high-school", "bachelor", "master"]  # declaration order
    assert json.dumps(doc) == json.dumps(bias_report(ds, coverage_threshold=150).to_json_dict())
