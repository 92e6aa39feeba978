"""Constrained interpolation: pools, neighbors, generation, validation."""

from __future__ import annotations

import json
import random

import pytest

from conftest import clinic_dataset, random_dataset, random_plan_doc
from debias_workbench.augment import (
    AllowedSet,
    AugmentationPlan,
    Constraint,
    Interval,
    batch_from_json_dict,
    batch_id_for,
    batch_to_csv,
    batch_to_json_dict,
    eligible_pool,
    generate,
    interpolate_row,
    nearest_neighbors,
    validate_against,
    validate_plan,
)
from debias_workbench.errors import (
    InsufficientEligibleSamples,
    InvalidValue,
    KTooLarge,
    UnknownVariable,
)
from debias_workbench.metrics import representation_rates
from debias_workbench.tabular import (
    Dataset,
    VariableSchema,
    load_dataset,
    schema_from_json,
    subgroups,
)


def _scalar_dataset(values, labels=None):
    schema = (
        VariableSchema("x", "numeric-continuous", "predictor"),
        VariableSchema("label", "categorical", "target", ("t", "other")),
    )
    labels = labels or ["t"] * len(values)
    rows = tuple((float(v), lab) for v, lab in zip(values, labels))
    return Dataset(id="d", schema=schema, rows=rows)


DIABETES_SCHEMA = schema_from_json(json.dumps([
    {"name": "age", "kind": "numeric-integer", "role": "predictor"},
    {"name": "cholesterol", "kind": "categorical", "role": "predictor",
     "categories": ["low", "normal", "high"]},
    {"name": "blood_pressure", "kind": "categorical", "role": "predictor",
     "categories": ["low", "normal", "high"]},
    {"name": "diagnosis", "kind": "categorical", "role": "target",
     "categories": ["diabetic", "healthy"]},
]))


def diabetes_dataset():
    rng = random.Random(5)
    lines = ["age,cholesterol,blood_pressure,diagnosis"]
    # A guaranteed core matching the plan: diabetic, 50-60, high, high.
    for i in range(12):
        lines.append(f"{50 + i % 11},high,high,diabetic")
    for _ in range(88):
        age = rng.randint(20, 80)
        chol = rng.choice(["low", "normal", "high"])
        bp = rng.choice(["low", "normal", "high"])
        diag = rng.choice(["diabetic", "healthy"])
        lines.append(f"{age},{chol},{bp},{diag}")
    return load_dataset("\n".join(lines) + "\n", DIABETES_SCHEMA)


def diabetes_plan(count=50, seed=0):
    return AugmentationPlan.from_json_dict({
        "target_class": "diabetic",
        "requested_count": count,
        "constraints": [
            {"variable": "age", "interval": [50, 60]},
            {"variable": "cholesterol", "allowed": ["high"]},
            {"variable": "blood_pressure", "allowed": ["high"]},
        ],
        "seed": seed,
    })


# ---------------------------------------------------------------------------
# Constraint grammar


def test_interval_contains_endpoints():
    iv = Interval(50.0, 60.0)
    assert iv.contains(50.0) and iv.contains(60.0) and iv.contains(55.5)
    assert not iv.contains(49.999) and not iv.contains(60.001)


def test_interval_rejects_bad_bounds():
    with pytest.raises(InvalidValue):
        Interval(2.0, 1.0)
    with pytest.raises(InvalidValue):
        Interval(float("nan"), 1.0)


def test_allowed_set_rejects_empty():
    with pytest.raises(InvalidValue):
        AllowedSet(())
    assert AllowedSet(("b", "a", "b")).labels == ("a", "b")


def test_plan_validation_against_schema():
    schema = DIABETES_SCHEMA
    with pytest.raises(InvalidValue):
        validate_plan(AugmentationPlan("martian", 1), schema)
    with pytest.raises(UnknownVariable):
        validate_plan(
            AugmentationPlan("diabetic", 1, (Constraint("ghost", Interval(0, 1)),)), schema
        )
    with pytest.raises(InvalidValue):  # constraint may not touch the target
        validate_plan(
            AugmentationPlan(
                "diabetic", 1, (Constraint("diagnosis", AllowedSet(("diabetic",))),)
            ),
            schema,
        )
    with pytest.raises(InvalidValue):  # rule kind must match variable kind
        validate_plan(
            AugmentationPlan("diabetic", 1, (Constraint("age", AllowedSet(("a",)),),)),
            schema,
        )
    with pytest.raises(InvalidValue):
        validate_plan(
            AugmentationPlan(
                "diabetic", 1, (Constraint("cholesterol", AllowedSet(("purple",)),),)
            ),
            schema,
        )


def test_plan_rejects_duplicate_constraint_variables():
    with pytest.raises(InvalidValue):
        AugmentationPlan(
            "t",
            1,
            (Constraint("x", Interval(0, 1)), Constraint("x", Interval(2, 3))),
        )


def test_plan_json_round_trip():
    plan = diabetes_plan()
    assert AugmentationPlan.from_json_dict(plan.to_json_dict()) == plan
    with pytest.raises(InvalidValue):
        AugmentationPlan.from_json_dict({"target_class": "t"})
    with pytest.raises(InvalidValue):
        AugmentationPlan.from_json_dict(
            {"target_class": "t", "requested_count": 1, "surprise": True}
        )


# ---------------------------------------------------------------------------
# Eligible pool


def test_eligible_pool_conjunction_of_conditions():
    ds = diabetes_dataset()
    pool = eligible_pool(ds, diabetes_plan())
    age = ds.index_of("age")
    chol = ds.index_of("cholesterol")
    bp = ds.index_of("blood_pressure")
    diag = ds.index_of("diagnosis")
    want = [
        i
        for i, row in enumerate(ds.rows)
        if row[diag] == "diabetic"
        and 50 <= row[age] <= 60
        and row[chol] == "high"
        and row[bp] == "high"
    ]
    assert pool == want
    assert pool == sorted(pool)
    assert len(pool) >= 12


def test_eligible_pool_without_constraints_is_whole_class():
    ds = diabetes_dataset()
    plan = AugmentationPlan("diabetic", 5)
    diag = ds.index_of("diagnosis")
    want = [i for i, row in enumerate(ds.rows) if row[diag] == "diabetic"]
    assert eligible_pool(ds, plan) == want


def test_eligible_pool_excludes_generated_rows():
    ds = diabetes_dataset()
    batch = generate(ds, diabetes_plan(count=5))
    merged_rows = ds.rows + tuple(s.values for s in batch.samples)
    merged = Dataset(
        id=ds.id,
        schema=ds.schema,
        rows=merged_rows,
        origin=ds.origin + ("generated",) * len(batch.samples),
    )
    assert eligible_pool(merged, diabetes_plan(count=5)) == eligible_pool(ds, diabetes_plan(count=5))


# ---------------------------------------------------------------------------
# Neighbors


def test_nearest_neighbors_scalar_frozen_example():
    ds = _scalar_dataset([10, 20, 30, 50])
    assert nearest_neighbors(ds, [0, 1, 2, 3], 0, 2) == [1, 2]


def test_nearest_neighbors_duplicate_row_ranks_first():
    ds = _scalar_dataset([10, 10, 30, 50])
    assert nearest_neighbors(ds, [0, 1, 2, 3], 0, 1) == [1]


def test_nearest_neighbors_ties_break_by_row_id():
    ds = _scalar_dataset([10, 5, 15, 50])  # rows 1 and 2 both sit at distance 5
    assert nearest_neighbors(ds, [0, 1, 2, 3], 0, 2) == [1, 2]


def test_nearest_neighbors_k_too_large():
    ds = _scalar_dataset([10, 20])
    with pytest.raises(KTooLarge):
        nearest_neighbors(ds, [0, 1], 0, 2)
    with pytest.raises(InvalidValue):
        nearest_neighbors(ds, [0, 1], 7, 1)


def test_nearest_neighbors_matches_brute_force():
    rng = random.Random(9)
    for trial in range(15):
        ds = random_dataset(rng, max_rows=50)
        pool = list(range(len(ds.rows)))
        if len(pool) < 3:
            continue
        base = rng.choice(pool)
        k = rng.randint(1, len(pool) - 1)

        # Brute force: plain-python Gower over predictors, sort by (d, id).
        preds = ds.predictors
        spans = {}
        for var in preds:
            if var.kind != "categorical":
                col = [float(v) for v in ds.column(var.name)]
                spans[var.name] = max(col) - min(col)

        def dist(a, b):
            total = 0.0
            for var in preds:
                j = ds.index_of(var.name)
                va, vb = ds.rows[a][j], ds.rows[b][j]
                if var.kind == "categorical":
                    total += 0.0 if va == vb else 1.0
                else:
                    span = spans[var.name]
                    total += abs(float(va) - float(vb)) / span if span > 0 else 0.0
            return total / len(preds)

        want = sorted((i for i in pool if i != base), key=lambda i: (dist(base, i), i))[:k]
        assert nearest_neighbors(ds, pool, base, k) == want


# ---------------------------------------------------------------------------
# Interpolation


def test_interpolation_midpoint_example():
    plan = diabetes_plan()
    base = (52, "high", "high", "diabetic")
    neighbor = (58, "high", "high", "diabetic")
    values = interpolate_row(DIABETES_SCHEMA, base, neighbor, 0.5, "diabetic", plan)
    assert values[0] == 55
    assert validate_against(values, plan, DIABETES_SCHEMA) == []


def test_interpolation_integer_rounds_half_up():
    schema = (
        VariableSchema("n", "numeric-integer", "predictor"),
        VariableSchema("label", "categorical", "target", ("t", "o")),
    )
    plan = AugmentationPlan("t", 1)
    # 2 + 0.5*(5-2) = 3.5 -> rounds to 4
    got = interpolate_row(schema, (2, "t"), (5, "t"), 0.5, "t", plan)
    assert got[0] == 4


def test_interpolation_categorical_switches_at_half():
    schema = (
        VariableSchema("c", "categorical", "predictor", ("p", "q")),
        VariableSchema("label", "categorical", "target", ("t", "o")),
    )
    plan = AugmentationPlan("t", 1)
    assert interpolate_row(schema, ("p", "t"), ("q", "t"), 0.49, "t", plan)[0] == "p"
    assert interpolate_row(schema, ("p", "t"), ("q", "t"), 0.5, "t", plan)[0] == "q"


def test_interpolation_containment_between_parents():
    rng = random.Random(21)
    schema = (
        VariableSchema("x", "numeric-continuous", "predictor"),
        VariableSchema("label", "categorical", "target", ("t", "o")),
    )
    plan = AugmentationPlan("t", 1)
    for _ in range(200):
        a, b = rng.uniform(-50, 50), rng.uniform(-50, 50)
        u = rng.random()
        got = interpolate_row(schema, (a, "t"), (b, "t"), u, "t", plan)[0]
        assert min(a, b) <= got <= max(a, b)


def test_integer_rounding_clamps_into_constraint():
    schema = (
        VariableSchema("n", "numeric-integer", "predictor"),
        VariableSchema("label", "categorical", "target", ("t", "o")),
    )
    plan = AugmentationPlan("t", 1, (Constraint("n", Interval(50, 60)),))
    # 60 + 0.99*(60-60)=60 stays; parents at the edge can round outside
    # without clamping: 59 + u*(60-59) with u=0.6 -> 59.6 -> 60, fine; craft
    # a case that rounds past the edge: 59.5 rounds to 60 (inside); for the
    # lower edge 50.4 rounds to 50 (inside). Force the clamp with lo=50.6:
    plan2 = AugmentationPlan("t", 1, (Constraint("n", Interval(50.6, 60.0)),))
    got = interpolate_row(schema, (51, "t"), (51, "t"), 0.0, "t", plan2)
    assert got[0] == 51
    got2 = interpolate_row(schema, (51, "t"), (52, "t"), 0.0, "t", plan2)
    assert 50.6 <= got2[0] <= 60.0


# ---------------------------------------------------------------------------
# validate_against


def test_validate_against_diabetes_examples():
    plan = diabetes_plan()
    good = (55, "high", "high", "diabetic")
    assert validate_against(good, plan, DIABETES_SCHEMA) == []
    bad = (45, "high", "high", "diabetic")
    violations = validate_against(bad, plan, DIABETES_SCHEMA)
    assert len(violations) == 1
    assert violations[0].variable == "age"
    assert "50" in violations[0].constraint and "60" in violations[0].constraint
    assert violations[0].value == 45


def test_validate_against_flags_wrong_target_class():
    plan = diabetes_plan()
    wrong = (55, "high", "high", "healthy")
    violations = validate_against(wrong, plan, DIABETES_SCHEMA)
    assert [v.variable for v in violations] == ["diagnosis"]


# ---------------------------------------------------------------------------
# Generation


def test_generate_produces_requested_count():
    ds = diabetes_dataset()
    batch = generate(ds, diabetes_plan(count=50))
    assert batch.produced_count == 50
    assert len(batch.samples) == 50
    assert batch.attempts_used >= 50


def test_generate_is_deterministic_bytes_and_ids():
    ds = diabetes_dataset()
    a = generate(ds, diabetes_plan(count=25))
    b = generate(ds, diabetes_plan(count=25))
    assert a.id == b.id == batch_id_for(ds, diabetes_plan(count=25))
    assert batch_to_csv(a, ds.schema) == batch_to_csv(b, ds.schema)
    assert [s.id for s in a.samples] == [s.id for s in b.samples]


def test_generate_seed_changes_output():
    ds = diabetes_dataset()
    a = generate(ds, diabetes_plan(count=25, seed=0))
    b = generate(ds, diabetes_plan(count=25, seed=1))
    assert a.id != b.id


def test_generate_every_sample_satisfies_the_plan():
    ds = diabetes_dataset()
    plan = diabetes_plan(count=50)
    for sample in generate(ds, plan).samples:
        assert validate_against(sample.values, plan, ds.schema) == []
        assert sample.status == "pending"


def test_generate_provenance_points_into_pool():
    ds = diabetes_dataset()
    plan = diabetes_plan(count=30)
    pool = set(eligible_pool(ds, plan))
    for s in generate(ds, plan).samples:
        assert s.provenance.base_row_id in pool
        assert s.provenance.neighbor_row_id in pool
        assert 0.0 <= s.provenance.u <= 1.0
        assert s.provenance.base_row_id != s.provenance.neighbor_row_id


def test_generate_identical_pool_rows_clone_the_source():
    ds = _scalar_dataset([7.0, 7.0], ["t", "t"])
    plan = AugmentationPlan("t", 10, neighbor_k=5)
    batch = generate(ds, plan)
    assert batch.produced_count == 10
    for s in batch.samples:
        assert s.values == (7.0, "t")


def test_generate_insufficient_pool():
    ds = _scalar_dataset([1.0, 2.0], ["t", "other"])
    with pytest.raises(InsufficientEligibleSamples):
        generate(ds, AugmentationPlan("t", 3))


def test_generate_sample_ids_unique_and_formatted():
    ds = diabetes_dataset()
    batch = generate(ds, diabetes_plan(count=12))
    ids = [s.id for s in batch.samples]
    assert len(set(ids)) == len(ids)
    assert ids[0] == f"{batch.id}-s0001"


def test_accepting_samples_raises_target_rate():
    ds = diabetes_dataset()
    before = dict(
        (k.label, n) for k, n in subgroups(ds, "diagnosis")
    )
    batch = generate(ds, diabetes_plan(count=50))
    merged = Dataset(
        id=ds.id,
        schema=ds.schema,
        rows=ds.rows + tuple(s.values for s in batch.samples),
        origin=ds.origin + ("generated",) * len(batch.samples),
    )
    after = dict((k.label, n) for k, n in subgroups(merged, "diagnosis"))
    assert after["diabetic"] == before["diabetic"] + 50
    rate_before = dict(representation_rates(list(before.items())))
    rate_after = dict(representation_rates(list(after.items())))
    assert rate_after["diabetic"] >= rate_before["diabetic"]


def test_randomized_generation_never_violates_constraints():
    rng = random.Random(77)
    checked = 0
    for _ in range(25):
        ds = random_dataset(rng, max_rows=60)
        plan = AugmentationPlan.from_json_dict(random_plan_doc(rng, ds))
        try:
            batch = generate(ds, plan)
        except InsufficientEligibleSamples:
            continue
        for s in batch.samples:
            assert validate_against(s.values, plan, ds.schema) == []
            checked += 1
    assert checked > 50


# ---------------------------------------------------------------------------
# Serialization


def test_batch_csv_has_provenance_columns():
    ds = diabetes_dataset()
    batch = generate(ds, diabetes_plan(count=3))
    lines = batch_to_csv(batch, ds.schema).splitlines()
    assert lines[0] == "age,cholesterol,blood_pressure,diagnosis,base_row_id,neighbor_row_id,u,status"
    assert len(lines) == 4
    assert lines[1].endswith(",pending")


def test_batch_json_round_trip():
    ds = diabetes_dataset()
    batch = generate(ds, diabetes_plan(count=4))
    doc = json.loads(json.dumps(batch_to_json_dict(batch, ds.schema)))
    again = batch_from_json_dict(doc, ds.schema)
    assert again.id == batch.id
    assert [s.values for s in again.samples] == [s.values for s in batch.samples]
    assert [s.provenance for s in again.samples] == [s.provenance for s in batch.samples]
