"""Shared dataset builders for the test suite.

The education example (counts 100/300/200) anchors the bias-metric tests;
the clinic builder gives a mixed-type dataset with enough signal for model
and generation tests; random_dataset feeds the randomized property suites.
"""

from __future__ import annotations

import json
import random

from debias_workbench.tabular import (
    Dataset,
    load_dataset,
    schema_from_json,
)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line("  " + line)


# ---------------------------------------------------------------------------
# Education example: one categorical predictor with counts 100/300/200


def education_schema_doc() -> list[dict]:
    return [
        {
            "name": "education",
            "kind": "categorical",
            "role": "predictor",
            "categories": ["high-school", "bachelor", "master"],
        },
        {
            "name": "outcome",
            "kind": "categorical",
            "role": "target",
            "categories": ["yes", "no"],
        },
    ]


def education_csv() -> str:
    lines = ["education,outcome"]
    counts = [("high-school", 100), ("bachelor", 300), ("master", 200)]
    i = 0
    for label, n in counts:
        for _ in range(n):
            lines.append(f"{label},{'yes' if i % 2 == 0 else 'no'}")
            i += 1
    return "\n".join(lines) + "\n"


def education_dataset() -> Dataset:
    schema = schema_from_json(json.dumps(education_schema_doc()))
    return load_dataset(education_csv(), schema)


# ---------------------------------------------------------------------------
# Clinic: mixed kinds with learnable signal (risk rises with age and bmi)


def clinic_schema_doc() -> list[dict]:
    return [
        {"name": "age", "kind": "numeric-integer", "role": "predictor"},
        {"name": "bmi", "kind": "numeric-continuous", "role": "predictor"},
        {
            "name": "smoker",
            "kind": "categorical",
            "role": "predictor",
            "categories": ["never", "former", "current"],
        },
        {
            "name": "risk",
            "kind": "categorical",
            "role": "target",
            "categories": ["low", "high"],
        },
    ]


def clinic_csv(n: int = 80, seed: int = 11) -> str:
    rng = random.Random(seed)
    lines = ["age,bmi,smoker,risk"]
    for _ in range(n):
        age = rng.randint(20, 79)
        bmi = round(rng.uniform(17.0, 38.0), 2)
        smoker = rng.choice(["never", "former", "current"])
        score = (age - 20) / 59 + (bmi - 17.0) / 21.0 + (0.6 if smoker == "current" else 0.0)
        risk = "high" if score > 1.1 else "low"
        lines.append(f"{age},{bmi},{smoker},{risk}")
    return "\n".join(lines) + "\n"


def clinic_dataset(n: int = 80, seed: int = 11) -> Dataset:
    schema = schema_from_json(json.dumps(clinic_schema_doc()))
    return load_dataset(clinic_csv(n, seed), schema)


# ---------------------------------------------------------------------------
# Randomized instances for the property suites


def random_dataset(rng: random.Random, max_rows: int = 200) -> Dataset:
    """A random mixed-type dataset with a non-degenerate binary target."""
    n_classes = rng.choice([2, 2, 3])
    classes = [f"c{j}" for j in range(n_classes)]
    variables: list[dict] = []
    n_numeric = rng.randint(1, 2)
    n_categorical = rng.randint(1, 2)
    for j in range(n_numeric):
        variables.append(
            {
                "name": f"num{j}",
                "kind": rng.choice(["numeric-continuous", "numeric-integer"]),
                "role": "predictor",
            }
        )
    for j in range(n_categorical):
        levels = [f"v{j}{k}" for k in range(rng.randint(2, 4))]
        variables.append(
            {
                "name": f"cat{j}",
                "kind": "categorical",
                "role": "predictor",
                "categories": levels,
            }
        )
    variables.append(
        {"name": "label", "kind": "categorical", "role": "target", "categories": classes}
    )
    schema = schema_from_json(json.dumps(variables))

    n_rows = rng.randint(8, max_rows)
    header = ",".join(v["name"] for v in variables)
    lines = [header]
    for i in range(n_rows):
        cells = []
        for v in variables[:-1]:
            if v["kind"] == "numeric-integer":
                cells.append(str(rng.randint(-20, 80)))
            elif v["kind"] == "numeric-continuous":
                cells.append(repr(round(rng.uniform(-5.0, 45.0), 4)))
            else:
                cells.append(rng.choice(v["categories"]))
        # Round-robin guarantees every class is present.
        cells.append(classes[i % n_classes])
        lines.append(",".join(cells))
    return load_dataset("\n".join(lines) + "\n", schema)


def random_plan_doc(rng: random.Random, dataset: Dataset) -> dict:
    """A plan whose constraints envelope two real rows, so the pool is >= 2."""
    target = dataset.target
    classes = list(target.categories)
    by_class: dict[str, list[int]] = {c: [] for c in classes}
    t = dataset.index_of(target.name)
    for i, row in enumerate(dataset.rows):
        by_class[str(row[t])].append(i)
    target_class = rng.choice([c for c in classes if len(by_class[c]) >= 2])
    a, b = rng.sample(by_class[target_class], 2)

    constraints = []
    for var in dataset.predictors:
        if rng.random() < 0.5:
            continue
        j = dataset.index_of(var.name)
        va, vb = dataset.rows[a][j], dataset.rows[b][j]
        if var.kind == "categorical":
            allowed = sorted({str(va), str(vb)})
            if rng.random() < 0.3 and len(allowed) < len(var.categories or ()):
                extra = rng.choice([c for c in var.categories if c not in allowed])
                allowed = sorted(allowed + [extra])
            constraints.append({"variable": var.name, "allowed": allowed})
        else:
            lo, hi = min(float(va), float(vb)), max(float(va), float(vb))
            pad = rng.choice([0.0, 0.0, rng.uniform(0.0, 3.0)])
            constraints.append({"variable": var.name, "interval": [lo - pad, hi + pad]})
    return {
        "target_class": target_class,
        "requested_count": rng.randint(1, 120),
        "constraints": constraints,
        "neighbor_k": rng.randint(1, 6),
        "seed": rng.randint(0, 2**31 - 1),
    }
