"""Audit a small education survey for representation bias.

One categorical predictor with counts 100/300/200 makes the arithmetic easy
to follow: rates come out as 1/3, 1.0, and 2/3, and a coverage threshold of
150 leaves exactly one subgroup under-covered by 50 rows.
"""

from __future__ import annotations

import json

from debias_workbench import bias_report, load_dataset, schema_from_json

SCHEMA = [
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


def build_csv() -> str:
    lines = ["education,outcome"]
    i = 0
    for label, n in (("high-school", 100), ("bachelor", 300), ("master", 200)):
        for _ in range(n):
            lines.append(f"{label},{'yes' if i % 2 == 0 else 'no'}")
            i += 1
    return "\n".join(lines) + "\n"


def main() -> None:
    dataset = load_dataset(build_csv(), schema_from_json(json.dumps(SCHEMA)))

    report = bias_report(dataset, coverage_threshold=150)
    print(f"dataset {dataset.id}: {len(dataset.rows)} rows")
    print(f"coverage threshold: {report.coverage_threshold}\n")
    for variable, stats in report.per_variable.items():
        print(variable)
        for s in stats:
            flag = "ok " if s.coverage_met else f"UNDER-COVERED by {s.coverage_deficit}"
            print(
                f"  {s.key.label:<12} count {s.count:>4}"
                f"  rate {s.representation_rate:.2f}  {flag}"
            )
    print(f"\nuncovered subgroups: {report.uncovered_subgroup_count}")
    print("most impacted:", ", ".join(f"{k.variable}={k.label}" for k in report.most_impacted[:3]))

    # Omitting the threshold derives one from the data (10% of the mean
    # subgroup count, rounded up) and reports it back.
    derived = bias_report(dataset)
    print(f"\nderived default threshold: {derived.coverage_threshold}")


if __name__ == "__main__":
    main()
