/** UI acceptance gate.
 *
 * Part one: against fixture datasets the three views render values equal to
 * the API responses they were built from (snapshot comparison through the
 * recording fetch). Part two: the diabetes scenario runs end to end through
 * the rendered UI, from plan form to the Data Explorer showing the diabetic
 * count raised by exactly the fifty accepted samples.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import type { BatchDoc, BiasReportDoc, DatasetDoc } from "../src/types.js";
import { type Backend, fixture, startBackend } from "./helpers/backend.js";
import {
  Recorder,
  click,
  newApp,
  setInput,
  setSelect,
  textOf,
  unexplainedNumbers,
} from "./helpers/harness.js";

let backend: Backend;

beforeAll(async () => {
  backend = await startBackend();
});

afterAll(async () => {
  await backend.stop();
});

function lastJson<T>(recorder: Recorder, pattern: RegExp): T {
  const call = recorder.calls.filter((c) => pattern.test(c.path)).at(-1);
  if (!call) throw new Error(`no call matching ${pattern}`);
  return call.responseJson as T;
}

describe("acceptance", () => {
  it("criterion 9a: the three views render values equal to API responses", async () => {
    const recorder = new Recorder();
    const { app, document } = newApp(backend.base, recorder);
    await app.loadDataset(
      await fixture("education_rows.csv"),
      await fixture("education_schema.json"),
    );
    setInput(document, "#threshold-input", "150");
    click(document, "#apply-threshold");
    await app.idle();
    setSelect(document, "#variable-select", "education");
    await app.idle();

    // Data Explorer vs the bias report and dataset document
    const bias = lastJson<BiasReportDoc>(recorder, /\/bias$/);
    const dataset = lastJson<DatasetDoc>(recorder, /\/datasets\/d\d+$/);
    expect(textOf(document, ".overall-rows")).toBe(String(dataset.row_count));
    expect(textOf(document, ".overall-version")).toBe(String(dataset.version));
    expect(textOf(document, ".overall-threshold")).toBe(String(bias.coverage_threshold));
    expect(textOf(document, ".overall-uncovered")).toBe(String(bias.uncovered_subgroup_count));
    for (const stats of bias.per_variable.education!) {
      const bar = document.querySelector(
        `#distribution .bar-group[data-label="${stats.label}"]`,
      )!;
      expect(bar.getAttribute("data-count")).toBe(String(stats.count));
      expect(bar.getAttribute("data-rate")).toBe(String(stats.representation_rate));
      expect(bar.querySelector(".stat-rate")!.textContent).toBe(
        stats.representation_rate.toFixed(2),
      );
    }
    for (const [variable, minRate] of Object.entries(bias.min_rate_per_variable)) {
      const row = document.querySelector(`.variable-row[data-variable="${variable}"]`)!;
      expect(row.querySelector(".min-rate")!.textContent).toBe(minRate.toFixed(2));
    }
    expect(unexplainedNumbers(app.viewHost, recorder)).toEqual([]);

    // Augmentation Controller vs the plan-creation response
    app.show("augment");
    await app.idle();
    setSelect(document, "#target-class", "yes");
    setInput(document, "#requested-count", "5");
    recorder.reset();
    click(document, "#create-plan");
    await app.idle();
    const created = lastJson<{ eligible_pool_size: number }>(recorder, /\/plans$/);
    expect(textOf(document, "#pool-display .pool-size")).toBe(
      String(created.eligible_pool_size),
    );
    expect(unexplainedNumbers(app.viewHost, recorder)).toEqual([]);

    // Generated Data Explorer vs the batch document
    recorder.reset();
    click(document, "#generate");
    await app.idle();
    const batch = lastJson<BatchDoc>(recorder, /\/batches\/[^/]+$/);
    expect(textOf(document, ".batch-produced")).toBe(String(batch.produced_count));
    expect(textOf(document, ".batch-attempts")).toBe(String(batch.attempts_used));
    expect(textOf(document, ".batch-version")).toBe(String(batch.version));
    const renderedRows = [...document.querySelectorAll("tr[data-sample-id]")];
    expect(renderedRows.map((tr) => tr.getAttribute("data-sample-id"))).toEqual(
      batch.samples.map((s) => s.id),
    );
    for (const [i, sample] of batch.samples.entries()) {
      const cells = [...renderedRows[i]!.querySelectorAll(".cell-value")].map(
        (c) => c.textContent,
      );
      expect(cells).toEqual([String(sample.values.education), String(sample.values.outcome)]);
      expect(renderedRows[i]!.getAttribute("data-status")).toBe(sample.status);
    }
    expect(unexplainedNumbers(app.viewHost, recorder)).toEqual([]);

    console.log("criterion 9a: PASS - views render values equal to API responses");
  });

  it("criterion 9b: diabetes scenario end-to-end through the UI", async () => {
    const recorder = new Recorder();
    const { app, document } = newApp(backend.base, recorder);
    await app.loadDataset(
      await fixture("diabetes_rows.csv"),
      await fixture("diabetes_schema.json"),
    );

    // the Data Explorer opens on the target variable; note the diabetic count
    expect(textOf(document, "#distribution h2")).toBe("Subgroups of diagnosis");
    const beforeBar = document.querySelector(
      '#distribution .bar-group[data-label="diabetic"]',
    )!;
    const diabeticBefore = Number(beforeBar.getAttribute("data-count"));
    const biasBefore = lastJson<BiasReportDoc>(recorder, /\/bias$/);
    expect(diabeticBefore).toBe(
      biasBefore.per_variable.diagnosis!.find((s) => s.label === "diabetic")!.count,
    );

    // fill the plan: 50 diabetic samples, age 50..60, cholesterol and BP high
    app.show("augment");
    await app.idle();
    setSelect(document, "#target-class", "diabetic");
    setInput(document, "#requested-count", "50");
    const enable = (variable: string) => {
      const row = document.querySelector(`.constraint-row[data-variable="${variable}"]`)!;
      (row.querySelector('input[type="checkbox"]') as HTMLElement).click();
    };
    enable("age");
    const ageRow = document.querySelector('.constraint-row[data-variable="age"]')!;
    for (const [bound, value] of [
      ["lo", "50"],
      ["hi", "60"],
    ] as const) {
      const input = ageRow.querySelector(`input[data-bound="${bound}"]`) as HTMLInputElement;
      input.value = value;
      input.dispatchEvent(new (document.defaultView as any).Event("input", { bubbles: true }));
    }
    enable("cholesterol");
    (
      document.querySelector(
        '.constraint-row[data-variable="cholesterol"] input[data-allowed="high"]',
      ) as HTMLElement
    ).click();
    enable("blood_pressure");
    (
      document.querySelector(
        '.constraint-row[data-variable="blood_pressure"] input[data-allowed="high"]',
      ) as HTMLElement
    ).click();

    recorder.reset();
    click(document, "#create-plan");
    await app.idle();

    // plan accepted; the eligible pool size is shown before generation
    const created = lastJson<{ plan_id: string; eligible_pool_size: number }>(
      recorder,
      /\/plans$/,
    );
    expect(created.eligible_pool_size).toBeGreaterThan(0);
    expect(textOf(document, "#pool-display .pool-size")).toBe(
      String(created.eligible_pool_size),
    );
    const postedPlan = recorder.mutations()[0]!.requestBody as Record<string, unknown>;
    expect(postedPlan).toMatchObject({
      target_class: "diabetic",
      requested_count: 50,
      constraints: [
        { variable: "age", interval: [50, 60] },
        { variable: "cholesterol", allowed: ["high"] },
        { variable: "blood_pressure", allowed: ["high"] },
      ],
    });

    // generate and review: fifty pending samples, all within the constraints
    click(document, "#generate");
    await app.idle();
    const batch = lastJson<BatchDoc>(recorder, /\/batches\/[^/]+$/);
    expect(batch.produced_count).toBe(50);
    const rows = [...document.querySelectorAll("tr[data-sample-id]")];
    expect(rows).toHaveLength(50);
    for (const sample of batch.samples) {
      expect(sample.values.diagnosis).toBe("diabetic");
      expect(Number(sample.values.age)).toBeGreaterThanOrEqual(50);
      expect(Number(sample.values.age)).toBeLessThanOrEqual(60);
      expect(sample.values.cholesterol).toBe("high");
      expect(sample.values.blood_pressure).toBe("high");
    }
    expect(unexplainedNumbers(app.viewHost, recorder)).toEqual([]);

    // accept all fifty through the UI
    for (const tr of rows) {
      (tr.querySelector("input[data-select]") as HTMLElement).click();
    }
    recorder.reset();
    click(document, "#accept-selected");
    await app.idle();

    // back on the Data Explorer, the diabetic count is up by exactly fifty
    expect(textOf(document, "#distribution h2")).toBe("Subgroups of diagnosis");
    const afterBar = document.querySelector(
      '#distribution .bar-group[data-label="diabetic"]',
    )!;
    expect(Number(afterBar.getAttribute("data-count"))).toBe(diabeticBefore + 50);
    const biasAfter = lastJson<BiasReportDoc>(recorder, /\/bias$/);
    expect(afterBar.getAttribute("data-count")).toBe(
      String(biasAfter.per_variable.diagnosis!.find((s) => s.label === "diabetic")!.count),
    );
    expect(afterBar.querySelector(".stat-count")!.textContent).toBe(
      String(diabeticBefore + 50),
    );
    expect(unexplainedNumbers(app.viewHost, recorder)).toEqual([]);

    console.log(
      `criterion 9b: PASS - diabetes scenario end-to-end (${diabeticBefore} -> ${
        diabeticBefore + 50
      } diabetic)`,
    );
  });
});
