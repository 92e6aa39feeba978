import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";
import { type Backend, fixture, startBackend } from "./helpers/backend.js";

let backend: Backend;
let api: ApiClient;

beforeAll(async () => {
  backend = await startBackend();
  api = new ApiClient(backend.base);
});

afterAll(async () => {
  await backend.stop();
});

describe("api client", () => {
  it("uploads a dataset and reads it back", async () => {
    const uploaded = await api.uploadDataset(
      await fixture("education_rows.csv"),
      await fixture("education_schema.json"),
    );
    expect(uploaded.dataset_id).toBe("d1");
    expect(uploaded.row_count).toBe(600);

    const dataset = await api.getDataset(uploaded.dataset_id);
    expect(dataset.session_id).toBe(uploaded.session_id);
    expect(dataset.schema.map((v) => v.name)).toEqual(["education", "outcome"]);
    expect(dataset.target_variable).toBe("outcome");
  });

  it("surfaces the error envelope verbatim", async () => {
    const err = await api.getDataset("d404").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("DATASET_NOT_FOUND");
    expect(err.details.resource_id).toBe("d404");
    expect(err.isStaleVersion).toBe(false);
  });

  it("marks stale-version conflicts", async () => {
    await api.trainModel("d1", {});
    const plan = await api.createPlan("d1", {
      target_class: "yes",
      requested_count: 4,
      constraints: [],
    });
    const batch = await api.generate(plan.plan_id);
    await api.annotate(batch.batch_id, { expected_version: batch.version });
    const err = await api
      .removeSamples(batch.batch_id, [], batch.version) // version is stale now
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("STALE_VERSION");
    expect(err.isStaleVersion).toBe(true);
    expect(err.status).toBe(409);
  });

  it("streams CSV exports and NDJSON logs as text", async () => {
    const csv = await api.exportCsv("d1");
    expect(csv.startsWith("education,outcome\n")).toBe(true);
    expect(csv.trim().split("\n")).toHaveLength(601);

    const dataset = await api.getDataset("d1");
    const log = await api.getLog(dataset.session_id);
    const actions = log
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line).action);
    expect(actions[0]).toBe("loaded");
    expect(actions).toContain("exported");
  });
});
