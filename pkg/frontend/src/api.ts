/** Typed client over the workbench REST surface.
 *
 * One method per endpoint, nothing else. Non-2xx responses become ApiError
 * carrying the server's code verbatim so views can show it unchanged.
 */

import type {
  AcceptDoc,
  AnnotateDoc,
  BatchDoc,
  BiasReportDoc,
  DatasetDoc,
  EditDoc,
  EditEntry,
  FilterPredicateDoc,
  FilterResultDoc,
  GenerateDoc,
  PlanCreatedDoc,
  PlanDoc,
  RemoveDoc,
  StoredPlanDoc,
  SubgroupsDoc,
  TrainDoc,
  UploadDoc,
  WhatIfDoc,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isStaleVersion(): boolean {
    return this.code === "STALE_VERSION";
  }
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  // -- datasets ---------------------------------------------------------

  async uploadDataset(csvText: string | Blob, schemaText: string | Blob): Promise<UploadDoc> {
    const form = new FormData();
    form.append("csv", toBlob(csvText, "text/csv"), "rows.csv");
    form.append("schema", toBlob(schemaText, "application/json"), "schema.json");
    const response = await this.fetchImpl(`${this.baseUrl}/datasets`, {
      method: "POST",
      body: form,
    });
    return this.decode(response);
  }

  getDataset(datasetId: string): Promise<DatasetDoc> {
    return this.getJson(`/datasets/${datasetId}`);
  }

  getBias(datasetId: string, threshold?: number | null): Promise<BiasReportDoc> {
    const query = threshold == null ? "" : `?threshold=${threshold}`;
    return this.getJson(`/datasets/${datasetId}/bias${query}`);
  }

  getSubgroups(datasetId: string, variable: string): Promise<SubgroupsDoc> {
    return this.getJson(`/datasets/${datasetId}/variables/${encodeURIComponent(variable)}/subgroups`);
  }

  // -- models -----------------------------------------------------------

  trainModel(datasetId: string, config: Record<string, unknown> = {}): Promise<TrainDoc> {
    return this.postJson(`/datasets/${datasetId}/models`, config);
  }

  getModel(modelId: string): Promise<TrainDoc> {
    return this.getJson(`/models/${modelId}`);
  }

  // -- plans and generation ----------------------------------------------

  createPlan(datasetId: string, plan: PlanDoc): Promise<PlanCreatedDoc> {
    return this.postJson(`/datasets/${datasetId}/plans`, plan);
  }

  getPlan(planId: string): Promise<StoredPlanDoc> {
    return this.getJson(`/plans/${planId}`);
  }

  generate(planId: string): Promise<GenerateDoc> {
    return this.postJson(`/plans/${planId}/generate`, {});
  }

  getBatch(batchId: string): Promise<BatchDoc> {
    return this.getJson(`/batches/${batchId}`);
  }

  // -- curation -----------------------------------------------------------

  annotate(
    batchId: string,
    body: { model_id?: string; confidence_threshold?: number; expected_version?: number },
  ): Promise<AnnotateDoc> {
    return this.postJson(`/batches/${batchId}/annotate`, body);
  }

  filterBatch(batchId: string, predicate: FilterPredicateDoc): Promise<FilterResultDoc> {
    return this.postJson(`/batches/${batchId}/filter`, predicate);
  }

  removeSamples(batchId: string, ids: string[], expectedVersion?: number): Promise<RemoveDoc> {
    return this.postJson(`/batches/${batchId}/remove`, {
      ids,
      ...(expectedVersion == null ? {} : { expected_version: expectedVersion }),
    });
  }

  whatIf(batchId: string, sampleId: string, edits: EditEntry[], modelId?: string): Promise<WhatIfDoc> {
    return this.postJson(`/batches/${batchId}/samples/${sampleId}/whatif`, {
      edits,
      ...(modelId == null ? {} : { model_id: modelId }),
    });
  }

  editSample(
    batchId: string,
    sampleId: string,
    edits: EditEntry[],
    expectedVersion?: number,
  ): Promise<EditDoc> {
    return this.postJson(`/batches/${batchId}/samples/${sampleId}/edit`, {
      edits,
      ...(expectedVersion == null ? {} : { expected_version: expectedVersion }),
    });
  }

  acceptSamples(batchId: string, ids: string[], expectedVersion?: number): Promise<AcceptDoc> {
    return this.postJson(`/batches/${batchId}/accept`, {
      ids,
      ...(expectedVersion == null ? {} : { expected_version: expectedVersion }),
    });
  }

  // -- exports and logs ----------------------------------------------------

  async exportCsv(datasetId: string, provenance = false): Promise<string> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/datasets/${datasetId}/export?provenance=${provenance}`,
    );
    if (!response.ok) throw await errorFrom(response);
    return response.text();
  }

  async getLog(sessionId: string): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/log`);
    if (!response.ok) throw await errorFrom(response);
    return response.text();
  }

  // -- plumbing -------------------------------------------------------------

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    return this.decode(response);
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.decode(response);
  }

  private async decode<T>(response: Response): Promise<T> {
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as T;
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let doc: Record<string, unknown> = {};
  try {
    doc = (await response.json()) as Record<string, unknown>;
  } catch {
    // non-JSON error body; keep the envelope empty
  }
  return new ApiError(
    response.status,
    typeof doc.code === "string" ? doc.code : `HTTP_${response.status}`,
    typeof doc.message === "string" ? doc.message : response.statusText,
    (doc.details as Record<string, unknown>) ?? {},
  );
}

function toBlob(value: string | Blob, type: string): Blob {
  return typeof value === "string" ? new Blob([value], { type }) : value;
}
