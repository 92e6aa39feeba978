/** Client view state. Every id in here names a live server resource; drafts
 * hold raw form text until validation turns them into request documents.
 */

import type { FilterPredicateDoc } from "./types.js";

export type ViewName = "upload" | "data" | "augment" | "generated";

export interface IntervalDraft {
  enabled: boolean;
  lo: string;
  hi: string;
}

export interface SetDraft {
  enabled: boolean;
  allowed: Set<string>;
}

export interface PlanDraft {
  targetClass: string;
  requestedCount: string;
  seed: string;
  intervals: Map<string, IntervalDraft>;
  sets: Map<string, SetDraft>;
}

export interface FilterDraft {
  variable: string;
  lo: string;
  hi: string;
  allowed: Set<string>;
  confidenceComparator: string;
  confidenceThreshold: string;
  predictedClass: string;
}

export interface WhatIfDraft {
  sampleId: string | null;
  edits: Map<string, string>;
}

export interface ViewState {
  datasetId: string | null;
  sessionId: string | null;
  selectedVariable: string | null;
  coverageThreshold: number | null; // null means the server default
  highlightRate: number; // subgroups under this rate get highlighted
  modelId: string | null;
  planId: string | null;
  batchId: string | null;
  batchVersion: number | null;
  planDraft: PlanDraft;
  filterDraft: FilterDraft;
  activeFilter: { predicate: FilterPredicateDoc; matching: string[] } | null;
  whatIfDraft: WhatIfDraft;
}

export function emptyPlanDraft(): PlanDraft {
  return {
    targetClass: "",
    requestedCount: "",
    seed: "",
    intervals: new Map(),
    sets: new Map(),
  };
}

export function emptyFilterDraft(): FilterDraft {
  return {
    variable: "",
    lo: "",
    hi: "",
    allowed: new Set(),
    confidenceComparator: "<",
    confidenceThreshold: "",
    predictedClass: "",
  };
}

export function initialState(): ViewState {
  return {
    datasetId: null,
    sessionId: null,
    selectedVariable: null,
    coverageThreshold: null,
    highlightRate: 0.5,
    modelId: null,
    planId: null,
    batchId: null,
    batchVersion: null,
    planDraft: emptyPlanDraft(),
    filterDraft: emptyFilterDraft(),
    activeFilter: null,
    whatIfDraft: { sampleId: null, edits: new Map() },
  };
}
