/** JSON documents exchanged with the workbench HTTP service.
 *
 * These mirror the server's response shapes field for field. The UI never
 * derives new measures from them; it only formats what the server sent.
 */

export type Value = number | string;

export interface VariableSchemaDoc {
  name: string;
  kind: "numeric-continuous" | "numeric-integer" | "categorical";
  role: "predictor" | "target";
  categories?: string[];
  binning?: {
    strategy: string;
    bin_count?: number;
    edges?: number[];
  };
}

export interface UploadDoc {
  dataset_id: string;
  session_id: string;
  row_count: number;
  version: number;
}

export interface DatasetDoc {
  dataset_id: string;
  session_id: string;
  version: number;
  row_count: number;
  original_row_count: number;
  accepted_count: number;
  schema: VariableSchemaDoc[];
  target_variable: string;
}

export interface SubgroupStatsDoc {
  variable: string;
  label: string;
  count: number;
  representation_rate: number;
  coverage_met: boolean;
  coverage_deficit: number;
  subgroup_accuracy: number | null;
}

export interface BiasReportDoc {
  dataset_id: string;
  coverage_threshold: number;
  target_variable: string;
  per_variable: Record<string, SubgroupStatsDoc[]>;
  min_rate_per_variable: Record<string, number>;
  uncovered_subgroup_count: number;
  most_impacted: { variable: string; label: string }[];
}

export interface SubgroupsDoc {
  dataset_id: string;
  variable: string;
  subgroups: {
    label: string;
    count: number;
    representation_rate: number;
    accuracy: number | null;
  }[];
}

export interface TrainDoc {
  model_id: string;
  scope: string;
  folds: number;
  class_labels: string[];
  final_loss: number | null;
  overall_accuracy: number;
  subgroup_accuracies: Record<string, { label: string; accuracy: number | null }[]>;
}

export type ConstraintDoc =
  | { variable: string; interval: [number, number] }
  | { variable: string; allowed: string[] };

export interface PlanDoc {
  target_class: string;
  requested_count: number;
  constraints: ConstraintDoc[];
  neighbor_k?: number;
  seed?: number;
  max_attempt_factor?: number;
}

export interface PlanCreatedDoc {
  plan_id: string;
  eligible_pool_size: number;
}

export interface StoredPlanDoc {
  plan_id: string;
  plan: Required<PlanDoc>;
}

export interface GenerateDoc {
  batch_id: string;
  produced_count: number;
  attempts_used: number;
  version: number;
}

export interface PredictionDoc {
  label: string;
  probabilities: number[];
  confidence: number;
}

export interface SampleDoc {
  id: string;
  values: Record<string, Value>;
  provenance: { base_row_id: string; neighbor_row_id: string; u: number };
  status: "pending" | "kept" | "removed" | "modified";
  prediction: PredictionDoc | null;
  problematic: boolean;
  edit_history: { variable: string; old: Value; new: Value }[];
}

export interface BatchDoc {
  id: string;
  dataset_id: string;
  plan: Required<PlanDoc>;
  samples: SampleDoc[];
  produced_count: number;
  attempts_used: number;
  version: number;
}

export interface AnnotateDoc {
  batch_id: string;
  model_id: string;
  confidence_threshold: number;
  flagged_count: number;
  version: number;
}

export interface FilterResultDoc {
  batch_id: string;
  matching: string[];
  non_matching: string[];
}

export interface FilterPredicateDoc {
  constraints?: ConstraintDoc[];
  confidence?: { comparator: string; threshold: number };
  predicted_class?: string;
}

export interface RemoveDoc {
  batch_id: string;
  removed_count: number;
  version: number;
}

export interface EditDoc {
  batch_id: string;
  sample_id: string;
  status: string;
  edit_count: number;
  version: number;
}

export interface WhatIfDoc {
  batch_id: string;
  sample_id: string;
  model_id: string;
  candidate_values: Record<string, Value>;
  old_prediction: PredictionDoc;
  new_prediction: PredictionDoc;
}

export interface AcceptDoc {
  batch_id: string;
  accepted_count: number;
  dataset_version: number;
  version: number;
  row_count: number;
}

export interface EditEntry {
  variable: string;
  value: Value;
}
