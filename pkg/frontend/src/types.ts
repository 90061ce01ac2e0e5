// Wire types for the detection service API (HTTP + WebSocket).

export type Severity = "info" | "warning" | "critical";
export type ExperienceLevel = "novice" | "intermediate" | "expert";
export type Descriptiveness = "concise" | "detailed";

export interface PredictionView {
  probabilities: number[];
  predicted_class: string;
  predicted_index: number;
}

export interface FeatureEntry {
  name: string;
  score: number;
  sources: string[];
}

export interface AttributionView {
  shap: {
    phi: number[];
    base_value: number;
    predicted_output: number;
    method: "exact" | "sampled";
    n_samples: number;
    seed: number;
    repair: number;
  };
  lime: {
    coefficients: number[];
    intercept: number;
    kernel_width: number;
    n_perturbations: number;
    seed: number;
    surrogate_r2: number;
    ridge_lambda: number;
  };
  f_shap: FeatureEntry[];
  f_lime: FeatureEntry[];
  f_final: FeatureEntry[];
  elapsed_ms: number;
}

export interface ExplanationView {
  text: string;
  provider: string;
  model_name: string;
  prompt_hash: string;
  latency_ms: number;
  created_at: number;
  attempts: number;
  error: string | null;
  prompt?: string;
  experience_level?: ExperienceLevel;
  descriptiveness?: Descriptiveness;
}

export interface EventView {
  seq: number;
  event_id: string;
  received_at: number;
  source_id: string;
  record: Record<string, string | number>;
  vector: number[];
  schema_version: number;
  model_id: string;
  prediction: PredictionView;
  severity: Severity;
  pipeline_latency_ms: number;
  attribution?: AttributionView;
  explanation?: ExplanationView;
}

export type LiveMessageType =
  | "detection"
  | "attribution_update"
  | "explanation_update"
  | "alert"
  | "stats";

export interface LiveMessage {
  type: LiveMessageType;
  payload: Record<string, unknown>;
  seq: number;
}

export interface EventsResponse {
  events: EventView[];
  last_seq: number;
}

export interface ExplainRequest {
  experience_level: ExperienceLevel;
  descriptiveness: Descriptiveness;
}

export interface ExplainResponse {
  event_id: string;
  prompt: string;
  prompt_hash: string;
  text: string;
  provider: string;
  model_name: string;
  latency_ms: number;
  attempts: number;
  created_at: number;
  error: string | null;
}

export interface StatsView {
  consumed: number;
  valid: number;
  invalid: number;
  predicted: number;
  attributed: number;
  attribution_skipped: number;
  failed: number;
  last_seq: number;
  connections: number;
  model_id: string | null;
  schema_version: number | null;
  provider_enabled: boolean;
}
