// View model for the attribution panel: signed bars proportional to scores,
// ordered exactly as the feature sets arrived. Display-only; scores are
// never recomputed client-side.

import type { AttributionView, FeatureEntry } from "./types.js";

export interface Bar {
  name: string;
  score: number;
  /** 0..1, |score| relative to the largest |score| in the same panel */
  width: number;
  positive: boolean;
  /** the method(s) that nominated this feature: SHAP, LIME or both */
  sources: string[];
}

export function bars(entries: FeatureEntry[]): Bar[] {
  const scale = Math.max(...entries.map((e) => Math.abs(e.score)), 0);
  return entries.map((e) => ({
    name: e.name,
    score: e.score,
    width: scale > 0 ? Math.abs(e.score) / scale : 0,
    positive: e.score >= 0,
    sources: e.sources,
  }));
}

export interface AttributionPanels {
  shap: Bar[];
  lime: Bar[];
  fused: Bar[];
  method: string;
  surrogateR2: number;
}

export function attributionPanels(view: AttributionView): AttributionPanels {
  return {
    shap: bars(view.f_shap),
    lime: bars(view.f_lime),
    fused: bars(view.f_final),
    method: view.shap.method,
    surrogateR2: view.lime.surrogate_r2,
  };
}

export function sourceBadge(sources: string[]): string {
  if (sources.includes("SHAP") && sources.includes("LIME")) return "both";
  return sources[0]?.toLowerCase() ?? "?";
}
