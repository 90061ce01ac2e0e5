import { describe, expect, it } from "vitest";

import { attributionPanels, bars, sourceBadge } from "../src/attribution.js";
import { makeAttribution } from "./fakes.js";

describe("attribution view model", () => {
  it("orders bars exactly as the feature sets arrived", () => {
    const view = makeAttribution();
    const panels = attributionPanels(view);
    expect(panels.shap.map((b) => b.name)).toEqual(["Header_Length", "Rate"]);
    expect(panels.fused.map((b) => b.name)).toEqual(["Header_Length", "Rate"]);
    expect(panels.method).toBe("exact");
  });

  it("bar widths are proportional to |score| with the max at full width", () => {
    const out = bars([
      { name: "a", score: 0.4, sources: ["SHAP"] },
      { name: "b", score: -0.2, sources: ["SHAP"] },
      { name: "c", score: 0.1, sources: ["SHAP"] },
    ]);
    expect(out.map((b) => b.width)).toEqual([1, 0.5, 0.25]);
    expect(out.map((b) => b.positive)).toEqual([true, false, true]);
  });

  it("all-zero scores yield zero-width bars, not NaN", () => {
    const out = bars([{ name: "a", score: 0, sources: ["LIME"] }]);
    expect(out[0]!.width).toBe(0);
  });

  it("method badges distinguish shap, lime, and both", () => {
    expect(sourceBadge(["SHAP"])).toBe("shap");
    expect(sourceBadge(["LIME"])).toBe("lime");
    expect(sourceBadge(["SHAP", "LIME"])).toBe("both");
  });
});
