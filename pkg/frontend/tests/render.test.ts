// Silhouette geometry: warm and cold must be visibly distinct and match
// the stored server-generated snapshots.

import { describe, expect, it } from "vitest";
import { silhouette, silhouetteDistance, expressionColor } from "../src/render.js";
import type { ChainDesc } from "../src/protocol.js";
import fkFixture from "./fixtures/fk_cases.json";
import silhouetteFixture from "./fixtures/silhouettes.json";

const chain = fkFixture.chain as ChainDesc;
type Stored = { angles_deg: number[]; side: number[][]; front: number[][] };
const stored = silhouetteFixture.postures as Record<string, Stored>;

function storedSilhouette(name: string) {
  return {
    side: stored[name].side as [number, number][],
    front: stored[name].front as [number, number][],
  };
}

describe("silhouette", () => {
  it("draws the zero posture as a straight horizontal line", () => {
    const s = silhouette(chain, [0, 0, 0, 0, 0]);
    for (const [, z] of s.side) expect(z).toBeCloseTo(0, 12);
    for (const [y] of s.front) expect(y).toBeCloseTo(0, 12);
  });

  it("reproduces the stored warm and cold snapshots", () => {
    for (const name of ["warm", "cold", "neutral"]) {
      const computed = silhouette(chain, stored[name].angles_deg);
      expect(silhouetteDistance(computed, storedSilhouette(name))).toBeLessThan(1e-9);
    }
  });

  it("keeps warm and cold visibly distinct", () => {
    const warm = storedSilhouette("warm");
    const cold = storedSilhouette("cold");
    // several centimeters apart on a 30 cm robot: unmistakable on screen
    expect(silhouetteDistance(warm, cold)).toBeGreaterThan(0.05);
    expect(silhouetteDistance(warm, storedSilhouette("neutral"))).toBeGreaterThan(0.02);
  });

  it("colors expressions distinctly", () => {
    const colors = new Set(["warm", "cold", "neutral"].map(expressionColor));
    expect(colors.size).toBe(3);
  });
});
