// Client-side FK must agree with the server's kinematics (fixtures are
// generated from it; regenerate with scripts/generate_fixtures.py).

import { describe, expect, it } from "vitest";
import { fkPositions } from "../src/fk.js";
import type { ChainDesc } from "../src/protocol.js";
import fkFixture from "./fixtures/fk_cases.json";

const chain = fkFixture.chain as ChainDesc;

describe("fkPositions", () => {
  it("puts the zero posture on a straight line along +x", () => {
    const points = fkPositions(chain, [0, 0, 0, 0, 0]);
    expect(points).toHaveLength(6);
    const reach = chain.joints.reduce((acc, j) => acc + j.length_m, 0);
    expect(points[5][0]).toBeCloseTo(reach, 10);
    expect(points[5][1]).toBeCloseTo(0, 10);
    expect(points[5][2]).toBeCloseTo(0, 10);
  });

  it("matches the server-generated fixtures", () => {
    for (const testCase of fkFixture.cases) {
      const points = fkPositions(chain, testCase.angles_deg);
      expect(points).toHaveLength(testCase.positions.length);
      testCase.positions.forEach((expected: number[], i: number) => {
        expect(points[i][0]).toBeCloseTo(expected[0], 9);
        expect(points[i][1]).toBeCloseTo(expected[1], 9);
        expect(points[i][2]).toBeCloseTo(expected[2], 9);
      });
    }
  });

  it("preserves segment lengths for arbitrary angles", () => {
    const points = fkPositions(chain, [17, -48, 62, 5, -88]);
    chain.joints.forEach((joint, i) => {
      const d = Math.hypot(
        points[i + 1][0] - points[i][0],
        points[i + 1][1] - points[i][1],
        points[i + 1][2] - points[i][2],
      );
      expect(d).toBeCloseTo(joint.length_m, 12);
    });
  });
});
