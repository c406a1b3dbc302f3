import { describe, expect, it } from "vitest";

import type { SessionRecord } from "../src/api.js";
import {
  WEIGHT_GRID,
  freshSession,
  morphPayload,
  snapAlpha,
  snapWeight,
} from "../src/state.js";

const RECORD: SessionRecord = {
  session_id: "s0",
  source_prompt: "a dog barking",
  target_prompt: "a cat meowing",
  seed: 0,
  steps: 20,
  state: "ready",
  source_tokens: ["a", "dog", "barking"],
  target_tokens: ["a", "cat", "meowing"],
  error: null,
};

describe("snapAlpha", () => {
  it("rounds to 0.01 granularity", () => {
    expect(snapAlpha(0.123)).toBe(0.12);
    expect(snapAlpha(0.567)).toBe(0.57);
    expect(snapAlpha(0.5)).toBe(0.5);
  });

  it("clamps to [0, 1]", () => {
    expect(snapAlpha(-0.2)).toBe(0);
    expect(snapAlpha(1.7)).toBe(1);
  });

  it("lands on the hundredth grid for arbitrary inputs", () => {
    for (let i = 0; i < 500; i++) {
      const snapped = snapAlpha(Math.sin(i) * 1.5 + 0.5);
      expect(snapped).toBeGreaterThanOrEqual(0);
      expect(snapped).toBeLessThanOrEqual(1);
      expect(Math.round(snapped * 100) / 100).toBe(snapped);
    }
  });
});

describe("snapWeight", () => {
  it("clamps into [-2, 3] and rounds to integers", () => {
    expect(snapWeight(-5)).toBe(-2);
    expect(snapWeight(9)).toBe(3);
    expect(snapWeight(1.4)).toBe(1);
    expect(snapWeight(2.6)).toBe(3);
  });

  it("keeps grid values fixed", () => {
    for (const w of WEIGHT_GRID) expect(snapWeight(w)).toBe(w);
  });

  it("always lands on the grid", () => {
    for (let i = 0; i < 200; i++) {
      expect(WEIGHT_GRID).toContain(snapWeight(Math.cos(i) * 8));
    }
  });
});

describe("freshSession", () => {
  it("starts at alpha 0 with unit weights and an empty cache", () => {
    const state = freshSession(RECORD);
    expect(state.alpha).toBe(0);
    expect(state.sourceWeights).toEqual([1, 1, 1]);
    expect(state.targetWeights).toEqual([1, 1, 1]);
    expect(state.audioCache.size).toBe(0);
  });
});

describe("morphPayload", () => {
  it("serializes a bare alpha when all weights are unit", () => {
    const state = freshSession(RECORD);
    state.alpha = 0.5;
    expect(morphPayload(state)).toBe('{"alpha":0.5}');
  });

  it("includes a weight vector once any entry leaves 1", () => {
    const state = freshSession(RECORD);
    state.alpha = 0.25;
    state.sourceWeights[2] = 2;
    expect(morphPayload(state)).toBe('{"alpha":0.25,"source_weights":[1,1,2]}');
  });

  it("returns to the unweighted body when the whole vector is unit again", () => {
    const state = freshSession(RECORD);
    state.alpha = 0.25;
    const plain = morphPayload(state);
    state.sourceWeights[2] = 2;
    const weighted = morphPayload(state);
    state.sourceWeights[2] = 1;
    expect(morphPayload(state)).toBe(plain);
    expect(weighted).not.toBe(plain);
  });

  it("orders fields alpha, source_weights, target_weights", () => {
    const state = freshSession(RECORD);
    state.sourceWeights[0] = 0;
    state.targetWeights[1] = 3;
    expect(morphPayload(state)).toBe(
      '{"alpha":0,"source_weights":[0,1,1],"target_weights":[1,3,1]}',
    );
  });
});
