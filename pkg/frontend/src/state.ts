import type { MorphBody, SessionRecord } from "./api.js";

// Control granularity: the fader snaps to hundredths, weight knobs to the
// integer grid the renderer accepts.
export const ALPHA_GRANULARITY = 0.01;
export const WEIGHT_MIN = -2;
export const WEIGHT_MAX = 3;
export const WEIGHT_GRID: readonly number[] = [-2, -1, 0, 1, 2, 3];

export function snapAlpha(value: number): number {
  const clamped = Math.min(1, Math.max(0, value));
  return Math.round(clamped * 100) / 100;
}

export function snapWeight(value: number): number {
  return Math.round(Math.min(WEIGHT_MAX, Math.max(WEIGHT_MIN, value)));
}

export interface UiSessionState {
  sessionId: string;
  sourcePrompt: string;
  targetPrompt: string;
  sourceTokens: string[];
  targetTokens: string[];
  alpha: number;
  sourceWeights: number[];
  targetWeights: number[];
  /** Fetched morph audio, keyed by the exact JSON body the request was sent with. */
  audioCache: Map<string, ArrayBuffer>;
}

export function freshSession(record: SessionRecord): UiSessionState {
  return {
    sessionId: record.session_id,
    sourcePrompt: record.source_prompt,
    targetPrompt: record.target_prompt,
    sourceTokens: [...record.source_tokens],
    targetTokens: [...record.target_tokens],
    alpha: 0,
    sourceWeights: record.source_tokens.map(() => 1),
    targetWeights: record.target_tokens.map(() => 1),
    audioCache: new Map(),
  };
}

function isUnit(weights: readonly number[]): boolean {
  return weights.every((w) => w === 1);
}

/**
 * Serialize the current morph configuration. Unit weight vectors are the
 * server default and are omitted, so "set a knob to +2 and back to +1 while
 * everything else sits at 1" produces the same body — and therefore the same
 * cache key — as never having touched the knob.
 */
export function morphPayload(state: UiSessionState): string {
  const body: MorphBody = { alpha: state.alpha };
  if (!isUnit(state.sourceWeights)) body.source_weights = [...state.sourceWeights];
  if (!isUnit(state.targetWeights)) body.target_weights = [...state.targetWeights];
  return JSON.stringify(body);
}
