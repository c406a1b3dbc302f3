/**
 * View-model for the fader console.
 *
 * All service traffic and client state live here; the DOM layer only mirrors
 * fields and forwards events. That split keeps every behaviour — polling,
 * caching, request cancellation, error banners — testable against a mocked
 * service with no browser involved.
 *
 * Morph renders are expensive server-side (a full denoising run each), so the
 * contract is deliberately stingy with requests:
 *   - controls fire on release, not on every drag step (the DOM layer's job);
 *   - each control keeps at most one request in flight and aborts the one it
 *     supersedes;
 *   - responses are cached by the exact JSON body sent, so revisiting a
 *     configuration costs zero network round trips.
 */

import { ServiceClient, ServiceError, type SessionRecord, type SweepBody } from "./api.js";
import { freshSession, morphPayload, snapAlpha, snapWeight, type UiSessionState } from "./state.js";

export type ConsoleStatus = "idle" | "creating" | "ready" | "failed";

export interface SweepCell {
  alpha: number;
  label: string;
  morphId: string;
}

export interface SweepOptions {
  alphaStep?: number;
  method?: string;
}

const POLL_INTERVAL_MS = 250;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) {
    return err.field === null ? err.message : `${err.field}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}

export class FaderConsole {
  session: UiSessionState | null = null;
  status: ConsoleStatus = "idle";
  /** Inline error banner text; null when nothing is wrong. */
  banner: string | null = null;
  /** Audio behind the play button; always a verbatim service response body. */
  clip: ArrayBuffer | null = null;
  /** Cache key of `clip`, for display. */
  clipKey: string | null = null;
  playEnabled = false;
  sweepCells: SweepCell[] = [];

  private readonly client: ServiceClient;
  private readonly pollIntervalMs: number;
  private readonly inflight = new Map<string, AbortController>();
  private readonly audioByMorph = new Map<string, ArrayBuffer>();
  private readonly previewAudio = new Map<"source" | "target", ArrayBuffer>();
  private readonly listeners: Array<() => void> = [];

  constructor(client: ServiceClient, pollIntervalMs: number = POLL_INTERVAL_MS) {
    this.client = client;
    this.pollIntervalMs = pollIntervalMs;
  }

  /** Register a render callback; fired after every state change. */
  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Create a capture session and poll until the backend settles it. */
  async createSession(
    sourceText: string,
    targetText: string,
    seed?: number,
    steps?: number,
  ): Promise<UiSessionState | null> {
    this.status = "creating";
    this.banner = null;
    this.session = null;
    this.clip = null;
    this.clipKey = null;
    this.playEnabled = false;
    this.sweepCells = [];
    this.previewAudio.clear();
    this.notify();
    try {
      const sessionId = await this.client.createSession(sourceText, targetText, seed, steps);
      const record = await this.pollUntilSettled(sessionId);
      if (record.state === "failed") {
        this.status = "failed";
        this.banner = record.error ?? "generation failed";
        this.notify();
        return null;
      }
      this.session = freshSession(record);
      this.status = "ready";
      this.notify();
      return this.session;
    } catch (err) {
      this.status = "failed";
      this.banner = describe(err);
      this.notify();
      return null;
    }
  }

  private async pollUntilSettled(sessionId: string): Promise<SessionRecord> {
    for (;;) {
      const record = await this.client.getSession(sessionId);
      if (record.state !== "pending") return record;
      await sleep(this.pollIntervalMs);
    }
  }

  /**
   * Fader released at `alpha`. Snaps to 0.01 granularity, then renders (or
   * replays) the morph for the current configuration.
   */
  async onFaderChange(alpha: number): Promise<void> {
    const session = this.mustSession();
    session.alpha = snapAlpha(alpha);
    await this.requestMorph("fader");
  }

  /** Weight knob released. Same request path as the fader, weights included. */
  async onWeightChange(side: "source" | "target", index: number, value: number): Promise<void> {
    const session = this.mustSession();
    const weights = side === "source" ? session.sourceWeights : session.targetWeights;
    if (index < 0 || index >= weights.length) {
      throw new RangeError(`no ${side} token at index ${index}`);
    }
    weights[index] = snapWeight(value);
    await this.requestMorph(`weight:${side}:${index}`);
  }

  private async requestMorph(control: string): Promise<void> {
    const session = this.mustSession();
    const payload = morphPayload(session);
    this.banner = null;
    const cached = session.audioCache.get(payload);
    if (cached !== undefined) {
      this.clip = cached;
      this.clipKey = payload;
      this.playEnabled = true;
      this.notify();
      return;
    }
    this.inflight.get(control)?.abort();
    const controller = new AbortController();
    this.inflight.set(control, controller);
    this.playEnabled = false;
    this.notify();
    try {
      const morphId = await this.client.requestMorph(session.sessionId, payload, controller.signal);
      const audio = await this.client.morphAudio(morphId, controller.signal);
      session.audioCache.set(payload, audio);
      this.audioByMorph.set(morphId, audio);
      this.clip = audio;
      this.clipKey = payload;
      this.playEnabled = true;
    } catch (err) {
      if (!isAbort(err)) this.banner = describe(err);
    } finally {
      if (this.inflight.get(control) === controller) this.inflight.delete(control);
      this.notify();
    }
  }

  /** Request a sweep and lay out one playable cell per returned morph. */
  async renderSweep(options: SweepOptions = {}): Promise<void> {
    const session = this.mustSession();
    const body: SweepBody = {};
    if (options.alphaStep !== undefined) body.alpha_step = options.alphaStep;
    if (options.method !== undefined) body.method = options.method;
    this.banner = null;
    this.inflight.get("sweep")?.abort();
    const controller = new AbortController();
    this.inflight.set("sweep", controller);
    try {
      const morphIds = await this.client.requestSweep(session.sessionId, body, controller.signal);
      const last = Math.max(morphIds.length - 1, 1);
      this.sweepCells = morphIds.map((morphId, i) => {
        const alpha = snapAlpha(i / last);
        return { alpha, label: alpha.toFixed(2), morphId };
      });
    } catch (err) {
      if (!isAbort(err)) this.banner = describe(err);
    } finally {
      if (this.inflight.get("sweep") === controller) this.inflight.delete("sweep");
      this.notify();
    }
  }

  /** Audio for one sweep cell, fetched at most once per morph id. */
  async cellAudio(morphId: string): Promise<ArrayBuffer> {
    const hit = this.audioByMorph.get(morphId);
    if (hit !== undefined) return hit;
    const audio = await this.client.morphAudio(morphId);
    this.audioByMorph.set(morphId, audio);
    return audio;
  }

  /** Source/target preview audio, fetched once and replayed from memory. */
  async previewClip(which: "source" | "target"): Promise<ArrayBuffer> {
    const session = this.mustSession();
    const hit = this.previewAudio.get(which);
    if (hit !== undefined) return hit;
    const audio = await this.client.sessionAudio(session.sessionId, which);
    this.previewAudio.set(which, audio);
    return audio;
  }

  private mustSession(): UiSessionState {
    if (this.session === null) throw new Error("no ready session");
    return this.session;
  }
}
