// Interaction flows, kept DOM-free so they run under any test environment.
// The DOM layer translates events into calls here and re-renders from the
// returned state.

import { ApiClient } from "./api.js";
import { canvasToImage, insideImage } from "./transform.js";
import type { SliceResultInfo } from "./types.js";
import { ViewState } from "./viewstate.js";

export type SeedOutcome =
  | { kind: "result"; result: SliceResultInfo; imageX: number; imageY: number }
  | { kind: "invalid"; message: string }
  | { kind: "busy" }
  | { kind: "error"; message: string };

/** A click on the canvas: map to image coordinates, post the seed, store
 * the newest result. State is untouched on validation errors. */
export async function seedAtCanvasPoint(
  state: ViewState,
  api: ApiClient,
  canvasX: number,
  canvasY: number,
): Promise<SeedOutcome> {
  if (!state.study) return { kind: "invalid", message: "no study loaded" };
  const [ix, iy] = canvasToImage(state.transform, canvasX, canvasY);
  if (!insideImage(ix, iy, state.study.width, state.study.height)) {
    return {
      kind: "invalid",
      message: `click (${ix.toFixed(1)}, ${iy.toFixed(1)}) is outside the image`,
    };
  }
  const { z, phase } = state;
  if (!state.beginRequest(z, phase)) return { kind: "busy" };
  try {
    const result = await api.seed(state.study.id, z, phase, ix, iy);
    state.applyResult(result);
    return { kind: "result", result, imageX: ix, imageY: iy };
  } catch (err) {
    return { kind: "error", message: err instanceof Error ? err.message : String(err) };
  } finally {
    state.endRequest(z, phase);
  }
}

export async function autoSegment(state: ViewState, api: ApiClient): Promise<SeedOutcome> {
  if (!state.study) return { kind: "invalid", message: "no study loaded" };
  const { z, phase } = state;
  if (!state.beginRequest(z, phase)) return { kind: "busy" };
  try {
    const result = await api.auto(state.study.id, z, phase);
    state.applyResult(result);
    return { kind: "result", result, imageX: NaN, imageY: NaN };
  } catch (err) {
    return { kind: "error", message: err instanceof Error ? err.message : String(err) };
  } finally {
    state.endRequest(z, phase);
  }
}

export async function acceptCurrent(
  state: ViewState,
  api: ApiClient,
  accepted = true,
): Promise<SeedOutcome> {
  if (!state.study) return { kind: "invalid", message: "no study loaded" };
  const { z, phase } = state;
  try {
    const result = await api.accept(state.study.id, z, phase, accepted);
    state.applyResult(result);
    return { kind: "result", result, imageX: NaN, imageY: NaN };
  } catch (err) {
    return { kind: "error", message: err instanceof Error ? err.message : String(err) };
  }
}
