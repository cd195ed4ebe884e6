// Client-side session state: which slice is on screen, the view transform,
// the newest server result per slice, and which seeds are still in flight.
// The server owns the geometry; this store only guards ordering (stale
// responses are dropped by sequence number) and navigation bounds.

import type { ViewTransform } from "./transform.js";
import type { SliceResultInfo, StudyInfo } from "./types.js";

export function sliceKey(z: number, phase: number): string {
  return `${z},${phase}`;
}

export interface WindowLevel {
  center: number; // of the displayed [0, 1] range
  width: number;
}

export class ViewState {
  study: StudyInfo | null = null;
  z = 0;
  phase = 0;
  transform: ViewTransform = { zoom: 4, panX: 0, panY: 0 };
  overlayVisible = true;
  windowLevel: WindowLevel = { center: 0.5, width: 1.0 };

  private results = new Map<string, SliceResultInfo>();
  private inflight = new Set<string>();

  setStudy(study: StudyInfo): void {
    this.study = study;
    this.z = 0;
    this.phase = study.ed_phase;
    this.results.clear();
    this.inflight.clear();
  }

  /** Clamped navigation; returns true when the visible slice changed. */
  navigate(dz: number, dphase: number): boolean {
    if (!this.study) return false;
    const z = Math.min(this.study.n_z - 1, Math.max(0, this.z + dz));
    const phase = Math.min(this.study.n_phase - 1, Math.max(0, this.phase + dphase));
    const changed = z !== this.z || phase !== this.phase;
    this.z = z;
    this.phase = phase;
    return changed;
  }

  atZEdge(dz: number): boolean {
    if (!this.study) return true;
    const z = this.z + dz;
    return z < 0 || z > this.study.n_z - 1;
  }

  currentKey(): string {
    return sliceKey(this.z, this.phase);
  }

  /** Latest accepted result for the visible slice, if any. */
  currentResult(): SliceResultInfo | null {
    return this.results.get(this.currentKey()) ?? null;
  }

  resultFor(z: number, phase: number): SliceResultInfo | null {
    return this.results.get(sliceKey(z, phase)) ?? null;
  }

  /** Single in-flight seed per slice: returns false when one is pending. */
  beginRequest(z: number, phase: number): boolean {
    const key = sliceKey(z, phase);
    if (this.inflight.has(key)) return false;
    this.inflight.add(key);
    return true;
  }

  endRequest(z: number, phase: number): void {
    this.inflight.delete(sliceKey(z, phase));
  }

  isPending(z: number, phase: number): boolean {
    return this.inflight.has(sliceKey(z, phase));
  }

  /** Store a server result unless a newer one is already present. */
  applyResult(res: SliceResultInfo): boolean {
    const key = sliceKey(res.z, res.phase);
    const cur = this.results.get(key);
    if (cur && cur.seq > res.seq) return false; // stale response, discard
    this.results.set(key, res);
    return true;
  }

  acceptStatus(z: number, phase: number): "none" | "accepted" | "pending" {
    const res = this.results.get(sliceKey(z, phase));
    if (!res) return "none";
    return res.accepted ? "accepted" : "pending";
  }
}
