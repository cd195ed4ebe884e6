// Thin typed client for the annotation service. Fetch is injectable so
// tests can run against a live server or a stub without DOM globals.

import type { MissingSlices, ReportDoc, SliceMeta, SliceResultInfo, StudyInfo } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.base}/api/v1${path}`, init);
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      throw new ApiError(res.status, body?.detail ?? body ?? res.statusText);
    }
    return body as T;
  }

  studies(): Promise<StudyInfo[]> {
    return this.request("/studies");
  }

  sliceMeta(study: string, z: number, phase: number): Promise<SliceMeta> {
    return this.request(`/studies/${study}/slices/${z}/${phase}`);
  }

  imageUrl(study: string, z: number, phase: number): string {
    return `${this.base}/api/v1/studies/${study}/slices/${z}/${phase}/image.png`;
  }

  seed(study: string, z: number, phase: number, x: number, y: number): Promise<SliceResultInfo> {
    return this.request(`/studies/${study}/slices/${z}/${phase}/seed`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ x, y }),
    });
  }

  auto(study: string, z: number, phase: number): Promise<SliceResultInfo> {
    return this.request(`/studies/${study}/slices/${z}/${phase}/auto`, { method: "POST" });
  }

  accept(study: string, z: number, phase: number, accepted: boolean): Promise<SliceResultInfo> {
    return this.request(`/studies/${study}/slices/${z}/${phase}/accept`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ accepted }),
    });
  }

  report(study: string): Promise<ReportDoc> {
    return this.request(`/studies/${study}/report`);
  }

  saveSession(): Promise<{ saved_to: string; entries: number }> {
    return this.request("/session/save", { method: "POST" });
  }
}

export function missingFromError(err: unknown): MissingSlices | null {
  if (err instanceof ApiError && err.status === 409 && typeof err.detail === "object"
      && err.detail !== null && "missing" in (err.detail as object)) {
    return err.detail as MissingSlices;
  }
  return null;
}
