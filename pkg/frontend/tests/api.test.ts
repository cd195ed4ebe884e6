import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, missingFromError } from "../src/api.js";
import { buildReportView, panelFromError } from "../src/report.js";
import type { ReportDoc } from "../src/types.js";

function stubFetch(status: number, body: unknown) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("ApiClient", () => {
  it("posts seeds as JSON to the versioned route", async () => {
    const { impl, calls } = stubFetch(200, { status: "ok", seq: 1 });
    const api = new ApiClient("http://h:1", impl);
    await api.seed("s", 2, 1, 47.5, 46.0);
    expect(calls[0].url).toBe("http://h:1/api/v1/studies/s/slices/2/1/seed");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({ x: 47.5, y: 46.0 });
  });

  it("raises ApiError with the server detail", async () => {
    const { impl } = stubFetch(400, { detail: "seed (500, 10) outside image 0..95 x 0..95" });
    const api = new ApiClient("", impl);
    await expect(api.seed("s", 0, 0, 500, 10)).rejects.toThrowError(/outside image/);
  });

  it("exposes 409 missing-slices payloads", async () => {
    const detail = { message: "slices missing accepted results", missing: [[0, "ed"], [1, "es"]] };
    const { impl } = stubFetch(409, { detail });
    const api = new ApiClient("", impl);
    const err = await api.report("s").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(missingFromError(err)?.missing).toHaveLength(2);
  });
});

describe("report panel views", () => {
  const doc: ReportDoc = {
    schema_version: 1,
    study_id: "s",
    edv_mm3: 20000,
    esv_mm3: 10000,
    ef_percent: 50.0,
    ef_flags: { undefined: false, nonphysiologic: false },
    ef_percent_ok_slices_only: 50.0,
    truth_ef_percent: null,
    ef_error_percent: null,
    slices: [
      {
        z: 0, phase: 0, phase_kind: "ed", mode: "auto", status: "ok",
        match: null, params: null, energy: -2, iterations: 5,
        mask_area_px: 100, zeroed_by_area_policy: false,
        metrics: {
          jaccard: 0.9, dice: 0.95, sensitivity: 0.94, specificity: 1,
          accuracy: 0.99, precision: 0.96, degenerate: [],
        },
      },
      {
        z: 0, phase: 1, phase_kind: "es", mode: "auto", status: "localization_failed",
        match: null, params: null, energy: null, iterations: 0,
        mask_area_px: 0, zeroed_by_area_policy: false, metrics: null,
      },
    ],
    aggregate_metrics: null,
  };

  it("builds the EF panel with a status grid", () => {
    const view = buildReportView(doc);
    expect(view.efPercent).toBe(50.0);
    expect(view.rows).toHaveLength(2);
    expect(view.rows[1].status).toBe("localization_failed");
    expect(view.rows[0].dice).toBeCloseTo(0.95);
  });

  it("surfaces nonphysiologic flags", () => {
    const flagged = buildReportView({
      ...doc,
      ef_flags: { undefined: false, nonphysiologic: true },
    });
    expect(flagged.flags.some((f) => f.includes("ESV > EDV"))).toBe(true);
  });

  it("maps 409 errors to the missing view", () => {
    const err = new ApiError(409, { message: "m", missing: [[2, "es"]] });
    const view = panelFromError(err);
    expect(view.kind).toBe("missing");
    if (view.kind === "missing") {
      expect(view.missing).toEqual([[2, "es"]]);
    }
  });

  it("maps other failures to the error view", () => {
    const view = panelFromError(new Error("connection refused"));
    expect(view.kind).toBe("error");
  });
});
