// Report panel data: either the assembled EF numbers with a per-slice
// status grid, or the list of slices still missing accepted results.

import { missingFromError } from "./api.js";
import type { ReportDoc } from "./types.js";

export interface ReportRow {
  z: number;
  kind: "ed" | "es";
  status: string;
  dice: number | null;
}

export interface ReportView {
  kind: "report";
  efPercent: number | null;
  efOkOnly: number | null;
  edv: number;
  esv: number;
  flags: string[];
  truthEf: number | null;
  efError: number | null;
  pooledDice: number | null;
  rows: ReportRow[];
}

export interface MissingView {
  kind: "missing";
  missing: [number, "ed" | "es"][];
}

export interface ErrorView {
  kind: "error";
  message: string;
}

export type PanelView = ReportView | MissingView | ErrorView;

export function buildReportView(doc: ReportDoc): ReportView {
  const flags: string[] = [];
  if (doc.ef_flags.undefined) flags.push("EF undefined (zero EDV)");
  if (doc.ef_flags.nonphysiologic) flags.push("ESV > EDV: check segmentation");
  return {
    kind: "report",
    efPercent: doc.ef_percent,
    efOkOnly: doc.ef_percent_ok_slices_only,
    edv: doc.edv_mm3,
    esv: doc.esv_mm3,
    flags,
    truthEf: doc.truth_ef_percent,
    efError: doc.ef_error_percent,
    pooledDice: doc.aggregate_metrics?.pooled.dice ?? null,
    rows: doc.slices.map((s) => ({
      z: s.z,
      kind: s.phase_kind,
      status: s.status,
      dice: s.metrics?.dice ?? null,
    })),
  };
}

export function panelFromError(err: unknown): MissingView | ErrorView {
  const missing = missingFromError(err);
  if (missing) {
    return { kind: "missing", missing: missing.missing };
  }
  return { kind: "error", message: err instanceof Error ? err.message : String(err) };
}

export function formatMm3(v: number): string {
  return v >= 10000 ? `${(v / 1000).toFixed(1)} ml` : `${v.toFixed(0)} mm³`;
}
