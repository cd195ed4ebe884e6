// Payload shapes of the /api/v1 endpoints. The server is the single source
// of truth for all geometry; the client only maps coordinates and draws.

export interface StudyInfo {
  id: string;
  n_z: number;
  n_phase: number;
  ed_phase: number;
  es_phase: number;
  width: number;
  height: number;
  spacing_mm: { x: number; y: number; z: number };
  has_labels: boolean;
}

export interface MatchInfo {
  x: number;
  y: number;
  scale: number;
  zeta: number;
  center_x: number;
  center_y: number;
  low_confidence: boolean;
}

export interface DiscParamsInfo {
  a: number;
  b: number;
  theta: number;
  xc: number;
  yc: number;
}

export interface MetricSetInfo {
  jaccard: number;
  dice: number;
  sensitivity: number;
  specificity: number;
  accuracy: number;
  precision: number;
  degenerate: string[];
}

export interface SliceResultInfo {
  z: number;
  phase: number;
  phase_kind: "ed" | "es";
  mode: "auto" | "seeded";
  status: "ok" | "localization_failed" | "fit_failed";
  match: MatchInfo | null;
  params: DiscParamsInfo | null;
  energy: number | null;
  iterations: number;
  mask_area_px: number;
  zeroed_by_area_policy: boolean;
  metrics: MetricSetInfo | null;
  seq: number;
  accepted: boolean;
  weak: boolean;
  contour: [number, number][] | null;
}

export interface SliceMeta {
  study: string;
  z: number;
  phase: number;
  phase_kind: "ed" | "es";
  width: number;
  height: number;
  spacing_mm: { x: number; y: number };
  result: SliceResultInfo | null;
}

export interface ReportDoc {
  schema_version: number;
  study_id: string;
  edv_mm3: number;
  esv_mm3: number;
  ef_percent: number | null;
  ef_flags: { undefined: boolean; nonphysiologic: boolean };
  ef_percent_ok_slices_only: number | null;
  truth_ef_percent: number | null;
  ef_error_percent: number | null;
  slices: Omit<SliceResultInfo, "seq" | "accepted" | "weak" | "contour">[];
  aggregate_metrics: {
    pooled: MetricSetInfo;
    mean: MetricSetInfo;
    n_slices: number;
  } | null;
}

export interface MissingSlices {
  message: string;
  missing: [number, "ed" | "es"][];
}
