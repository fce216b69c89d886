/**
 * Shapes of the documents the analysis service speaks.
 * These mirror the HTTP contract verbatim; the client never derives
 * numbers of its own from them.
 */

export interface DamageReport {
  leaf_foreground_px: number;
  internal_damage_px: number;
  border_damage_px: number;
  total_leaf_px: number;
  damage_ratio: number;
  total_cm2: number | null;
  damage_cm2: number | null;
}

export interface Diagnostics {
  threshold: number;
  auto_threshold: number | null;
  overridden: boolean;
  omega0: number;
  omega1: number;
  mu0: number;
  mu1: number;
  global_mean: number;
  variance_curve: (number | null)[];
}

export interface AnalysisConfig {
  channel: "L" | "a" | "b";
  polarity: "below" | "above" | null;
  threshold: number | null;
  min_size: number | null;
  min_hole_size: number;
  pixels_per_cm: number | null;
}

export type CurveStatus = "accepted" | "noop" | "rejected";

export interface CurveOutcome {
  control_points: [number, number][];
  status: CurveStatus;
  reason: string | null;
  border_damage_px: number | null;
}

export interface ResultDocument {
  format: string;
  version: number;
  session: string;
  revision: number;
  config: AnalysisConfig;
  needs_threshold: boolean;
  report: DamageReport | null;
  diagnostics: Diagnostics | null;
  curves: CurveOutcome[];
}

export interface CurveResponse extends ResultDocument {
  submitted_curve: CurveOutcome;
}

export interface ConfigPatch {
  channel?: "L" | "a" | "b";
  polarity?: "below" | "above" | null;
  threshold?: number | null;
  min_size?: number | null;
  min_hole_size?: number;
  pixels_per_cm?: number | null;
}

export type Layer = "original" | "mask" | "annotated";

export interface Point {
  x: number;
  y: number;
}
