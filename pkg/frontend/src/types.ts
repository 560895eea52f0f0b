/** JSON payloads exchanged with the glucoplan service. */

export type SegmentKind = "context" | "focus";

export interface Segment {
  day: string; // ISO date
  x_start: number;
  x_end: number;
  kind: SegmentKind;
}

export interface DayIcon {
  kind: "meal" | "exercise" | "insulin_dose" | "health_flag";
  value: number | null;
  at: string;
  repeat_of: string | null;
  last_consumed: string | null;
}

export interface DayBars {
  date: string;
  pct_low: number;
  pct_in: number;
  pct_high: number;
  has_data: boolean;
  icons: DayIcon[];
}

export interface GlucosePoint {
  x: number | null;
  t: string;
  glucose: number;
}

export interface DoseMarker {
  x: number | null;
  t: string;
  units: number;
}

export interface OverlayItem {
  x: number | null;
  t: string;
  carbs: number;
  meal_profile_id: string | null;
  image_ref: string | null;
}

export interface Prediction {
  start_time: string;
  step: number;
  points: number[];
  lower: number[];
  upper: number[];
  horizon: number;
  x?: (number | null)[];
}

export interface FocusDetail {
  date: string;
  glucose: GlucosePoint[];
  dose_markers: DoseMarker[];
  overlay: OverlayItem[];
  prediction: Prediction | null;
}

export interface GeometryDoc {
  focal_day: string;
  segments: Segment[];
  days: DayBars[];
  focus: FocusDetail;
  now: string | null;
  now_x: number | null;
}

export interface BolusBreakdown {
  meal_component: number;
  correction_component: number;
  iob_deduction: number;
  total: number;
}

export type ExploreMode = "carb_sweep" | "dose_sweep";

export interface ExploreRequest {
  mode?: ExploreMode;
  carbs: number;
  dose_override?: number | null;
  at?: string;
  meal_category?: string | null;
}

export interface ExploreResponse {
  prediction: Prediction;
  recommended: BolusBreakdown;
  request: {
    mode: ExploreMode;
    carbs: number;
    at: string;
    dose_override: number | null;
    meal_category: string | null;
  };
}

export interface Settings {
  ICR: number;
  ISF: number;
  G_target: number;
  DIA: number;
  hypo_threshold: number;
  hyper_threshold: number;
  alert_low: number;
  alert_high: number;
}

export interface MealProfile {
  id: string;
  name: string;
  carbs: number;
  protein: number;
  fat: number;
  image_ref: string;
  category: string;
  created_at: string;
}

export interface AdviceItem {
  severity: "info" | "warning";
  code: string;
  message: string;
  linked_time: string | null;
}

export interface Reading {
  timestamp: string;
  value: number;
}

export interface PeriodStats {
  period: string;
  start: string;
  end: string;
  total_insulin: number;
  pct_time_in_range: number;
  hypo_count: number;
  exercise_minutes: number;
}
