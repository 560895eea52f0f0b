/** Diary view-model: snap scrolling, overlay toggle and chart scaling.
 *
 * The geometry document from the service already carries x coordinates in
 * [0, 1]; this module handles the interaction state around it.
 */
import type { GeometryDoc } from "./types";

/** Nearest whole-day offset for scroll snapping; ties round toward zero
 * (mirrors the service rule, avoids overshoot oscillation). */
export function snapDayOffset(fractionalDays: number): number {
  const magnitude = Math.abs(fractionalDays);
  let whole = Math.floor(magnitude);
  if (magnitude - whole > 0.5) whole += 1;
  if (whole === 0) return 0; // avoid negative zero
  return fractionalDays >= 0 ? whole : -whole;
}

export function shiftFocalDay(focalDay: string, dayOffset: number): string {
  const date = new Date(`${focalDay}T00:00:00Z`);
  date.setUTCDate(date.getUTCDate() + dayOffset);
  return date.toISOString().slice(0, 10);
}

export interface DiaryState {
  doc: GeometryDoc | null;
  overlayVisible: boolean;
  scrollOffsetDays: number;
}

export function initialDiary(): DiaryState {
  return { doc: null, overlayVisible: false, scrollOffsetDays: 0 };
}

/** Touch anywhere on the diary toggles the carb/meal-image overlay. */
export function toggleOverlay(state: DiaryState): DiaryState {
  return { ...state, overlayVisible: !state.overlayVisible };
}

/** End of a scroll gesture: pick the day that snaps into the focus region. */
export function settleScroll(state: DiaryState): {
  state: DiaryState;
  targetOffset: number;
} {
  const targetOffset = snapDayOffset(state.scrollOffsetDays);
  return {
    state: { ...state, scrollOffsetDays: 0 },
    targetOffset,
  };
}

export interface ChartScale {
  x(xUnit: number): number;
  y(glucose: number): number;
}

/** Map unit-square geometry onto pixel space (y grows downward). */
export function chartScale(
  widthPx: number,
  heightPx: number,
  glucoseMin = 2,
  glucoseMax = 22,
): ChartScale {
  return {
    x: (xUnit) => xUnit * widthPx,
    y: (glucose) =>
      heightPx -
      ((glucose - glucoseMin) / (glucoseMax - glucoseMin)) * heightPx,
  };
}

/** Polyline string for an SVG path from (x, glucose) pairs. */
export function polylinePoints(
  points: { x: number | null; glucose: number }[],
  scale: ChartScale,
): string {
  return points
    .filter((p): p is { x: number; glucose: number } => p.x !== null)
    .map((p) => `${scale.x(p.x).toFixed(1)},${scale.y(p.glucose).toFixed(1)}`)
    .join(" ");
}
