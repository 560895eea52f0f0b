/** Shared payload builders for tests. */
import type {
  ExploreRequest,
  ExploreResponse,
  GeometryDoc,
  MealProfile,
} from "../src/types";

export function prediction(points: number[]) {
  return {
    start_time: "2026-08-07T12:00:00+00:00",
    step: 5,
    points,
    lower: points.map((p, k) => p - 0.1 * Math.sqrt(k)),
    upper: points.map((p, k) => p + 0.1 * Math.sqrt(k)),
    horizon: 120,
    x: points.map((_, k) => 0.2 + (k / (points.length - 1)) * 0.6),
  };
}

export function exploreResponse(request: ExploreRequest): ExploreResponse {
  const carbs = request.carbs;
  const total = Math.round((carbs / 10) * 2) / 2;
  const dose = request.dose_override ?? total;
  const points = Array.from({ length: 25 }, (_, k) => 6.5 + carbs / 40 - dose / 8 + k * 0.01);
  return {
    prediction: prediction(points),
    recommended: {
      meal_component: carbs / 10,
      correction_component: 0,
      iob_deduction: 0,
      total,
    },
    request: {
      mode: request.mode ?? "carb_sweep",
      carbs,
      at: request.at ?? "2026-08-07T12:00:00+00:00",
      dose_override: request.dose_override ?? null,
      meal_category: request.meal_category ?? null,
    },
  };
}

export function geometryDoc(): GeometryDoc {
  const segments = [];
  let x = 0;
  for (let i = -4; i <= 4; i++) {
    const width = i === 0 ? 0.6 : 0.05;
    segments.push({
      day: `2026-08-${String(7 + i).padStart(2, "0")}`,
      x_start: x,
      x_end: x + width,
      kind: (i === 0 ? "focus" : "context") as "focus" | "context",
    });
    x += width;
  }
  return {
    focal_day: "2026-08-07",
    segments,
    days: segments.map((s) => ({
      date: s.day,
      pct_low: 5,
      pct_in: 90,
      pct_high: 5,
      has_data: true,
      icons: [],
    })),
    focus: {
      date: "2026-08-07",
      glucose: [
        { x: 0.22, t: "2026-08-07T06:00:00+00:00", glucose: 6.1 },
        { x: 0.4, t: "2026-08-07T09:00:00+00:00", glucose: 7.2 },
      ],
      dose_markers: [{ x: 0.3, t: "2026-08-07T08:00:00+00:00", units: 4 }],
      overlay: [
        {
          x: 0.3,
          t: "2026-08-07T08:00:00+00:00",
          carbs: 40,
          meal_profile_id: "porridge",
          image_ref: "images/porridge.jpg",
        },
      ],
      prediction: prediction(Array.from({ length: 25 }, () => 6.5)),
    },
    now: "2026-08-07T12:00:00+00:00",
    now_x: 0.5,
  };
}

export function mealProfiles(): MealProfile[] {
  return [
    { id: "porridge", name: "Porridge", carbs: 45, protein: 10, fat: 6, image_ref: "i.jpg", category: "breakfast", created_at: "2026-08-01T00:00:00+00:00" },
    { id: "sandwich", name: "Sandwich", carbs: 50, protein: 25, fat: 12, image_ref: "", category: "lunch", created_at: "2026-08-01T00:00:00+00:00" },
    { id: "pasta", name: "Pasta", carbs: 70, protein: 16, fat: 11, image_ref: "", category: "meal", created_at: "2026-08-01T00:00:00+00:00" },
    { id: "apple", name: "Apple and nuts", carbs: 20, protein: 3, fat: 8, image_ref: "", category: "snack", created_at: "2026-08-01T00:00:00+00:00" },
  ];
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
