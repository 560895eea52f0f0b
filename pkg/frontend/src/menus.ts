/** Full-screen input menus with ghosted context.
 *
 * While a menu is open every other element stays rendered but de-emphasized
 * (reduced opacity, hit-testing off) so context is never lost; menu targets
 * are large for users with retinopathy or tremor.
 */
import type { MealProfile } from "./types";

export type MenuKind =
  | "CarbMenu"
  | "MealCarousel"
  | "ExerciseMenu"
  | "ExploreSlider";

export interface InputModeState {
  activeMenu: MenuKind | null;
  ghosted: boolean;
}

export const GHOST_OPACITY = 0.3;

export function launchInputMode(): InputModeState {
  return { activeMenu: null, ghosted: false };
}

export function openMenu(state: InputModeState, menu: MenuKind): InputModeState {
  void state;
  return { activeMenu: menu, ghosted: true };
}

export function closeMenu(state: InputModeState): InputModeState {
  void state;
  return { activeMenu: null, ghosted: false };
}

/**
 * Presentation of non-menu elements in a given mode: always rendered, only
 * de-emphasized while a menu is up. Nothing ever disappears.
 */
export function contextPresentation(state: InputModeState): {
  rendered: true;
  opacity: number;
  hitTesting: boolean;
} {
  return state.ghosted
    ? { rendered: true, opacity: GHOST_OPACITY, hitTesting: false }
    : { rendered: true, opacity: 1.0, hitTesting: true };
}

export type MealCategory = "breakfast" | "lunch" | "meal" | "snack";

/** Default category for the carousel, from the local clock. Mirrors the
 * service's boundary table: breakfast 05:00-10:30, lunch 10:30-15:00,
 * meal 15:00-22:00, snack otherwise. */
export function defaultMealCategory(hours: number, minutes: number): MealCategory {
  const t = hours * 60 + minutes;
  if (t >= 5 * 60 && t < 10 * 60 + 30) return "breakfast";
  if (t >= 10 * 60 + 30 && t < 15 * 60) return "lunch";
  if (t >= 15 * 60 && t < 22 * 60) return "meal";
  return "snack";
}

/** Carousel contents: profiles of the default category first (people repeat
 * meals), the rest still reachable by scrolling. */
export function carouselOrder(
  profiles: MealProfile[],
  category: MealCategory,
): MealProfile[] {
  const matching = profiles.filter((p) => p.category === category);
  const rest = profiles.filter((p) => p.category !== category);
  return [...matching, ...rest];
}

/** Large-target carb menu values (grams). */
export const CARB_MENU_VALUES: readonly number[] = [
  0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120,
];

export interface ExerciseHistoryEntry {
  exercise_type: string;
  intensity: number;
}

/**
 * Exercise menu ordering: most-used types first (habit), the full library
 * scrollable below for the occasional skiing holiday.
 */
export function exerciseMenuOrder(
  history: ExerciseHistoryEntry[],
  library: string[],
  defaultCount = 4,
): { defaults: string[]; scrollable: string[] } {
  const counts = new Map<string, number>();
  for (const entry of history) {
    counts.set(entry.exercise_type, (counts.get(entry.exercise_type) ?? 0) + 1);
  }
  const ranked = [...counts.entries()]
    .sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]))
    .map(([type]) => type);
  const defaults = ranked.slice(0, defaultCount);
  const scrollable = [
    ...ranked.slice(defaultCount),
    ...library.filter((t) => !ranked.includes(t)).sort(),
  ];
  return { defaults, scrollable };
}

/** Last intensity used per type, for one-touch re-selection. */
export function defaultIntensity(
  history: ExerciseHistoryEntry[],
  exerciseType: string,
): number {
  for (let i = history.length - 1; i >= 0; i--) {
    if (history[i].exercise_type === exerciseType) return history[i].intensity;
  }
  return 2;
}
