/** The four stacked, partially overlapping data regions.
 *
 * Any region comes to the top with a single touch while the other three keep
 * their relative stacking order, and a fixed strip of every region stays
 * visible for context (seeing planned exercise while picking a meal).
 */

export type Region = "Food" | "Exercise" | "Health" | "Advice";

export const ALL_REGIONS: readonly Region[] = [
  "Food",
  "Exercise",
  "Health",
  "Advice",
];

export interface RegionStackState {
  /** Visual order, index 0 on top. */
  order: Region[];
  top: Region;
}

export function initialStack(): RegionStackState {
  return { order: [...ALL_REGIONS], top: ALL_REGIONS[0] };
}

/** Single-touch activation: tapped region rises, the rest keep their order. */
export function bringToTop(state: RegionStackState, region: Region): RegionStackState {
  if (!ALL_REGIONS.includes(region)) {
    throw new Error(`unknown region ${region}`);
  }
  return {
    order: [region, ...state.order.filter((r) => r !== region)],
    top: region,
  };
}

export interface RegionSlot {
  region: Region;
  y: number;
  height: number;
  expanded: boolean;
}

/**
 * Vertical layout of the stack: the top region expands, every other region
 * keeps its always-visible strip. Heights are fractions of the stack area.
 */
export function stripLayout(
  state: RegionStackState,
  stripFraction = 0.12,
): RegionSlot[] {
  if (stripFraction <= 0 || stripFraction * (ALL_REGIONS.length - 1) >= 1) {
    throw new RangeError(`stripFraction ${stripFraction} leaves no room for the top region`);
  }
  const expandedHeight = 1 - stripFraction * (ALL_REGIONS.length - 1);
  const slots: RegionSlot[] = [];
  let y = 0;
  // Draw top-first; collapsed strips follow in stacking order.
  for (const region of state.order) {
    const expanded = region === state.top;
    const height = expanded ? expandedHeight : stripFraction;
    slots.push({ region, y, height, expanded });
    y += height;
  }
  return slots;
}
