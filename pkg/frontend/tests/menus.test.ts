import { describe, expect, it } from "vitest";

import {
  carouselOrder,
  contextPresentation,
  defaultIntensity,
  defaultMealCategory,
  exerciseMenuOrder,
  launchInputMode,
  closeMenu,
  openMenu,
} from "../src/menus";
import { mealProfiles } from "./fixtures";

describe("input mode ghosting", () => {
  it("context is de-emphasized while a menu is up, never removed", () => {
    let state = launchInputMode();
    expect(contextPresentation(state)).toEqual({
      rendered: true,
      opacity: 1.0,
      hitTesting: true,
    });
    for (const menu of ["CarbMenu", "MealCarousel", "ExerciseMenu", "ExploreSlider"] as const) {
      state = openMenu(state, menu);
      const presentation = contextPresentation(state);
      expect(presentation.rendered).toBe(true); // still on screen
      expect(presentation.opacity).toBeLessThan(1.0);
      expect(presentation.hitTesting).toBe(false);
      state = closeMenu(state);
      expect(contextPresentation(state).opacity).toBe(1.0);
    }
  });
});

describe("meal category defaults", () => {
  it("mirrors the service boundary table", () => {
    expect(defaultMealCategory(7, 30)).toBe("breakfast");
    expect(defaultMealCategory(12, 30)).toBe("lunch");
    expect(defaultMealCategory(19, 0)).toBe("meal");
    expect(defaultMealCategory(2, 0)).toBe("snack");
    // half-open boundaries
    expect(defaultMealCategory(5, 0)).toBe("breakfast");
    expect(defaultMealCategory(10, 30)).toBe("lunch");
    expect(defaultMealCategory(15, 0)).toBe("meal");
    expect(defaultMealCategory(22, 0)).toBe("snack");
    expect(defaultMealCategory(4, 59)).toBe("snack");
  });
});

describe("meal carousel", () => {
  it("puts the time-of-day category first, everything still reachable", () => {
    const ordered = carouselOrder(mealProfiles(), "lunch");
    expect(ordered[0].id).toBe("sandwich");
    expect(ordered.map((p) => p.id).sort()).toEqual(
      mealProfiles().map((p) => p.id).sort(),
    );
  });

  it("keeps stable order within groups", () => {
    const ordered = carouselOrder(mealProfiles(), "breakfast");
    expect(ordered.map((p) => p.id)).toEqual([
      "porridge", "sandwich", "pasta", "apple",
    ]);
  });
});

describe("exercise menu", () => {
  const history = [
    { exercise_type: "running", intensity: 3 },
    { exercise_type: "walking", intensity: 1 },
    { exercise_type: "running", intensity: 2 },
    { exercise_type: "cycling", intensity: 2 },
    { exercise_type: "running", intensity: 2 },
  ];
  const library = ["walking", "running", "cycling", "swimming", "skiing", "yoga"];

  it("surfaces habitual types first, the rest scrollable", () => {
    const { defaults, scrollable } = exerciseMenuOrder(history, library, 2);
    expect(defaults).toEqual(["running", "cycling"]); // by frequency, ties alpha
    expect(scrollable[0]).toBe("walking");
    expect(scrollable).toContain("skiing"); // the 2-week holiday is reachable
    expect([...defaults, ...scrollable].sort()).toEqual([...library].sort());
  });

  it("defaults intensity to the last used per type", () => {
    expect(defaultIntensity(history, "running")).toBe(2);
    expect(defaultIntensity(history, "walking")).toBe(1);
    expect(defaultIntensity(history, "skiing")).toBe(2); // unseen: mid level
  });
});
