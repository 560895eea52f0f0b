/** Registry of every animated transition in the app.
 *
 * Instantaneous visual change costs the user a mental-model update and risks
 * change blindness, so every transition animates smoothly; durations must sit
 * in the 150-400 ms window and registration enforces it.
 */

export const MIN_DURATION_MS = 150;
export const MAX_DURATION_MS = 400;

const registry = new Map<string, number>();

export function registerTransition(name: string, durationMs: number): void {
  if (durationMs < MIN_DURATION_MS || durationMs > MAX_DURATION_MS) {
    throw new RangeError(
      `transition "${name}" duration ${durationMs} ms outside ` +
        `[${MIN_DURATION_MS}, ${MAX_DURATION_MS}] ms`,
    );
  }
  registry.set(name, durationMs);
}

export function transitionDuration(name: string): number {
  const duration = registry.get(name);
  if (duration === undefined) {
    throw new Error(`unregistered transition "${name}"`);
  }
  return duration;
}

export function registeredTransitions(): ReadonlyMap<string, number> {
  return registry;
}

// The app's transitions. Values picked per interaction weight: small state
// changes settle fast, whole-screen changes take longer.
registerTransition("region-bring-to-top", 250);
registerTransition("menu-ghost-in", 200);
registerTransition("menu-ghost-out", 200);
registerTransition("meal-carousel-settle", 300);
registerTransition("exercise-intensity-adjust", 150);
registerTransition("diary-day-snap", 350);
registerTransition("diary-overlay-toggle", 200);
registerTransition("explore-open", 250);
registerTransition("explore-close", 250);
registerTransition("dose-box-move", 150);
registerTransition("advice-banner", 300);
registerTransition("focal-day-rotate", 400);

/** Apply a CSS transition of the registered duration, then run `done`. */
export function animate(
  element: { style: { transition: string } },
  name: string,
  apply: () => void,
  done?: () => void,
): number {
  const duration = transitionDuration(name);
  element.style.transition = `all ${duration}ms ease`;
  apply();
  if (done) setTimeout(done, duration);
  return duration;
}
