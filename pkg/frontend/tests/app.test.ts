// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app";
import { ApiClient } from "../src/api";
import { exploreResponse, geometryDoc, jsonResponse, mealProfiles } from "./fixtures";

function appWithFakeService() {
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace(/^[^/]*\/\/[^/]*/, "").split("?")[0];
    if (path.startsWith("/diary")) return jsonResponse(geometryDoc());
    if (path === "/meals") return jsonResponse({ profiles: mealProfiles() });
    if (path === "/advice") return jsonResponse({ items: [] });
    if (path === "/stats")
      return jsonResponse({
        period: "week", start: "2026-08-03", end: "2026-08-10",
        total_insulin: 60.5, pct_time_in_range: 94.2, hypo_count: 0,
        exercise_minutes: 120,
      });
    if (path === "/explore")
      return jsonResponse(exploreResponse(JSON.parse(String(init?.body))));
    return jsonResponse({ error: `unhandled ${path}` }, 404);
  };
  const root = document.createElement("main");
  document.body.appendChild(root);
  return { root, app: new App(root, new ApiClient("", fetchImpl)) };
}

const tick = () => new Promise((resolve) => setTimeout(resolve, 20));

describe("launch state", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders the diary on top and all four stacked regions below", async () => {
    const { root, app } = appWithFakeService();
    await app.start();
    await tick();
    expect(root.querySelector("#diary svg")).not.toBeNull();
    const regions = root.querySelectorAll(".region");
    expect(regions).toHaveLength(4);
    // exactly one expanded, three always-visible strips
    expect(root.querySelectorAll(".region.expanded")).toHaveLength(1);
    expect(root.querySelectorAll(".region.strip")).toHaveLength(3);
    // the diary draws segments, glucose line and the Now divider
    expect(root.querySelectorAll("#diary rect.seg").length).toBe(9);
    expect(root.querySelector("#diary .now")).not.toBeNull();
  });

  it("tapping a strip brings that region to the top, strips remain", async () => {
    const { root, app } = appWithFakeService();
    await app.start();
    await tick();
    const strips = [...root.querySelectorAll<HTMLElement>(".region.strip")];
    const target = strips.find((el) => el.className.includes("region-advice"))!;
    target.click();
    await tick();
    expect(root.querySelector(".region.expanded")!.className).toContain("region-advice");
    expect(root.querySelectorAll(".region")).toHaveLength(4);
  });

  it("opening a menu ghosts the regions instead of removing them", async () => {
    const { root, app } = appWithFakeService();
    await app.start();
    await tick();
    root.querySelector<HTMLButtonElement>('button[data-menu="CarbMenu"]')!.click();
    await tick();
    const regions = root.querySelector<HTMLElement>("#regions")!;
    expect(root.querySelectorAll(".region")).toHaveLength(4); // still rendered
    expect(Number(regions.style.opacity)).toBeLessThan(1);
    expect(regions.style.pointerEvents).toBe("none");
    expect(root.querySelector("#menu-layer .carb-menu")).not.toBeNull();
  });

  it("explore opens at 40 g with the recommended dose in the box", async () => {
    const { root, app } = appWithFakeService();
    await app.start();
    await tick();
    root.querySelector<HTMLButtonElement>('button[data-menu="ExploreSlider"]')!.click();
    await tick();
    expect(root.querySelector<HTMLInputElement>("#carb-slider")!.value).toBe("40");
    expect(root.querySelector("#dose-box")!.textContent).toBe("4 U");
    expect(root.querySelector("#explore-chart .prediction")).not.toBeNull();
  });
});
