/** Launch-state wiring: bifocal diary on top, stacked regions below.
 *
 * Every flow returns here. Menus take the whole display with the rest
 * ghosted; the diary scrolls with day snapping; the Explore flow drives the
 * slider session against the service.
 */
import { ApiClient, ApiError } from "./api";
import { animate } from "./animation";
import {
  DiaryState,
  initialDiary,
  polylinePoints,
  chartScale,
  settleScroll,
  shiftFocalDay,
  toggleOverlay,
} from "./diary";
import {
  CARB_MENU_VALUES,
  InputModeState,
  MenuKind,
  carouselOrder,
  closeMenu,
  contextPresentation,
  defaultMealCategory,
  exerciseMenuOrder,
  launchInputMode,
  openMenu,
} from "./menus";
import { Region, RegionStackState, bringToTop, initialStack, stripLayout } from "./regions";
import { ExploreSliderSession } from "./slider";
import type { ExploreResponse, MealProfile } from "./types";

const REGION_LABEL: Record<Region, string> = {
  Food: "Food",
  Exercise: "Exercise",
  Health: "Health",
  Advice: "Advice",
};

export class App {
  private stack: RegionStackState = initialStack();
  private inputMode: InputModeState = launchInputMode();
  private diary: DiaryState = initialDiary();
  private profiles: MealProfile[] = [];
  private slider: ExploreSliderSession;
  private focalDay: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.slider = new ExploreSliderSession(api, {
      update: (response) => this.renderExploreChart(response),
    }, {
      onStaleData: (msg) => this.banner(`sensor gap: ${msg}`),
      onError: (msg) => this.banner(msg),
    });
  }

  async start(): Promise<void> {
    this.root.innerHTML = `
      <div id="banner" class="banner" hidden></div>
      <section id="diary" class="diary"></section>
      <section id="regions" class="regions"></section>
      <div id="menu-layer" class="menu-layer" hidden></div>
    `;
    try {
      const [doc, meals] = await Promise.all([this.api.diary(), this.api.meals()]);
      this.diary = { ...this.diary, doc };
      this.focalDay = doc.focal_day;
      this.profiles = meals.profiles;
    } catch (err) {
      this.banner(
        err instanceof ApiError && err.status === 0
          ? "service offline; showing nothing until it returns"
          : String(err),
      );
    }
    this.renderDiary();
    this.renderRegions();
  }

  // -- diary -----------------------------------------------------------------

  private async reloadDiary(): Promise<void> {
    if (!this.focalDay) return;
    try {
      const doc = await this.api.diary(this.focalDay);
      this.diary = { ...this.diary, doc };
      this.renderDiary();
    } catch (err) {
      this.banner(String(err));
    }
  }

  private renderDiary(): void {
    const host = this.root.querySelector<HTMLElement>("#diary");
    if (!host) return;
    const doc = this.diary.doc;
    if (!doc) {
      host.innerHTML = `<div class="empty">no data yet</div>`;
      return;
    }
    const w = 1000;
    const h = 260;
    const scale = chartScale(w, h);
    const segments = doc.segments
      .map(
        (seg) => `<rect x="${(seg.x_start * w).toFixed(1)}" y="0"
          width="${((seg.x_end - seg.x_start) * w).toFixed(1)}" height="${h}"
          class="seg seg-${seg.kind}" data-day="${seg.day}"></rect>`,
      )
      .join("");
    const bars = doc.days
      .filter((d) => d.has_data)
      .map((d) => {
        const seg = doc.segments.find((s) => s.day === d.date);
        if (!seg || seg.kind === "focus") return "";
        const x0 = seg.x_start * w + 2;
        const bw = (seg.x_end - seg.x_start) * w - 4;
        const inH = (d.pct_in / 100) * (h - 40);
        const lowH = (d.pct_low / 100) * (h - 40);
        const highH = (d.pct_high / 100) * (h - 40);
        let y = h - 20;
        const parts: string[] = [];
        for (const [cls, ph] of [["low", lowH], ["in", inH], ["high", highH]] as const) {
          y -= ph;
          parts.push(`<rect x="${x0}" y="${y}" width="${bw}" height="${ph}" class="bar bar-${cls}"></rect>`);
        }
        return parts.join("");
      })
      .join("");
    const focusLine = polylinePoints(doc.focus.glucose, scale);
    const prediction = doc.focus.prediction;
    let predictionSvg = "";
    if (prediction && prediction.x) {
      const pts = prediction.points
        .map((p, i) => ({ x: prediction.x![i], glucose: p }));
      predictionSvg = `<polyline class="prediction" points="${polylinePoints(pts, scale)}"></polyline>`;
    }
    const doses = doc.focus.dose_markers
      .filter((m) => m.x !== null)
      .map(
        (m) => `<g class="dose" transform="translate(${scale.x(m.x!)},${h - 34})">
          <circle r="11"></circle><text dy="4">${m.units}</text></g>`,
      )
      .join("");
    const overlay = this.diary.overlayVisible
      ? doc.focus.overlay
          .filter((o) => o.x !== null)
          .map(
            (o) => `<g class="overlay" transform="translate(${scale.x(o.x!)},26)">
              <text>${o.carbs} g</text></g>`,
          )
          .join("")
      : "";
    const nowLine =
      doc.now_x !== null
        ? `<line class="now" x1="${scale.x(doc.now_x)}" y1="0" x2="${scale.x(doc.now_x)}" y2="${h}"></line>`
        : "";
    host.innerHTML = `
      <svg viewBox="0 0 ${w} ${h}" preserveAspectRatio="none">
        ${segments}${bars}
        <polyline class="glucose" points="${focusLine}"></polyline>
        ${predictionSvg}${doses}${overlay}${nowLine}
      </svg>`;
    host.onclick = () => {
      this.diary = toggleOverlay(this.diary);
      animate(host, "diary-overlay-toggle", () => this.renderDiary());
    };
    host.onwheel = (event) => {
      event.preventDefault();
      this.diary = {
        ...this.diary,
        scrollOffsetDays: this.diary.scrollOffsetDays + event.deltaX / 400,
      };
      const settled = settleScroll(this.diary);
      this.diary = settled.state;
      if (settled.targetOffset !== 0 && this.focalDay) {
        this.focalDay = shiftFocalDay(this.focalDay, settled.targetOffset);
        animate(host, "diary-day-snap", () => void this.reloadDiary());
      }
    };
  }

  // -- stacked regions ---------------------------------------------------------

  private renderRegions(): void {
    const host = this.root.querySelector<HTMLElement>("#regions");
    if (!host) return;
    const presentation = contextPresentation(this.inputMode);
    host.style.opacity = String(presentation.opacity);
    host.style.pointerEvents = presentation.hitTesting ? "auto" : "none";
    host.innerHTML = "";
    for (const slot of stripLayout(this.stack)) {
      const div = document.createElement("div");
      div.className = `region region-${slot.region.toLowerCase()}` +
        (slot.expanded ? " expanded" : " strip");
      div.style.top = `${slot.y * 100}%`;
      div.style.height = `${slot.height * 100}%`;
      div.innerHTML = slot.expanded
        ? this.regionBody(slot.region)
        : `<header>${REGION_LABEL[slot.region]}</header>`;
      div.onclick = (event) => {
        if (!slot.expanded) {
          event.stopPropagation();
          this.stack = bringToTop(this.stack, slot.region);
          animate(div, "region-bring-to-top", () => this.renderRegions());
        }
      };
      host.appendChild(div);
    }
    this.wireRegionButtons(host);
  }

  private regionBody(region: Region): string {
    switch (region) {
      case "Food":
        return `<header>Food</header>
          <div class="actions">
            <button data-menu="CarbMenu">carbs</button>
            <button data-menu="MealCarousel">meals</button>
            <button data-menu="ExploreSlider">explore</button>
          </div>`;
      case "Exercise":
        return `<header>Exercise</header>
          <div class="actions"><button data-menu="ExerciseMenu">plan exercise</button></div>`;
      case "Health":
        return `<header>Health</header><div class="actions" id="health-stats">…</div>`;
      case "Advice":
        return `<header>Advice</header><div class="actions" id="advice-items">…</div>`;
    }
  }

  private wireRegionButtons(host: HTMLElement): void {
    host.querySelectorAll<HTMLButtonElement>("button[data-menu]").forEach((button) => {
      button.onclick = (event) => {
        event.stopPropagation();
        void this.openInputMenu(button.dataset.menu as MenuKind);
      };
    });
    void this.fillHealthAndAdvice();
  }

  private async fillHealthAndAdvice(): Promise<void> {
    const stats = this.root.querySelector("#health-stats");
    if (stats) {
      try {
        const week = await this.api.stats("week");
        stats.textContent =
          `${week.total_insulin.toFixed(1)} U this week, ` +
          `${week.pct_time_in_range.toFixed(0)}% in range, ` +
          `${week.hypo_count} lows, ${week.exercise_minutes.toFixed(0)} min exercise`;
      } catch {
        stats.textContent = "statistics unavailable";
      }
    }
    const advice = this.root.querySelector("#advice-items");
    if (advice) {
      try {
        const { items } = await this.api.advice();
        advice.textContent = items.length
          ? items.map((i) => `${i.severity === "warning" ? "!" : "i"} ${i.message}`).join(" · ")
          : "no warnings";
      } catch {
        advice.textContent = "advice unavailable";
      }
    }
  }

  // -- input menus ---------------------------------------------------------------

  private async openInputMenu(menu: MenuKind): Promise<void> {
    this.inputMode = openMenu(this.inputMode, menu);
    const layer = this.root.querySelector<HTMLElement>("#menu-layer");
    if (!layer) return;
    layer.hidden = false;
    this.renderRegions(); // ghost, never remove
    animate(layer, "menu-ghost-in", () => undefined);
    if (menu === "CarbMenu") this.renderCarbMenu(layer);
    else if (menu === "MealCarousel") this.renderMealCarousel(layer);
    else if (menu === "ExerciseMenu") this.renderExerciseMenu(layer);
    else await this.renderExploreSlider(layer);
  }

  private closeInputMenu(): void {
    this.inputMode = closeMenu(this.inputMode);
    const layer = this.root.querySelector<HTMLElement>("#menu-layer");
    if (layer) {
      animate(layer, "menu-ghost-out", () => {
        layer.hidden = true;
        layer.innerHTML = "";
      });
    }
    this.renderRegions();
    void this.reloadDiary();
  }

  private renderCarbMenu(layer: HTMLElement): void {
    layer.innerHTML = `<div class="menu carb-menu">
      <h2>carbohydrates</h2>
      <div class="grid">${CARB_MENU_VALUES.map(
        (v) => `<button class="big" data-carbs="${v}">${v} g</button>`,
      ).join("")}</div>
      <button class="close">back</button></div>`;
    layer.querySelectorAll<HTMLButtonElement>("button[data-carbs]").forEach((b) => {
      b.onclick = () => {
        void this.openInputMenu("ExploreSlider").then(() =>
          this.slider.dragCarbs(Number(b.dataset.carbs)),
        );
      };
    });
    this.wireClose(layer);
  }

  private renderMealCarousel(layer: HTMLElement): void {
    const now = new Date();
    const category = defaultMealCategory(now.getHours(), now.getMinutes());
    const ordered = carouselOrder(this.profiles, category);
    layer.innerHTML = `<div class="menu carousel">
      <h2>favourite meals <small>(${category} first)</small></h2>
      <div class="scroll">${ordered
        .map(
          (p) => `<button class="big meal" data-id="${p.id}">
            <span class="img">${p.image_ref ? "🖼" : "🍽"}</span>
            <span>${p.name}</span><small>${p.carbs} g carbs</small></button>`,
        )
        .join("")}</div>
      <button class="close">back</button></div>`;
    layer.querySelectorAll<HTMLButtonElement>("button[data-id]").forEach((b) => {
      b.onclick = () => {
        const profile = this.profiles.find((p) => p.id === b.dataset.id);
        if (profile) void this.confirmMeal(layer, profile);
      };
    });
    this.wireClose(layer);
  }

  private async confirmMeal(layer: HTMLElement, profile: MealProfile): Promise<void> {
    let doseLabel = "…";
    try {
      const explored = await this.api.explore({ carbs: profile.carbs });
      doseLabel = `${explored.recommended.total} U`;
    } catch {
      doseLabel = "unavailable";
    }
    layer.innerHTML = `<div class="menu confirm">
      <h2>${profile.name}</h2>
      <p>${profile.carbs} g carbs · ${profile.protein} g protein · ${profile.fat} g fat</p>
      <p>recommended dose: <strong>${doseLabel}</strong></p>
      <button class="big" id="confirm-meal">log this meal</button>
      <button class="close">back</button></div>`;
    const confirm = layer.querySelector<HTMLButtonElement>("#confirm-meal");
    if (confirm) {
      confirm.onclick = async () => {
        try {
          const explored = await this.api.explore({ carbs: profile.carbs });
          await this.api.commitExploration(
            { carbs: profile.carbs, at: explored.request.at },
            true,
            explored.recommended.total,
          );
          this.closeInputMenu();
        } catch (err) {
          this.banner(String(err));
        }
      };
    }
    this.wireClose(layer);
  }

  private renderExerciseMenu(layer: HTMLElement): void {
    const { defaults, scrollable } = exerciseMenuOrder(
      [],
      ["walking", "running", "cycling", "swimming", "gym", "yoga", "skiing"],
    );
    const buttons = [...defaults, ...scrollable]
      .map(
        (t) => `<button class="big" data-type="${t}">${t}
          <input type="range" min="1" max="3" value="2" data-intensity></button>`,
      )
      .join("");
    layer.innerHTML = `<div class="menu exercise">
      <h2>exercise</h2><div class="scroll">${buttons}</div>
      <button class="close">back</button></div>`;
    layer.querySelectorAll<HTMLButtonElement>("button[data-type]").forEach((b) => {
      b.onclick = async () => {
        const intensity = Number(
          b.querySelector<HTMLInputElement>("input[data-intensity]")?.value ?? 2,
        );
        try {
          await this.api.appendEvent({
            id: `ui-${Date.now()}-${Math.floor(Math.random() * 1e6)}`,
            timestamp: new Date().toISOString().replace(/\.\d+Z$/, "+00:00"),
            kind: "exercise",
            payload: { exercise_type: b.dataset.type, intensity, duration: 30 },
          });
          this.closeInputMenu();
        } catch (err) {
          this.banner(String(err));
        }
      };
    });
    this.wireClose(layer);
  }

  private async renderExploreSlider(layer: HTMLElement): Promise<void> {
    layer.innerHTML = `<div class="menu explore">
      <div class="dose-box" id="dose-box" title="drag vertically to sweep the dose">– U</div>
      <svg id="explore-chart" viewBox="0 0 600 220" preserveAspectRatio="none"></svg>
      <input id="carb-slider" type="range" min="0" max="120" step="1" value="40">
      <div><span id="carb-value">40 g</span></div>
      <button class="close" id="explore-commit">record this value</button></div>`;
    const sliderInput = layer.querySelector<HTMLInputElement>("#carb-slider");
    if (sliderInput) {
      sliderInput.oninput = () => {
        const carbs = Number(sliderInput.value);
        const label = layer.querySelector("#carb-value");
        if (label) label.textContent = `${carbs} g`;
        void this.slider.dragCarbs(carbs);
      };
    }
    const doseBox = layer.querySelector<HTMLElement>("#dose-box");
    if (doseBox) {
      doseBox.onwheel = (event) => {
        event.preventDefault();
        const current =
          this.slider.doseOverride ??
          this.slider.lastResponse()?.recommended.total ??
          0;
        const next = Math.max(0, current + (event.deltaY < 0 ? 0.5 : -0.5));
        animate(doseBox, "dose-box-move", () => void this.slider.dragDose(next));
      };
    }
    const commit = layer.querySelector<HTMLButtonElement>("#explore-commit");
    if (commit) {
      commit.onclick = async () => {
        try {
          await this.slider.commit(true);
        } catch (err) {
          this.banner(String(err));
        }
        this.closeInputMenu();
      };
    }
    await this.slider.open();
  }

  private renderExploreChart(response: ExploreResponse): void {
    const chart = this.root.querySelector<SVGElement>("#explore-chart");
    if (!chart) return;
    const w = 600;
    const h = 220;
    const n = response.prediction.points.length;
    const scale = chartScale(w, h);
    const xs = (i: number) => (i / (n - 1)) * w;
    const line = response.prediction.points
      .map((p, i) => `${xs(i).toFixed(1)},${scale.y(p).toFixed(1)}`)
      .join(" ");
    const bandTop = response.prediction.upper.map((p, i) => `${xs(i).toFixed(1)},${scale.y(p).toFixed(1)}`);
    const bandBottom = response.prediction.lower
      .map((p, i) => `${xs(i).toFixed(1)},${scale.y(p).toFixed(1)}`)
      .reverse();
    chart.innerHTML = `
      <polygon class="band" points="${[...bandTop, ...bandBottom].join(" ")}"></polygon>
      <polyline class="prediction" points="${line}"></polyline>`;
    const doseBox = this.root.querySelector("#dose-box");
    if (doseBox) {
      const dose = response.request.dose_override ?? response.recommended.total;
      doseBox.textContent = `${dose} U`;
    }
  }

  // -- misc ---------------------------------------------------------------------

  private banner(message: string): void {
    const el = this.root.querySelector<HTMLElement>("#banner");
    if (!el) return;
    el.textContent = message;
    el.hidden = false;
    animate(el, "advice-banner", () => undefined);
    setTimeout(() => {
      el.hidden = true;
    }, 4000);
  }

  private wireClose(layer: HTMLElement): void {
    layer.querySelectorAll<HTMLButtonElement>("button.close").forEach((b) => {
      if (!b.onclick) b.onclick = () => this.closeInputMenu();
    });
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.start();
  return app;
}

// Browser entry point; tests import the modules directly. Same-origin by
// default (serve --ui-dir), or point elsewhere with ?api=http://host:port.
if (typeof document !== "undefined" && document.getElementById("app")) {
  const base = new URLSearchParams(window.location.search).get("api") ?? "";
  mount(document.getElementById("app")!, base);
}
