/** Live what-if exploration driven by the carb slider and dose box.
 *
 * A horizontal drag sweeps the carb value, a vertical drag on the dose box
 * sweeps the dose at fixed carbs. Requests are throttled to roughly the
 * display refresh; several may be in flight at once and responses apply
 * latest-wins, so a slow stale response never overwrites a newer one. A
 * second touch on Explore commits the last explored value.
 */
import type { ApiClient } from "./api";
import { StaleDataError } from "./api";
import type { ExploreMode, ExploreRequest, ExploreResponse } from "./types";

export interface ChartSink {
  update(response: ExploreResponse): void;
}

export interface SliderCallbacks {
  onStaleData?(message: string): void;
  onError?(message: string): void;
}

export const DEFAULT_CARBS = 40;

export class ExploreSliderSession {
  private seq = 0;
  private appliedSeq = 0;
  private outstanding = 0;
  private pending: ExploreRequest | null = null;
  private flushTimer: ReturnType<typeof setTimeout> | null = null;
  private lastIssueAt = Number.NEGATIVE_INFINITY;
  private last: ExploreResponse | null = null;
  private settlers: (() => void)[] = [];

  carbs = DEFAULT_CARBS;
  doseOverride: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly chart: ChartSink,
    private readonly callbacks: SliderCallbacks = {},
    private readonly throttleMs = 16,
  ) {}

  /** Most recent response applied to the chart. */
  lastResponse(): ExploreResponse | null {
    return this.last;
  }

  /** Open the session at the default (or profile-provided) carb value. */
  open(carbs = DEFAULT_CARBS): Promise<void> {
    this.carbs = carbs;
    this.doseOverride = null;
    return this.issue({ mode: "carb_sweep", carbs });
  }

  /** Horizontal drag on the carb slider. */
  dragCarbs(carbs: number): Promise<void> {
    this.carbs = carbs;
    this.doseOverride = null;
    return this.issue({ mode: "carb_sweep", carbs });
  }

  /** Vertical drag on the insulin dose box: dose sweep at fixed carbs. */
  dragDose(doseOverride: number): Promise<void> {
    this.doseOverride = doseOverride;
    return this.issue({
      mode: "dose_sweep",
      carbs: this.carbs,
      dose_override: doseOverride,
    });
  }

  /** Second touch on Explore: record the last explored values. */
  async commit(acceptDose: boolean): Promise<void> {
    await this.whenSettled();
    const last = this.last;
    if (!last) throw new Error("nothing explored yet");
    const mode: ExploreMode = this.doseOverride === null ? "carb_sweep" : "dose_sweep";
    await this.api.commitExploration(
      {
        mode,
        carbs: this.carbs,
        dose_override: this.doseOverride,
        at: last.request.at,
      },
      acceptDose,
      last.recommended.total,
    );
  }

  /** Resolves once nothing is in flight, queued or waiting on the throttle. */
  whenSettled(): Promise<void> {
    if (this.isIdle()) return Promise.resolve();
    return new Promise((resolve) => this.settlers.push(resolve));
  }

  private isIdle(): boolean {
    return this.outstanding === 0 && this.pending === null && this.flushTimer === null;
  }

  private checkSettled(): void {
    if (!this.isIdle()) return;
    const settlers = this.settlers;
    this.settlers = [];
    for (const resolve of settlers) resolve();
  }

  private issue(request: ExploreRequest): Promise<void> {
    // collapse rapid drags: only the newest queued value survives
    this.pending = request;
    this.maybeFlush();
    return this.whenSettled();
  }

  private maybeFlush(): void {
    if (this.pending === null) return;
    const wait = this.lastIssueAt + this.throttleMs - performance.now();
    if (wait > 0) {
      if (this.flushTimer === null) {
        this.flushTimer = setTimeout(() => {
          this.flushTimer = null;
          this.maybeFlush();
        }, wait);
      }
      return;
    }
    const request = this.pending;
    this.pending = null;
    this.lastIssueAt = performance.now();
    void this.dispatch(request);
  }

  private async dispatch(request: ExploreRequest): Promise<void> {
    const mySeq = ++this.seq;
    this.outstanding += 1;
    try {
      const response = await this.api.explore(request);
      if (mySeq > this.appliedSeq) {
        // latest-wins: an older response arriving late is dropped here
        this.appliedSeq = mySeq;
        this.last = response;
        this.chart.update(response);
      }
    } catch (err) {
      if (err instanceof StaleDataError) {
        this.callbacks.onStaleData?.(err.message);
      } else {
        this.callbacks.onError?.(String(err));
      }
    } finally {
      this.outstanding -= 1;
      this.checkSettled();
    }
  }
}
