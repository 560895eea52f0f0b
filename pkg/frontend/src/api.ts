/** Typed client for the glucoplan HTTP API. */
import type {
  AdviceItem,
  ExploreRequest,
  ExploreResponse,
  GeometryDoc,
  FocusDetail,
  MealProfile,
  PeriodStats,
  Reading,
  Settings,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** 503 from the service: no recent CGM reading to anchor a prediction. */
export class StaleDataError extends ApiError {
  constructor(message: string) {
    super(503, message);
    this.name = "StaleDataError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        /* non-JSON error body */
      }
      if (response.status === 503) throw new StaleDataError(detail);
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  diary(focal?: string): Promise<GeometryDoc> {
    const query = focal ? `?focal=${encodeURIComponent(focal)}` : "";
    return this.request(`/diary${query}`);
  }

  day(date: string): Promise<FocusDetail> {
    return this.request(`/day/${date}`);
  }

  explore(request: ExploreRequest): Promise<ExploreResponse> {
    return this.post("/explore", request);
  }

  commitExploration(
    request: ExploreRequest,
    acceptDose: boolean,
    expectedTotal: number,
  ): Promise<{ appended: unknown[] }> {
    return this.post("/explore/commit", {
      ...request,
      accept_dose: acceptDose,
      expected_total: expectedTotal,
    });
  }

  advice(): Promise<{ items: AdviceItem[] }> {
    return this.request("/advice");
  }

  stats(period: "day" | "week" | "month", at?: string): Promise<PeriodStats> {
    const query = at ? `&at=${at}` : "";
    return this.request(`/stats?period=${period}${query}`);
  }

  settings(): Promise<Settings> {
    return this.request("/settings");
  }

  updateSettings(patch: Partial<Settings>): Promise<Settings> {
    return this.request("/settings", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(patch),
    });
  }

  meals(): Promise<{ profiles: MealProfile[] }> {
    return this.request("/meals");
  }

  latestReading(): Promise<Reading> {
    return this.request("/cgm/latest");
  }

  appendEvent(event: unknown): Promise<{ seq: number }> {
    return this.post("/events", event);
  }
}
