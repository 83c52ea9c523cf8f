/**
 * Thin client for the fusion service. All pixels and metrics shown in the
 * UI come from here byte-for-byte; nothing downstream recomputes them.
 */

import type { ConfidenceSource, RequestTuple } from "./state.js";

export interface SessionInfo {
  id: string;
  width: number;
  height: number;
  confidence_sources: string[];
  reliable: string;
  deep: string;
  has_truth: boolean;
}

export interface FusedImage {
  bytes: ArrayBuffer;
  /** Exact X-Psnr-Db header text, or null when the session has no ground truth. */
  psnrText: string | null;
  /** Exact X-Ssim header text, or null when the session has no ground truth. */
  ssimText: string | null;
}

export interface MetricsJson {
  psnr_db: number;
  ssim: number;
}

export interface SessionUpload {
  noisy: Blob;
  truth?: Blob;
  deep?: Blob;
  cmap?: Blob;
  config?: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (typeof body === "object" && body !== null && "detail" in body) {
      const detail = (body as { detail: unknown }).detail;
      if (typeof detail === "string") return detail;
    }
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  async createSession(upload: SessionUpload): Promise<SessionInfo> {
    const form = new FormData();
    form.append("noisy", upload.noisy, "noisy.png");
    if (upload.truth) form.append("truth", upload.truth, "truth.png");
    if (upload.deep) form.append("deep", upload.deep, "deep.png");
    if (upload.cmap) form.append("cmap", upload.cmap, "conf.cmap");
    if (upload.config) form.append("config", JSON.stringify(upload.config));
    const response = await this.request("/sessions", { method: "POST", body: form });
    return (await response.json()) as SessionInfo;
  }

  async sessionInfo(id: string): Promise<SessionInfo> {
    const response = await this.request(`/sessions/${id}`);
    return (await response.json()) as SessionInfo;
  }

  fusedPath(tuple: RequestTuple): string {
    const params = new URLSearchParams({
      mode: tuple.mode,
      w: String(tuple.w),
      conf: tuple.conf,
    });
    return `/sessions/${tuple.session}/fused?${params.toString()}`;
  }

  async fetchFused(tuple: RequestTuple, signal?: AbortSignal): Promise<FusedImage> {
    const response = await this.request(this.fusedPath(tuple), { signal });
    return {
      bytes: await response.arrayBuffer(),
      psnrText: response.headers.get("x-psnr-db"),
      ssimText: response.headers.get("x-ssim"),
    };
  }

  async fetchMetrics(tuple: RequestTuple): Promise<MetricsJson> {
    const params = new URLSearchParams({
      mode: tuple.mode,
      w: String(tuple.w),
      conf: tuple.conf,
    });
    const response = await this.request(`/sessions/${tuple.session}/metrics?${params.toString()}`);
    return (await response.json()) as MetricsJson;
  }

  async fetchOverlay(
    session: string,
    source: ConfidenceSource,
    threshold: number,
    signal?: AbortSignal,
  ): Promise<ArrayBuffer> {
    const params = new URLSearchParams({
      source,
      threshold: String(threshold),
      format: "overlay",
    });
    const response = await this.request(`/sessions/${session}/confidence?${params.toString()}`, {
      signal,
    });
    return response.arrayBuffer();
  }

  async fetchCmapText(session: string, source: ConfidenceSource): Promise<string> {
    const params = new URLSearchParams({ source, format: "cmap" });
    const response = await this.request(`/sessions/${session}/confidence?${params.toString()}`);
    return response.text();
  }

  planePath(session: string, plane: "noisy" | "reliable" | "deep" | "truth"): string {
    return `/sessions/${session}/${plane}`;
  }
}
