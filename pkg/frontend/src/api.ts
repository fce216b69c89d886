/**
 * Minimal fetch client for the analysis service.
 * Server-side failures surface as ApiError with the status code and the
 * server's error text; network failures propagate as whatever fetch threw.
 */

import type { ConfigPatch, CurveResponse, Layer, ResultDocument } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function asError(res: Response): Promise<ApiError> {
  let message = `${res.status} ${res.statusText}`;
  try {
    const body = (await res.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    // non-JSON error body, keep the status line
  }
  return new ApiError(res.status, message);
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(`${this.base}${path}`, init);
    if (!res.ok) throw await asError(res);
    return (await res.json()) as T;
  }

  createSession(image: BodyInit, contentType: string): Promise<ResultDocument> {
    return this.json("/sessions", {
      method: "POST",
      headers: { "content-type": contentType },
      body: image,
    });
  }

  getResult(session: string): Promise<ResultDocument> {
    return this.json(`/sessions/${session}/result`);
  }

  patchConfig(session: string, patch: ConfigPatch): Promise<ResultDocument> {
    return this.json(`/sessions/${session}/config`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
  }

  addCurve(session: string, controlPoints: [number, number][]): Promise<CurveResponse> {
    return this.json(`/sessions/${session}/curves`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ control_points: controlPoints }),
    });
  }

  removeCurve(session: string, index: number): Promise<ResultDocument> {
    return this.json(`/sessions/${session}/curves/${index}`, { method: "DELETE" });
  }

  /** URL for an <img> src; rev busts the browser cache after mutations. */
  previewUrl(session: string, layer: Layer, rev: number): string {
    return `${this.base}/sessions/${session}/preview?layer=${layer}&rev=${rev}`;
  }

  async fetchPreview(session: string, layer: Layer): Promise<ArrayBuffer> {
    const res = await this.fetchFn(`${this.base}/sessions/${session}/preview?layer=${layer}`);
    if (!res.ok) throw await asError(res);
    return res.arrayBuffer();
  }
}
