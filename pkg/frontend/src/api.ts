/** Thin fetch client for the workbench API. */

import type { ServerToken } from "./sync.js";

export interface EngineEventPayload {
  kind: string;
  [key: string]: unknown;
}

export interface HighlightResponse {
  generation: number;
  groups: ServerToken[][];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string
  ) {
    super(message);
  }
}

async function request<T>(method: string, url: string, body?: unknown): Promise<T> {
  const response = await fetch(url, {
    method,
    headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
    body: body !== undefined ? JSON.stringify(body) : undefined,
  });
  const text = await response.text();
  const data = text ? JSON.parse(text) : {};
  if (!response.ok) {
    throw new ApiError(response.status, data.error ?? "error", data.message ?? response.statusText);
  }
  return data as T;
}

export class WorkbenchApi {
  constructor(readonly base = "") {}

  createEngine(src: string): Promise<{ id: string }> {
    return request("POST", `${this.base}/api/pengine/create`, { src });
  }

  ask(id: string, query: string, chunk = 1, debug = false): Promise<unknown> {
    return request("POST", `${this.base}/api/pengine/${id}/ask`, { query, chunk, debug });
  }

  next(id: string, count: number): Promise<unknown> {
    return request("POST", `${this.base}/api/pengine/${id}/next`, { count });
  }

  stop(id: string): Promise<unknown> {
    return request("POST", `${this.base}/api/pengine/${id}/stop`);
  }

  abort(id: string): Promise<unknown> {
    return request("POST", `${this.base}/api/pengine/${id}/abort`);
  }

  respond(id: string, input: string): Promise<unknown> {
    return request("POST", `${this.base}/api/pengine/${id}/respond`, { input });
  }

  setBreakpoints(id: string, lines: number[]): Promise<unknown> {
    return request("POST", `${this.base}/api/pengine/${id}/breakpoints`, { lines });
  }

  events(id: string, timeoutSeconds: number): Promise<{ events: EngineEventPayload[] }> {
    return request("GET", `${this.base}/api/pengine/${id}/events?timeout=${timeoutSeconds}`);
  }

  highlight(uuid: string, payload: unknown): Promise<HighlightResponse> {
    return request("POST", `${this.base}/api/highlight/${uuid}`, payload);
  }

  hover(uuid: string, offset: number): Promise<{ origin?: string; summary?: string }> {
    return request("GET", `${this.base}/api/hover/${uuid}?offset=${offset}`);
  }

  templates(prefix: string): Promise<{ templates: string[] }> {
    return request("GET", `${this.base}/api/templates?prefix=${encodeURIComponent(prefix)}`);
  }

  saveProgram(content: string): Promise<{ name: string; hash: string }> {
    return request("POST", `${this.base}/api/store`, { content });
  }

  saveVersion(name: string, content: string, previous: string): Promise<{ hash: string }> {
    return request("PUT", `${this.base}/api/store/${name}`, { content, previous });
  }

  loadProgram(ref: string): Promise<{ content: string; commit: unknown; examples: string[] }> {
    return request("GET", `${this.base}/api/store/${ref}?format=json`);
  }
}
