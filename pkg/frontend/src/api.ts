/** Thin client for the askbim HTTP API. */

import type { QueryResponse, ServiceError } from "./types.js";

export class ApiError extends Error {
  stage?: string;
  suggestions: string[];

  constructor(payload: ServiceError, status: number) {
    super(payload.error || `request failed (${status})`);
    this.stage = payload.stage;
    this.suggestions = payload.suggestions ?? [];
  }
}

export class Client {
  constructor(private baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(body as ServiceError, response.status);
    }
    return body as T;
  }

  submitQuery(text: string, prejoin = false): Promise<QueryResponse> {
    return this.request<QueryResponse>("/api/query", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, prejoin }),
    });
  }

  cachedResponse(id: string): Promise<QueryResponse> {
    return this.request<QueryResponse>(`/api/responses/${id}`);
  }

  models(): Promise<{ models: { name: string; census: Record<string, number> }[] }> {
    return this.request("/api/models");
  }
}
