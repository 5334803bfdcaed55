// Thin client for the /v1 JSON API. The fetch implementation is
// injectable for tests; errors carry the server's stable machine code.

import type {
  AcceptResponse,
  CreateListResponse,
  FeedEntryPayload,
  LeaderboardEntryPayload,
  ListPayload,
  ProductPayload,
  ProfilePayload,
  ScanResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly field: string | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isNetwork(): boolean {
    return this.code === "network";
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private token: string | null = null,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    idempotencyKey?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (idempotencyKey) headers["Idempotency-Key"] = idempotencyKey;

    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError("network", `cannot reach ${this.baseUrl}: ${String(err)}`, 0);
    }

    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status} ${response.statusText}`;
      let field: string | null = null;
      try {
        const payload = (await response.json()) as {
          error?: { code?: string; message?: string; field?: string | null };
        };
        if (payload.error) {
          code = payload.error.code ?? code;
          message = payload.error.message ?? message;
          field = payload.error.field ?? null;
        }
      } catch {
        // non-JSON error body; keep the HTTP status text
      }
      throw new ApiError(code, message, response.status, field);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; products: number }> {
    return this.request("GET", "/v1/health");
  }

  products(q = "", limit = 50): Promise<{ products: ProductPayload[] }> {
    const query = new URLSearchParams({ q, limit: String(limit) });
    return this.request("GET", `/v1/products?${query}`);
  }

  lists(): Promise<{ lists: ListPayload[] }> {
    return this.request("GET", "/v1/lists");
  }

  list(listId: string): Promise<ListPayload> {
    return this.request("GET", `/v1/lists/${encodeURIComponent(listId)}`);
  }

  createList(name: string, seedSuggestions = true): Promise<CreateListResponse> {
    return this.request("POST", "/v1/lists", {
      name,
      seed_suggestions: seedSuggestions,
    });
  }

  addItem(listId: string, label: string, productId?: string): Promise<{ item: unknown }> {
    return this.request("POST", `/v1/lists/${encodeURIComponent(listId)}/items`, {
      label,
      product_id: productId ?? null,
    });
  }

  checkItem(listId: string, itemId: string): Promise<{ item: unknown }> {
    return this.request(
      "POST",
      `/v1/lists/${encodeURIComponent(listId)}/items/${encodeURIComponent(itemId)}/check`,
    );
  }

  suggestions(q: string, limit = 8): Promise<{ products: ProductPayload[] }> {
    const query = new URLSearchParams({ q, limit: String(limit) });
    return this.request("GET", `/v1/suggestions?${query}`);
  }

  scan(listId: string, code: string, idempotencyKey?: string): Promise<ScanResponse> {
    return this.request(
      "POST",
      `/v1/lists/${encodeURIComponent(listId)}/scan`,
      { code },
      idempotencyKey,
    );
  }

  acceptAlternative(
    listId: string,
    itemId: string,
    productId: string,
    idempotencyKey?: string,
  ): Promise<AcceptResponse> {
    return this.request(
      "POST",
      `/v1/lists/${encodeURIComponent(listId)}/items/${encodeURIComponent(itemId)}/accept-alternative`,
      { product_id: productId },
      idempotencyKey,
    );
  }

  share(productId: string, note?: string): Promise<{ recommendation: FeedEntryPayload }> {
    return this.request("POST", "/v1/recommendations", {
      product_id: productId,
      note: note ?? null,
    });
  }

  feed(after?: number, limit = 20): Promise<{ entries: FeedEntryPayload[]; cursor: number }> {
    const query = new URLSearchParams({ limit: String(limit) });
    if (after !== undefined) query.set("after", String(after));
    return this.request("GET", `/v1/feed?${query}`);
  }

  leaderboard(limit = 10): Promise<{ entries: LeaderboardEntryPayload[] }> {
    return this.request("GET", `/v1/leaderboard?${new URLSearchParams({ limit: String(limit) })}`);
  }

  profile(): Promise<ProfilePayload> {
    return this.request("GET", "/v1/profile");
  }
}
