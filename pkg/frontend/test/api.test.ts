import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  method?: string;
  headers: Record<string, string>;
  body?: string;
}

function clientWith(
  status: number,
  payload: unknown,
): { client: ApiClient; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const fetchImpl = async (url: string, init?: RequestInit) => {
    calls.push({
      url,
      method: init?.method,
      headers: (init?.headers as Record<string, string>) ?? {},
      body: init?.body as string | undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { client: new ApiClient("http://api.test", "maria-token", fetchImpl), calls };
}

describe("request shaping", () => {
  it("sends the bearer token on every call", async () => {
    const { client, calls } = clientWith(200, { lists: [] });
    await client.lists();
    expect(calls[0].headers["Authorization"]).toBe("Bearer maria-token");
    expect(calls[0].url).toBe("http://api.test/v1/lists");
  });

  it("scan posts the code with an idempotency key", async () => {
    const { client, calls } = clientWith(200, { ok: true });
    await client.scan("L1", "8400000000161", "key-123");
    expect(calls[0].method).toBe("POST");
    expect(calls[0].url).toBe("http://api.test/v1/lists/L1/scan");
    expect(calls[0].headers["Idempotency-Key"]).toBe("key-123");
    expect(JSON.parse(calls[0].body!)).toEqual({ code: "8400000000161" });
  });

  it("accept-alternative targets the item path", async () => {
    const { client, calls } = clientWith(200, { ok: true });
    await client.acceptAlternative("L1", "item-9", "prod-2");
    expect(calls[0].url).toBe(
      "http://api.test/v1/lists/L1/items/item-9/accept-alternative",
    );
    expect(JSON.parse(calls[0].body!)).toEqual({ product_id: "prod-2" });
  });
});

describe("error handling", () => {
  it("unwraps the server error envelope into ApiError", async () => {
    const { client } = clientWith(404, {
      error: { code: "product_unknown", message: "unknown product code '0'", field: null },
    });
    const err = await client.scan("L1", "0").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("product_unknown");
    expect((err as ApiError).status).toBe(404);
  });

  it("network failures become a retriable ApiError", async () => {
    const failing = new ApiClient("http://api.test", null, async () => {
      throw new TypeError("fetch failed");
    });
    const err = await failing.health().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).isNetwork).toBe(true);
  });
});

it("star values pass through bit-exact", async () => {
  const stars = 2.848888888888889;
  const { client } = clientWith(200, {
    item: null,
    product: { stars },
    assessment: { stars },
    alternative: null,
    new_badges: [],
    profile: null,
  });
  const result = await client.scan("L1", "code");
  expect(result.assessment.stars).toBe(stars);
  expect(result.product.stars).toBe(stars);
});
