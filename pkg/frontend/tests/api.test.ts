import { describe, expect, it } from "vitest";

import { ApiError, SearchClient } from "../src/api.js";
import type { SerpPayload } from "../src/payload.js";

function payload(query: string): SerpPayload {
  return { query_text: query, mode: "explainable", term_weights: [], results: [] };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function deferred<T>() {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((res) => {
    resolve = res;
  });
  return { promise, resolve };
}

describe("SearchClient.search", () => {
  it("requests the explainable payload with the query encoded", async () => {
    const urls: string[] = [];
    const client = new SearchClient("", (url) => {
      urls.push(url);
      return Promise.resolve(jsonResponse(payload("a b")));
    });
    await client.search("a b");
    expect(urls).toEqual(["/api/search?q=a%20b&mode=explainable"]);
  });

  it("discards a response that arrives after a newer search started", async () => {
    const first = deferred<Response>();
    const second = deferred<Response>();
    const queue = [first.promise, second.promise];
    const client = new SearchClient("", () => queue.shift()!);

    const oldSearch = client.search("old");
    const newSearch = client.search("new");
    // the old response arrives last; it must be dropped either way
    second.resolve(jsonResponse(payload("new")));
    first.resolve(jsonResponse(payload("old")));

    expect(await newSearch).toMatchObject({ query_text: "new" });
    expect(await oldSearch).toBeNull();
  });

  it("raises ApiError with the engine's error message", async () => {
    const client = new SearchClient("", () =>
      Promise.resolve(jsonResponse({ error: "query has no searchable terms" }, 400)),
    );
    await expect(client.search("the of")).rejects.toThrowError(ApiError);
    await expect(client.search("the of")).rejects.toThrow(/no searchable terms/);
  });

  it("accepts framework-style detail bodies too", async () => {
    const client = new SearchClient("", () =>
      Promise.resolve(jsonResponse({ detail: "Method Not Allowed" }, 405)),
    );
    await expect(client.search("x")).rejects.toThrow(/Method Not Allowed/);
  });

  it("falls back to the status text for non-JSON error bodies", async () => {
    const client = new SearchClient("", () =>
      Promise.resolve(new Response("boom", { status: 500, statusText: "Internal Server Error" })),
    );
    await expect(client.search("x")).rejects.toThrow(/Internal Server Error/);
  });
});

describe("SearchClient.doc", () => {
  it("fetches document metadata by id", async () => {
    const client = new SearchClient("", (url) => {
      expect(url).toBe("/api/doc/FBIS3-1");
      return Promise.resolve(jsonResponse({ doc_id: "FBIS3-1", title: "t", char_length: 42 }));
    });
    const meta = await client.doc("FBIS3-1");
    expect(meta.char_length).toBe(42);
  });

  it("raises ApiError on 404", async () => {
    const client = new SearchClient("", () =>
      Promise.resolve(new Response("", { status: 404, statusText: "Not Found" })),
    );
    await expect(client.doc("missing")).rejects.toThrowError(ApiError);
  });
});
