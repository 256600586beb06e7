// Thin client over the two service endpoints. At most one search is
// "current": each call takes a ticket, and a response whose ticket is no
// longer current resolves to null so stale results never reach the page.

import type { DocMeta, SerpPayload } from "./payload.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string) => Promise<Response>;

export class SearchClient {
  private seq = 0;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  /**
   * Fetch the explainable payload for a query (the regular view is a
   * client-side projection). Resolves to null when a newer search was
   * issued while this one was in flight.
   */
  async search(query: string): Promise<SerpPayload | null> {
    const ticket = ++this.seq;
    const url = `${this.baseUrl}/api/search?q=${encodeURIComponent(query)}&mode=explainable`;
    const response = await this.fetchFn(url);
    if (ticket !== this.seq) {
      return null;
    }
    if (!response.ok) {
      // the engine reports errors as {"error": ...}; framework-level
      // failures (validation, static files) use {"detail": ...}
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { error?: string; detail?: string };
        detail = body.error ?? body.detail ?? detail;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    const payload = (await response.json()) as SerpPayload;
    return ticket === this.seq ? payload : null;
  }

  async doc(docId: string): Promise<DocMeta> {
    const response = await this.fetchFn(`${this.baseUrl}/api/doc/${encodeURIComponent(docId)}`);
    if (!response.ok) {
      throw new ApiError(response.status, response.statusText);
    }
    return (await response.json()) as DocMeta;
  }
}
