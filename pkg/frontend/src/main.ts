import { ApiError, SearchClient } from "./api.js";
import type { Mode, SerpPayload } from "./payload.js";
import { renderResults, renderStatus } from "./render.js";
import { buildViewModel } from "./viewmodel.js";

const form = document.querySelector<HTMLFormElement>("#search-form")!;
const input = document.querySelector<HTMLInputElement>("#query")!;
const resultsEl = document.querySelector<HTMLElement>("#results")!;
const modeInputs = document.querySelectorAll<HTMLInputElement>("input[name=mode]");

const client = new SearchClient();
let mode: Mode = "regular";
let lastPayload: SerpPayload | null = null;

function rerender(): void {
  if (lastPayload) {
    renderResults(resultsEl, buildViewModel(lastPayload, mode));
  }
}

for (const radio of modeInputs) {
  radio.addEventListener("change", () => {
    if (radio.checked) {
      mode = radio.value as Mode;
      rerender(); // same payload, no refetch
    }
  });
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  const query = input.value.trim();
  if (!query) {
    return;
  }
  renderStatus(resultsEl, "loading", "Searching");
  client
    .search(query)
    .then((payload) => {
      if (payload === null) {
        return; // superseded by a newer query
      }
      lastPayload = payload;
      rerender();
    })
    .catch((err: unknown) => {
      const message = err instanceof ApiError ? err.message : "Search failed, please retry";
      renderStatus(resultsEl, "error", message);
    });
});
