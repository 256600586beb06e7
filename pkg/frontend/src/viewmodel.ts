// Builds what the page shows from one payload and the selected mode.
// The payload is fetched once in explainable form; the regular view is a
// projection of it, so toggling modes re-renders without another request
// and can never reorder results.

import { DoughnutSegment, ThumbnailBand, doughnutSegments, thumbnailBand } from "./geometry.js";
import type { Mode, SerpPayload } from "./payload.js";
import { boldfaceTerms } from "./snippet.js";

export const DEFAULT_PAGE_SIZE = 5;

export interface ResultView {
  docId: string;
  title: string;
  rank: number;
  score: number;
  snippetHtml: string;
  /** absent in regular mode; null renders a blank thumbnail */
  thumbnail?: ThumbnailBand | null;
}

export interface ViewModel {
  mode: Mode;
  queryText: string;
  results: ResultView[];
  /** absent in regular mode and when the payload carries no weights */
  doughnut?: DoughnutSegment[];
}

export function buildViewModel(
  payload: SerpPayload,
  mode: Mode,
  pageSize: number = DEFAULT_PAGE_SIZE,
): ViewModel {
  const surfaces = payload.query_text.split(/\s+/).filter((t) => t.length > 0);
  const explainable = mode === "explainable";

  const results = payload.results.slice(0, pageSize).map((r) => {
    const view: ResultView = {
      docId: r.doc_id,
      title: r.title,
      rank: r.rank,
      score: r.score,
      snippetHtml: boldfaceTerms(r.snippet_text, surfaces),
    };
    if (explainable && r.snippet_char_span !== undefined && r.doc_char_length !== undefined) {
      view.thumbnail = thumbnailBand(r.doc_char_length, r.snippet_char_span);
    }
    return view;
  });

  const vm: ViewModel = { mode, queryText: payload.query_text, results };
  if (explainable && payload.term_weights !== undefined && payload.term_weights.length > 0) {
    vm.doughnut = doughnutSegments(payload.term_weights);
  }
  return vm;
}
