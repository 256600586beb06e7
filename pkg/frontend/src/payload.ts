// Shapes delivered by /api/search and /api/doc. Field names mirror the
// service's JSON schema; optional fields are omitted by the server in
// regular mode, never set to null.

export type Mode = "regular" | "explainable";

export interface TermWeight {
  term: string;
  weight: number;
}

export interface SerpResult {
  doc_id: string;
  title: string;
  snippet_text: string;
  score: number;
  rank: number;
  snippet_char_span?: [number, number];
  doc_char_length?: number;
  best_passage_index?: number;
}

export interface SerpPayload {
  query_text: string;
  query_id?: string;
  mode: Mode;
  term_weights?: TermWeight[];
  results: SerpResult[];
}

export interface DocMeta {
  doc_id: string;
  title: string;
  char_length: number;
  text?: string;
}
