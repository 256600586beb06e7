// Snippet markup: query terms boldfaced as whole words, everything else
// escaped verbatim. Matching runs on the raw text first and escaping is
// applied per slice, so entities introduced by escaping can never match.

const HTML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => HTML_ESCAPES[ch]);
}

function escapeRegExp(term: string): string {
  return term.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

/**
 * Boldface case-insensitive whole-word occurrences of the query's surface
 * terms. "winter" matches "Winter" but not "winterberry". Terms are the
 * forms the user typed, not stemmed forms.
 */
export function boldfaceTerms(text: string, surfaceTerms: readonly string[]): string {
  const terms = [...new Set(surfaceTerms.filter((t) => t.length > 0))];
  if (terms.length === 0 || text.length === 0) {
    return escapeHtml(text);
  }
  // longest first, so a term that contains another is matched whole
  terms.sort((a, b) => b.length - a.length);
  const pattern = new RegExp(
    `(?<![\\w])(?:${terms.map(escapeRegExp).join("|")})(?![\\w])`,
    "gi",
  );
  let html = "";
  let last = 0;
  for (const match of text.matchAll(pattern)) {
    const at = match.index ?? 0;
    html += escapeHtml(text.slice(last, at));
    html += `<b>${escapeHtml(match[0])}</b>`;
    last = at + match[0].length;
  }
  return html + escapeHtml(text.slice(last));
}
