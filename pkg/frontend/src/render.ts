// DOM rendering. Result rows are appended in view-model order; nothing
// here sorts or filters.

import { arcPath } from "./geometry.js";
import { escapeHtml } from "./snippet.js";
import type { ViewModel } from "./viewmodel.js";

const PALETTE = ["#4878a8", "#e49444", "#5fa052", "#d1605e", "#857aab", "#9d7660", "#c87fa8"];

export function renderStatus(root: HTMLElement, kind: "loading" | "error" | "empty", message: string): void {
  root.innerHTML = `<p class="status status-${kind}">${escapeHtml(message)}</p>`;
}

function doughnutSvg(vm: ViewModel): string {
  if (!vm.doughnut) {
    return "";
  }
  const paths = vm.doughnut
    .map(
      (seg, i) =>
        `<path d="${arcPath(60, 60, 54, 30, seg.startAngle, seg.angle)}" ` +
        `fill="${PALETTE[i % PALETTE.length]}"><title>${escapeHtml(seg.term)} ${seg.percent}</title></path>`,
    )
    .join("");
  const legend = vm.doughnut
    .map(
      (seg, i) =>
        `<li><span class="swatch" style="background:${PALETTE[i % PALETTE.length]}"></span>` +
        `${escapeHtml(seg.term)} <span class="pct">${seg.percent}</span></li>`,
    )
    .join("");
  return (
    `<aside class="explain-terms"><h2>Term importance</h2>` +
    `<svg viewBox="0 0 120 120" role="img" aria-label="query term weights">${paths}</svg>` +
    `<ul class="legend">${legend}</ul></aside>`
  );
}

function thumbnailHtml(view: ViewModel["results"][number]): string {
  if (view.thumbnail === undefined) {
    return "";
  }
  const band = view.thumbnail;
  const inner =
    band === null
      ? ""
      : `<span class="band" style="top:${(band.top * 100).toFixed(3)}%;height:${(band.height * 100).toFixed(3)}%"></span>`;
  return `<span class="thumb" title="best passage position">${inner}</span>`;
}

export function renderResults(root: HTMLElement, vm: ViewModel): void {
  if (vm.results.length === 0) {
    renderStatus(root, "empty", `No results for "${vm.queryText}"`);
    return;
  }
  const rows = vm.results
    .map(
      (r) =>
        `<li class="result">` +
        thumbnailHtml(r) +
        `<div class="result-main">` +
        `<h3 class="title">${escapeHtml(r.title)}</h3>` +
        `<p class="snippet">${r.snippetHtml}</p>` +
        `<p class="meta">${escapeHtml(r.docId)}</p>` +
        `</div></li>`,
    )
    .join("");
  root.innerHTML =
    doughnutSvg(vm) + `<ol class="results" start="${vm.results[0].rank}">${rows}</ol>`;
}
