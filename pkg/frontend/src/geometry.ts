// Pure geometry for the two explanation widgets: the term-weight doughnut
// and the document thumbnail with its highlighted passage band. Everything
// here is a function of the payload numbers, so the tests can pin the
// on-screen proportions without a DOM.

import type { TermWeight } from "./payload.js";

export interface DoughnutSegment {
  term: string;
  weight: number;
  /** degrees clockwise from 12 o'clock */
  startAngle: number;
  /** 360 * weight */
  angle: number;
  /** label text, e.g. "49%" */
  percent: string;
}

const WEIGHT_SUM_TOLERANCE = 1e-6;

export function doughnutSegments(weights: readonly TermWeight[]): DoughnutSegment[] {
  if (weights.length === 0) {
    throw new Error("doughnut needs at least one term weight");
  }
  const sum = weights.reduce((acc, w) => acc + w.weight, 0);
  if (Math.abs(sum - 1) > WEIGHT_SUM_TOLERANCE) {
    throw new Error(`term weights sum to ${sum}, expected 1`);
  }
  let start = 0;
  return weights.map(({ term, weight }) => {
    const segment: DoughnutSegment = {
      term,
      weight,
      startAngle: start,
      angle: 360 * weight,
      percent: `${Math.round(weight * 100)}%`,
    };
    start += segment.angle;
    return segment;
  });
}

function polar(cx: number, cy: number, r: number, angleDeg: number): [number, number] {
  const rad = ((angleDeg - 90) * Math.PI) / 180;
  return [cx + r * Math.cos(rad), cy + r * Math.sin(rad)];
}

/**
 * SVG path for one ring segment. A segment of (nearly) 360 degrees is drawn
 * a hair short of full so the arc flags stay unambiguous; the seam is not
 * visible at widget size.
 */
export function arcPath(
  cx: number,
  cy: number,
  outer: number,
  inner: number,
  startAngle: number,
  angle: number,
): string {
  const sweep = Math.min(angle, 359.999);
  const end = startAngle + sweep;
  const largeArc = sweep > 180 ? 1 : 0;
  const [x0, y0] = polar(cx, cy, outer, startAngle);
  const [x1, y1] = polar(cx, cy, outer, end);
  const [x2, y2] = polar(cx, cy, inner, end);
  const [x3, y3] = polar(cx, cy, inner, startAngle);
  return (
    `M ${x0} ${y0} ` +
    `A ${outer} ${outer} 0 ${largeArc} 1 ${x1} ${y1} ` +
    `L ${x2} ${y2} ` +
    `A ${inner} ${inner} 0 ${largeArc} 0 ${x3} ${y3} Z`
  );
}

export interface ThumbnailBand {
  /** fraction of page height from the top */
  top: number;
  /** fraction of page height */
  height: number;
}

// A band thinner than this is invisible at thumbnail size, so it is
// stretched to the minimum and kept on the page.
export const MIN_BAND_FRACTION = 0.02;

/**
 * Highlight band for the best passage, as fractions of the page height.
 * Returns null for a blank thumbnail: the document is empty or the span
 * is degenerate (a document that produced no snippet).
 */
export function thumbnailBand(
  charLength: number,
  span: readonly [number, number],
  minHeight: number = MIN_BAND_FRACTION,
): ThumbnailBand | null {
  if (charLength <= 0) {
    return null;
  }
  const [start, end] = span;
  if (start < 0 || end < start || end > charLength) {
    throw new Error(`span [${start}, ${end}] outside document of length ${charLength}`);
  }
  if (end === start) {
    return null;
  }
  let top = start / charLength;
  let height = (end - start) / charLength;
  if (height < minHeight) {
    height = minHeight;
    top = Math.min(top, 1 - height);
  }
  return { top, height };
}
