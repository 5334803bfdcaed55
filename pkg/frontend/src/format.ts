// Presentation-only formatting. Star values arrive from the API at full
// precision; display quantizes to the nearest half star but keeps the raw
// value alongside (tooltips, data attributes) so every shown number is
// traceable to a response field.

export function roundToHalfStar(stars: number): number {
  return Math.round(stars * 2) / 2;
}

/** Fixed-width 0..3 star strip, e.g. 2.5 -> "★★½", 1.8 -> "★★☆". */
export function starGlyphs(stars: number): string {
  const half = roundToHalfStar(Math.max(0, Math.min(3, stars)));
  const full = Math.floor(half);
  const hasHalf = half - full === 0.5;
  return "★".repeat(full) + (hasHalf ? "½" : "") + "☆".repeat(3 - full - (hasHalf ? 1 : 0));
}

export type Severity = "good" | "fair" | "poor";

/** Traffic-light banding over the raw star value. */
export function severity(stars: number): Severity {
  if (stars >= 2) return "good";
  if (stars >= 1) return "fair";
  return "poor";
}

// Icon redundancy so the banding survives color-blind viewing.
const SEVERITY_ICONS: Record<Severity, string> = {
  good: "●",
  fair: "▲",
  poor: "■",
};

export function severityIcon(stars: number): string {
  return SEVERITY_ICONS[severity(stars)];
}

export function formatStars(stars: number): string {
  return roundToHalfStar(stars).toFixed(1);
}

export function formatPoints(points: number): string {
  return points.toLocaleString("en-US");
}
