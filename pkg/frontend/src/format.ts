import type { FeatureCount } from "./api.js";

/** First three feature names plus a "+k" overflow marker for longer keys. */
export function truncateKey(names: string[]): { shown: string[]; overflow: string | null } {
  if (names.length <= 3) {
    return { shown: names, overflow: null };
  }
  return { shown: names.slice(0, 3), overflow: `+${names.length - 3}` };
}

export function fmtRatio(v: number | null): string {
  if (v === null) return "n/a";
  return v >= 100 ? v.toFixed(0) : v.toPrecision(3);
}

export function fmtScore(v: number): string {
  return v.toFixed(3);
}

function prefixLen(a: string, b: string): number {
  let i = 0;
  while (i < a.length && i < b.length && a[i].toLowerCase() === b[i].toLowerCase()) i++;
  return i;
}

/**
 * Suggestions for the query segment after the last comma: features whose name
 * contains the fragment, ordered by how often they appear in explanations,
 * then by how closely the name matches (longer shared prefix first).
 */
export function suggestionsFor(query: string, features: FeatureCount[],
                               limit = 8): FeatureCount[] {
  const fragment = (query.split(",").pop() ?? "").trim().toLowerCase();
  const hits = features.filter((f) =>
    fragment === "" || f.name.toLowerCase().includes(fragment));
  return hits
    .slice()
    .sort((a, b) =>
      b.count - a.count ||
      prefixLen(b.name, fragment) - prefixLen(a.name, fragment) ||
      a.name.localeCompare(b.name))
    .slice(0, limit);
}

/** Replace the fragment after the last comma with the accepted suggestion. */
export function completeQuery(query: string, name: string): string {
  const parts = query.split(",");
  parts[parts.length - 1] = " " + name;
  return parts.join(",").replace(/^ /, "");
}
