// Layer palette keyed by layer name, so demo renders stay reproducible.
// Unknown layers fall back to a neutral grey.

export const PALETTE: Record<string, string> = {
  diff: "#2e8b57",
  nwell: "#6a5acd",
  pwell_deep: "#8b4513",
  pwell_shallow: "#cd853f",
  pimp: "#ff8fa3",
  nimp: "#7fd4ff",
  thickox: "#556b2f",
  poly1: "#e63946",
  cont: "#222222",
  met1: "#4c9aff",
};

export const FALLBACK_COLOR = "#9a9a9a";

export function layerColor(layer: string): string {
  return PALETTE[layer] ?? FALLBACK_COLOR;
}

// draw order: wells and markers under diffusion, poly, cuts, then metal
export const LAYER_ORDER = [
  "thickox", "nwell", "pwell_deep", "pwell_shallow", "pimp", "nimp",
  "diff", "poly1", "cont", "met1",
];

export function layerRank(layer: string): number {
  const i = LAYER_ORDER.indexOf(layer);
  return i < 0 ? LAYER_ORDER.length : i;
}
