import type { RelationType } from "./schema.js";

// The color contract: this mapping is the single source of truth for
// every relation rendering in the viewer.
export const RELATION_COLORS: Readonly<Record<RelationType, string>> = {
  support: "green",
  attack: "red",
  "critical-support": "blue",
};

export function relationColor(type: RelationType): string {
  return RELATION_COLORS[type];
}

/** Word tint for the static view: polarity color, magnitude opacity. */
export function aggregateColor(value: number): string {
  return value >= 0 ? RELATION_COLORS.support : RELATION_COLORS.attack;
}
