// Pure render model: everything the DOM layer needs, derived from
// (document, expanded set) alone. No DOM types appear here, so the
// model is testable in plain node and identical across re-renders.

import { aggregateColor, relationColor } from "./colors.js";
import {
  ChiKind,
  CloudEntry,
  DocumentArgument,
  ExplanationDocument,
  Patch,
  PieSlice,
  RelationType,
} from "./schema.js";
import { ViewState } from "./state.js";

export interface ChildView {
  id: string;
  label: string;
  relation: RelationType;
  color: string;
  strength: number;
}

export interface CloudView {
  ngram: string;
  count: number;
  scale: number; // 0.5 .. 1, by activating-sample count
}

export interface SliceView {
  label: string;
  relation: RelationType;
  color: string;
  shade: "dark" | "mid" | "light"; // strongest dark, weakest light per relation
  fraction: number;
  strength: number;
}

export interface ExpansionView {
  kind: ChiKind;
  cloud: CloudView[];
  slices: SliceView[];
  patches: Patch[];
  rawLabel: string | null;
  children: ChildView[];
}

export interface IntermediateView {
  id: string;
  label: string;
  strength: number;
  size: number; // 0.35 .. 1, proportional to strength
  relation: RelationType | null;
  color: string;
  expanded: boolean;
  detail: ExpansionView | null;
}

export interface WordView {
  token: string;
  index: number;
  value: number;
  color: string;
  intensity: number; // 0 .. 1
}

export interface RenderModel {
  header: { label: string; probability: number; percent: string };
  strata: number[];
  intermediates: IntermediateView[];
  words: WordView[];
  expansionsOpen: string[];
}

function byId(doc: ExplanationDocument): Map<string, DocumentArgument> {
  return new Map(doc.arguments.map((a) => [a.id, a]));
}

function incoming(doc: ExplanationDocument, id: string): ChildView[] {
  const args = byId(doc);
  const children: ChildView[] = [];
  for (const rel of doc.relations) {
    if (rel.target !== id) continue;
    const child = args.get(rel.source);
    if (child === undefined) continue;
    children.push({
      id: child.id,
      label: child.label,
      relation: rel.type,
      color: relationColor(rel.type),
      strength: child.strength,
    });
  }
  children.sort((a, b) => b.strength - a.strength || (a.id < b.id ? -1 : 1));
  return children;
}

function cloudView(payload: unknown): CloudView[] {
  const entries = (payload as CloudEntry[]) ?? [];
  const maxCount = entries.reduce((m, e) => Math.max(m, e.count), 1);
  return entries.map((e) => ({
    ngram: e.ngram,
    count: e.count,
    scale: 0.5 + 0.5 * (e.count / maxCount),
  }));
}

function sliceViews(payload: unknown): SliceView[] {
  const slices = (payload as PieSlice[]) ?? [];
  const total = slices.reduce((s, x) => s + x.strength, 0) || 1;
  const byRelation = new Map<RelationType, PieSlice[]>();
  for (const slice of slices) {
    const group = byRelation.get(slice.relation) ?? [];
    group.push(slice);
    byRelation.set(slice.relation, group);
  }
  return slices.map((slice) => {
    const group = byRelation.get(slice.relation)!;
    const strongest = Math.max(...group.map((s) => s.strength));
    const weakest = Math.min(...group.map((s) => s.strength));
    let shade: SliceView["shade"] = "mid";
    if (group.length === 1 || slice.strength === strongest) shade = "dark";
    else if (slice.strength === weakest) shade = "light";
    return {
      label: slice.label,
      relation: slice.relation,
      color: relationColor(slice.relation),
      shade,
      fraction: slice.strength / total,
      strength: slice.strength,
    };
  });
}

function expansionView(doc: ExplanationDocument, arg: DocumentArgument): ExpansionView {
  const kind = arg.chi.kind;
  return {
    kind,
    cloud: kind === "word-cloud" ? cloudView(arg.chi.payload) : [],
    slices: kind === "pie-chart" ? sliceViews(arg.chi.payload) : [],
    patches: kind === "patch-gallery" ? ((arg.chi.payload as Patch[]) ?? []) : [],
    rawLabel: kind === "raw-label" ? String(arg.chi.payload) : null,
    children: incoming(doc, arg.id),
  };
}

/** Build the complete render model for one state. Pure. */
export function buildRenderModel(state: ViewState): RenderModel {
  const doc = state.doc;
  const k = doc.strata.length;
  const intermediateArgs = doc.arguments.filter((a) => a.stratum > 1 && a.stratum < k);
  const relationOf = new Map(doc.relations.map((r) => [r.source, r.type]));
  const maxStrength = intermediateArgs.reduce((m, a) => Math.max(m, a.strength), 0) || 1;

  const intermediates: IntermediateView[] = intermediateArgs
    .slice()
    .sort((a, b) => b.strength - a.strength || (a.id < b.id ? -1 : 1))
    .map((arg) => {
      const relation = relationOf.get(arg.id) ?? null;
      const expanded = state.expanded.has(arg.id);
      return {
        id: arg.id,
        label: arg.label,
        strength: arg.strength,
        size: 0.35 + 0.65 * (arg.strength / maxStrength),
        relation,
        color: relation === null ? "gray" : relationColor(relation),
        expanded,
        detail: expanded ? expansionView(doc, arg) : null,
      };
    });

  const maxAggregate = doc.word_aggregates.reduce((m, w) => Math.max(m, Math.abs(w.value)), 0) || 1;
  const words: WordView[] = doc.word_aggregates.map((w) => ({
    token: w.token,
    index: w.index,
    value: w.value,
    color: aggregateColor(w.value),
    intensity: Math.abs(w.value) / maxAggregate,
  }));

  return {
    header: {
      label: doc.prediction.label,
      probability: doc.prediction.probability,
      percent: `${(doc.prediction.probability * 100).toFixed(2)}%`,
    },
    strata: doc.strata.slice(),
    intermediates,
    words,
    expansionsOpen: [...state.expanded].sort(),
  };
}
