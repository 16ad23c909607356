// Explanation-document schema and validation.
//
// The viewer consumes documents exactly as the library's renderer emits
// them; validation reports the path of the first offending field so the
// error panel can point at it.

export type RelationType = "support" | "attack" | "critical-support";

export type ChiKind = "word-cloud" | "patch-gallery" | "pie-chart" | "raw-label";

export interface ChiArtifact {
  kind: ChiKind;
  payload: unknown;
}

export interface CloudEntry {
  ngram: string;
  count: number;
}

export interface PieSlice {
  label: string;
  relation: RelationType;
  strength: number;
}

export interface Patch {
  crop: number[];
  activation: number;
}

export interface DocumentArgument {
  id: string;
  stratum: number;
  label: string;
  strength: number;
  chi: ChiArtifact;
}

export interface DocumentRelation {
  source: string;
  target: string;
  type: RelationType;
}

export interface WordAggregate {
  token: string;
  index: number;
  value: number;
}

export interface ExplanationDocument {
  format: string;
  prediction: { label: string; probability: number };
  strata: number[];
  arguments: DocumentArgument[];
  relations: DocumentRelation[];
  word_aggregates: WordAggregate[];
  metadata?: Record<string, unknown>;
}

export interface SchemaIssue {
  path: string;
  message: string;
}

export class SchemaError extends Error {
  readonly issues: SchemaIssue[];

  constructor(issues: SchemaIssue[]) {
    super(issues.map((i) => `${i.path}: ${i.message}`).join("; "));
    this.name = "SchemaError";
    this.issues = issues;
  }
}

const RELATION_TYPES: readonly string[] = ["support", "attack", "critical-support"];
const CHI_KINDS: readonly string[] = ["word-cloud", "patch-gallery", "pie-chart", "raw-label"];

class Checker {
  issues: SchemaIssue[] = [];

  fail(path: string, message: string): void {
    this.issues.push({ path, message });
  }

  object(value: unknown, path: string): value is Record<string, unknown> {
    if (typeof value !== "object" || value === null || Array.isArray(value)) {
      this.fail(path, "expected an object");
      return false;
    }
    return true;
  }

  array(value: unknown, path: string): value is unknown[] {
    if (!Array.isArray(value)) {
      this.fail(path, "expected an array");
      return false;
    }
    return true;
  }

  string(value: unknown, path: string): value is string {
    if (typeof value !== "string") {
      this.fail(path, "expected a string");
      return false;
    }
    return true;
  }

  number(value: unknown, path: string): value is number {
    if (typeof value !== "number" || !Number.isFinite(value)) {
      this.fail(path, "expected a finite number");
      return false;
    }
    return true;
  }
}

/** Validate a parsed JSON value against the document schema. */
export function validateDocument(value: unknown): ExplanationDocument {
  const c = new Checker();
  if (!c.object(value, "$")) {
    throw new SchemaError(c.issues);
  }
  const doc = value;

  c.string(doc.format, "format");

  if (c.object(doc.prediction, "prediction")) {
    c.string(doc.prediction.label, "prediction.label");
    c.number(doc.prediction.probability, "prediction.probability");
  }

  if (c.array(doc.strata, "strata")) {
    doc.strata.forEach((s, i) => c.number(s, `strata[${i}]`));
  }

  const ids = new Set<string>();
  if (c.array(doc.arguments, "arguments")) {
    doc.arguments.forEach((arg, i) => {
      const path = `arguments[${i}]`;
      if (!c.object(arg, path)) return;
      if (c.string(arg.id, `${path}.id`)) {
        if (ids.has(arg.id)) c.fail(`${path}.id`, `duplicate argument id "${arg.id}"`);
        ids.add(arg.id);
      }
      c.number(arg.stratum, `${path}.stratum`);
      c.string(arg.label, `${path}.label`);
      c.number(arg.strength, `${path}.strength`);
      if (c.object(arg.chi, `${path}.chi`)) {
        if (c.string(arg.chi.kind, `${path}.chi.kind`) && !CHI_KINDS.includes(arg.chi.kind)) {
          c.fail(`${path}.chi.kind`, `unknown artifact kind "${arg.chi.kind}"`);
        }
        if (!("payload" in arg.chi)) c.fail(`${path}.chi.payload`, "missing payload");
      }
    });
  }

  if (c.array(doc.relations, "relations")) {
    doc.relations.forEach((rel, i) => {
      const path = `relations[${i}]`;
      if (!c.object(rel, path)) return;
      if (c.string(rel.source, `${path}.source`) && !ids.has(rel.source)) {
        c.fail(`${path}.source`, `unknown argument "${rel.source}"`);
      }
      if (c.string(rel.target, `${path}.target`) && !ids.has(rel.target)) {
        c.fail(`${path}.target`, `unknown argument "${rel.target}"`);
      }
      if (c.string(rel.type, `${path}.type`) && !RELATION_TYPES.includes(rel.type)) {
        c.fail(`${path}.type`, `unknown relation type "${rel.type}"`);
      }
    });
  }

  if (c.array(doc.word_aggregates, "word_aggregates")) {
    doc.word_aggregates.forEach((w, i) => {
      const path = `word_aggregates[${i}]`;
      if (!c.object(w, path)) return;
      c.string(w.token, `${path}.token`);
      c.number(w.index, `${path}.index`);
      c.number(w.value, `${path}.value`);
    });
  }

  if (c.issues.length > 0) {
    throw new SchemaError(c.issues);
  }
  return doc as unknown as ExplanationDocument;
}
