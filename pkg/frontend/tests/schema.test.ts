import { describe, expect, it } from "vitest";

import { SchemaError, validateDocument } from "../src/schema.js";
import { goldenNames, readGolden } from "./helpers.js";

describe("document validation", () => {
  it("accepts every golden document", () => {
    for (const name of goldenNames()) {
      expect(() => validateDocument(readGolden(name)), name).not.toThrow();
    }
  });

  it("rejects non-objects with the root path", () => {
    for (const bad of [null, 3, "hello", [1, 2]]) {
      try {
        validateDocument(bad);
        expect.unreachable("should have thrown");
      } catch (err) {
        expect(err).toBeInstanceOf(SchemaError);
        expect((err as SchemaError).issues[0].path).toBe("$");
      }
    }
  });

  it("reports the failing path for a missing prediction label", () => {
    const doc = readGolden("toy_0.json") as Record<string, unknown>;
    const prediction = doc.prediction as Record<string, unknown>;
    delete prediction.label;
    try {
      validateDocument(doc);
      expect.unreachable("should have thrown");
    } catch (err) {
      const issues = (err as SchemaError).issues;
      expect(issues.map((i) => i.path)).toContain("prediction.label");
    }
  });

  it("reports the failing path for a bad strength", () => {
    const doc = readGolden("toy_0.json") as { arguments: { strength: unknown }[] };
    doc.arguments[1].strength = "big";
    try {
      validateDocument(doc);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect((err as SchemaError).issues[0].path).toBe("arguments[1].strength");
    }
  });

  it("rejects relations pointing at unknown arguments", () => {
    const doc = readGolden("toy_0.json") as { relations: { source: string }[] };
    doc.relations[0].source = "ghost";
    try {
      validateDocument(doc);
      expect.unreachable("should have thrown");
    } catch (err) {
      const issue = (err as SchemaError).issues[0];
      expect(issue.path).toBe("relations[0].source");
      expect(issue.message).toContain("ghost");
    }
  });

  it("rejects unknown relation types and artifact kinds", () => {
    const doc = readGolden("toy_0.json") as {
      relations: { type: string }[];
      arguments: { chi: { kind: string } }[];
    };
    doc.relations[0].type = "praise";
    doc.arguments[0].chi.kind = "hologram";
    try {
      validateDocument(doc);
      expect.unreachable("should have thrown");
    } catch (err) {
      const paths = (err as SchemaError).issues.map((i) => i.path);
      expect(paths).toContain("relations[0].type");
      expect(paths).toContain("arguments[0].chi.kind");
    }
  });

  it("rejects duplicate argument ids", () => {
    const doc = readGolden("toy_0.json") as { arguments: { id: string }[] };
    doc.arguments[1].id = doc.arguments[0].id;
    expect(() => validateDocument(doc)).toThrow(SchemaError);
  });
});
