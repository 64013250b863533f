import { describe, expect, it } from "vitest";

import { LABEL_OPTIONS, frenchFor, optionForKey, wireLabelFor } from "../src/labels.js";

describe("label options", () => {
  it("maps Oui to the yes wire label", () => {
    expect(wireLabelFor("Oui")).toBe("yes");
  });

  it("maps the facts-only option to no_facts", () => {
    expect(wireLabelFor("Non, faits ou prétentions des parties uniquement")).toBe("no_facts");
  });

  it("maps the special-regime option to no_special_regime", () => {
    expect(wireLabelFor("Non, application d'un régime spécial")).toBe("no_special_regime");
  });

  it("exposes exactly the six campaign options", () => {
    expect(LABEL_OPTIONS.map((o) => o.wire)).toEqual([
      "yes",
      "no",
      "no_facts",
      "no_special_regime",
      "unsure",
      "review",
    ]);
  });

  it("gives every option a distinct keyboard shortcut", () => {
    const keys = LABEL_OPTIONS.map((o) => o.key);
    expect(new Set(keys).size).toBe(keys.length);
    expect(optionForKey("1")?.wire).toBe("yes");
    expect(optionForKey("6")?.wire).toBe("review");
  });

  it("round-trips wire values back to French", () => {
    for (const option of LABEL_OPTIONS) {
      expect(frenchFor(option.wire)).toBe(option.french);
    }
  });

  it("rejects unknown display strings", () => {
    expect(() => wireLabelFor("Peut-être")).toThrow();
  });
});
