import { describe, expect, it } from "vitest";

import { splitHighlight } from "../src/highlight.js";

describe("splitHighlight", () => {
  it("covers exactly the span", () => {
    const text = "Avant. Le passage surligné. Après.";
    const start = text.indexOf("Le passage");
    const end = start + "Le passage surligné.".length;
    const segments = splitHighlight(text, [start, end]);
    expect(segments.highlight).toBe("Le passage surligné.");
    expect(segments.before + segments.highlight + segments.after).toBe(text);
  });

  it("handles a span at the origin", () => {
    const segments = splitHighlight("abcdef", [0, 3]);
    expect(segments).toEqual({ before: "", highlight: "abc", after: "def" });
  });

  it("handles a full-text span", () => {
    const segments = splitHighlight("abc", [0, 3]);
    expect(segments).toEqual({ before: "", highlight: "abc", after: "" });
  });

  it("rejects spans outside the text", () => {
    expect(() => splitHighlight("abc", [0, 4])).toThrow();
    expect(() => splitHighlight("abc", [-1, 2])).toThrow();
    expect(() => splitHighlight("abc", [2, 1])).toThrow();
  });
});
