// Split a decision text around the chunk span so the rendered highlight
// covers exactly the span, character for character.

export interface HighlightSegments {
  before: string;
  highlight: string;
  after: string;
}

export function splitHighlight(
  text: string,
  span: [number, number],
): HighlightSegments {
  const [start, end] = span;
  if (start < 0 || end < start || end > text.length) {
    throw new Error(`highlight span [${start}, ${end}) outside text of length ${text.length}`);
  }
  return {
    before: text.slice(0, start),
    highlight: text.slice(start, end),
    after: text.slice(end),
  };
}
